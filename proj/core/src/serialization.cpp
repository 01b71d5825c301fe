// SPDX-License-Identifier: Apache-2.0
#include "isacwave/serialization.hpp"

#include <charconv>
#include <cmath>
#include <cstring>
#include <sstream>
#include <stdexcept>
#include <system_error>

namespace isacwave {

namespace {

bool needs_quoting(const std::string& cell) {
  return cell.find_first_of(",\"\r\n") != std::string::npos;
}

std::string quoted(const std::string& cell) {
  std::string out;
  out.reserve(cell.size() + 2);
  out.push_back('"');
  for (char c : cell) {
    if (c == '"') out.push_back('"');
    out.push_back(c);
  }
  out.push_back('"');
  return out;
}

[[noreturn]] void bad_file(const std::string& path, const std::string& what) {
  throw std::invalid_argument(path + ": " + what);
}

}  // namespace

CsvWriter::CsvWriter(const std::string& path)
    : out_(path, std::ios::binary), path_(path) {
  if (!out_) bad_file(path, "cannot open for writing");
}

void CsvWriter::row(const std::vector<std::string>& cells) {
  for (std::size_t i = 0; i < cells.size(); ++i) {
    if (i) out_.put(',');
    const std::string& c = cells[i];
    out_ << (needs_quoting(c) ? quoted(c) : c);
  }
  out_.put('\n');
  if (!out_) bad_file(path_, "write failed");
}

std::string CsvWriter::num(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

std::string CsvWriter::num(std::int64_t v) { return std::to_string(v); }
std::string CsvWriter::num(std::uint64_t v) { return std::to_string(v); }

namespace {

constexpr char kMagic[4] = {'C', 'W', 'F', '1'};
constexpr std::uint32_t kCwfVersion = 1;

void put_u32(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

void put_u64(std::ostream& out, std::uint64_t v) {
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 8);
}

void put_f64(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, sizeof(bits));
  put_u64(out, bits);
}

std::uint32_t get_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

std::uint64_t get_u64(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  return v;
}

double get_f64(std::istream& in) {
  std::uint64_t bits = get_u64(in);
  double v;
  std::memcpy(&v, &bits, sizeof(v));
  return v;
}

}  // namespace

void write_cwf(const std::string& path, const CwfFile& file) {
  file.grid.validate();
  if (file.samples.size() != file.grid.time_len(file.mode)) {
    throw std::invalid_argument("write_cwf: sample count does not match the grid");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) bad_file(path, "cannot open for writing");

  out.write(kMagic, 4);
  put_u32(out, kCwfVersion);
  put_u32(out, static_cast<std::uint32_t>(file.grid.n_tx));
  put_u32(out, static_cast<std::uint32_t>(file.grid.n_sub));
  put_u32(out, static_cast<std::uint32_t>(file.grid.n_cp));
  put_u32(out, static_cast<std::uint32_t>(file.grid.os_rate));
  char mode_and_reserved[8] = {};
  mode_and_reserved[0] = file.mode == SamplingMode::kNyquist ? 0 : 1;
  out.write(mode_and_reserved, 8);
  put_u64(out, static_cast<std::uint64_t>(file.samples.size()));
  for (Eigen::Index i = 0; i < file.samples.size(); ++i) {
    put_f64(out, file.samples[i].real());
    put_f64(out, file.samples[i].imag());
  }
  if (!out) bad_file(path, "write failed");
}

CwfFile read_cwf(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_file(path, "cannot open for reading");

  char magic[4];
  in.read(magic, 4);
  if (!in || std::memcmp(magic, kMagic, 4) != 0) bad_file(path, "not a CWF file");
  if (get_u32(in) != kCwfVersion) bad_file(path, "unsupported CWF version");

  CwfFile file;
  file.grid.n_tx = static_cast<int>(get_u32(in));
  file.grid.n_sub = static_cast<int>(get_u32(in));
  file.grid.n_cp = static_cast<int>(get_u32(in));
  file.grid.os_rate = static_cast<int>(get_u32(in));
  unsigned char mode_and_reserved[8];
  in.read(reinterpret_cast<char*>(mode_and_reserved), 8);
  if (!in) bad_file(path, "truncated header");
  if (mode_and_reserved[0] > 1) bad_file(path, "unknown sampling mode");
  file.mode = mode_and_reserved[0] ? SamplingMode::kOversampled : SamplingMode::kNyquist;

  try {
    file.grid.validate();
  } catch (const std::invalid_argument& e) {
    bad_file(path, std::string("bad grid: ") + e.what());
  }

  const std::uint64_t count = get_u64(in);
  if (!in) bad_file(path, "truncated header");
  const auto expected = static_cast<std::uint64_t>(file.grid.time_len(file.mode));
  if (count != expected) bad_file(path, "sample count does not match the grid");

  file.samples.resize(static_cast<Eigen::Index>(count));
  for (std::uint64_t i = 0; i < count; ++i) {
    const double re = get_f64(in);
    const double im = get_f64(in);
    if (!in) bad_file(path, "truncated payload");
    if (!std::isfinite(re) || !std::isfinite(im)) bad_file(path, "non-finite sample");
    file.samples[static_cast<Eigen::Index>(i)] = cplx(re, im);
  }
  if (in.get() != std::ifstream::traits_type::eof()) bad_file(path, "trailing bytes");
  return file;
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) bad_file(path, "cannot open for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (!in && !in.eof()) bad_file(path, "read failed");
  return buf.str();
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) bad_file(path, "cannot open for writing");
  out.write(text.data(), static_cast<std::streamsize>(text.size()));
  if (!out) bad_file(path, "write failed");
}

}  // namespace isacwave
