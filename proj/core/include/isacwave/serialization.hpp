// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <vector>

#include "isacwave/types.hpp"

namespace isacwave {

// Minimal CSV emitter, RFC 4180 quoting, LF line endings, '.' decimal point.
// Numeric cells use shortest round-trip formatting so equal doubles always
// produce equal bytes.
class CsvWriter {
 public:
  // Throws std::invalid_argument naming the path when the file cannot be
  // opened for writing.
  explicit CsvWriter(const std::string& path);

  void row(const std::vector<std::string>& cells);

  static std::string num(double v);
  static std::string num(std::int64_t v);
  static std::string num(std::uint64_t v);
  static std::string num(int v) { return num(static_cast<std::int64_t>(v)); }

 private:
  std::ofstream out_;
  std::string path_;
};

// Waveform container: one effective time-domain frame plus the grid it was
// designed on. samples.size() == grid.time_len(mode) always holds.
struct CwfFile {
  GridConfig grid;
  SamplingMode mode = SamplingMode::kNyquist;
  CVec samples;
};

// Binary waveform file, little endian:
//   bytes 0..3   magic "CWF1"
//   u32          format version (1)
//   u32 x 4      n_tx, n_sub, n_cp, os_rate
//   u8           sampling mode (0 symbol rate, 1 oversampled)
//   7 bytes      reserved, zero
//   u64          sample count
//   count x 2    doubles, re then im per sample
void write_cwf(const std::string& path, const CwfFile& file);

// Throws std::invalid_argument naming the path on any malformed content:
// bad magic or version, inconsistent grid, count mismatch, truncated payload,
// or non-finite samples.
CwfFile read_cwf(const std::string& path);

// Whole-file text helpers; both throw std::invalid_argument naming the path.
std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

}  // namespace isacwave
