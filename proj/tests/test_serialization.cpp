// SPDX-License-Identifier: Apache-2.0
#include "isacwave/serialization.hpp"

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "doctest.h"
#include "isacwave/operators.hpp"
#include "test_support.hpp"

using namespace isacwave;
namespace fs = std::filesystem;

namespace {

fs::path temp_dir() {
  static const fs::path dir = [] {
    fs::path d = fs::temp_directory_path() / "isacwave-serialization-tests";
    fs::create_directories(d);
    return d;
  }();
  return dir;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  REQUIRE(in.good());
  return std::string(std::istreambuf_iterator<char>(in), {});
}

std::string raw_cwf_bytes(const CwfFile& file, const char* name) {
  const fs::path p = temp_dir() / name;
  write_cwf(p.string(), file);
  return slurp(p);
}

void write_bytes(const fs::path& p, const std::string& bytes) {
  std::ofstream out(p, std::ios::binary);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace

TEST_CASE("csv cells are quoted per RFC 4180") {
  const fs::path p = temp_dir() / "quoting.csv";
  {
    CsvWriter w(p.string());
    w.row({"plain", "with,comma", "with\"quote", "multi\nline", "cr\rcell", ""});
    w.row({"1", "2.5"});
  }
  CHECK(slurp(p) ==
        "plain,\"with,comma\",\"with\"\"quote\",\"multi\nline\",\"cr\rcell\",\n"
        "1,2.5\n");
}

TEST_CASE("csv writer refuses an unwritable path") {
  CHECK_THROWS_WITH_AS(CsvWriter("/nonexistent-dir/x.csv"),
                       doctest::Contains("/nonexistent-dir/x.csv"),
                       std::invalid_argument);
}

TEST_CASE("numeric formatting round-trips exactly") {
  const double values[] = {0.0,
                           -0.0,
                           1.0,
                           -1.5,
                           1.0 / 3.0,
                           1e-300,
                           -2.5e300,
                           std::numeric_limits<double>::denorm_min(),
                           0.1,
                           123456789.123456789};
  for (double v : values) {
    const std::string s = CsvWriter::num(v);
    double back = 0.0;
    const auto res = std::from_chars(s.data(), s.data() + s.size(), back);
    REQUIRE(res.ec == std::errc());
    CHECK(back == v);
    // Shortest form never drags printf-style trailing zeros along.
    if (v == 1.0) CHECK(s == "1");
  }
  CHECK(CsvWriter::num(static_cast<std::int64_t>(-42)) == "-42");
  CHECK(CsvWriter::num(static_cast<std::uint64_t>(18446744073709551615ull)) ==
        "18446744073709551615");
}

TEST_CASE("waveform files round-trip bit for bit") {
  const GridConfig grid{3, 6, 2, 2};
  for (const SamplingMode mode : {SamplingMode::kNyquist, SamplingMode::kOversampled}) {
    CwfFile file;
    file.grid = grid;
    file.mode = mode;
    file.samples = testsup::random_cvec(grid.time_len(mode), 7);

    const fs::path p = temp_dir() / "roundtrip.cwf";
    write_cwf(p.string(), file);
    const CwfFile back = read_cwf(p.string());

    CHECK(back.grid.n_tx == grid.n_tx);
    CHECK(back.grid.n_sub == grid.n_sub);
    CHECK(back.grid.n_cp == grid.n_cp);
    CHECK(back.grid.os_rate == grid.os_rate);
    CHECK(back.mode == mode);
    REQUIRE(back.samples.size() == file.samples.size());
    CHECK((back.samples - file.samples).cwiseAbs().maxCoeff() == 0.0);
  }
}

TEST_CASE("waveform writer validates the sample count") {
  CwfFile file;
  file.grid = GridConfig{2, 4, 1, 2};
  file.mode = SamplingMode::kNyquist;
  file.samples = CVec::Ones(5);  // needs 8
  CHECK_THROWS_AS(write_cwf((temp_dir() / "bad.cwf").string(), file),
                  std::invalid_argument);
}

TEST_CASE("waveform reader rejects malformed files") {
  const GridConfig grid{2, 4, 1, 2};
  CwfFile file;
  file.grid = grid;
  file.mode = SamplingMode::kOversampled;
  file.samples = testsup::random_cvec(grid.time_len(file.mode), 9);
  const std::string good = raw_cwf_bytes(file, "good.cwf");

  const fs::path p = temp_dir() / "mangled.cwf";

  SUBCASE("missing file") {
    CHECK_THROWS_WITH_AS(read_cwf((temp_dir() / "nope.cwf").string()),
                         doctest::Contains("nope.cwf"), std::invalid_argument);
  }
  SUBCASE("bad magic") {
    std::string b = good;
    b[0] = 'X';
    write_bytes(p, b);
    CHECK_THROWS_WITH_AS(read_cwf(p.string()), doctest::Contains("not a CWF"),
                         std::invalid_argument);
  }
  SUBCASE("bad version") {
    std::string b = good;
    b[4] = 2;
    write_bytes(p, b);
    CHECK_THROWS_WITH_AS(read_cwf(p.string()), doctest::Contains("version"),
                         std::invalid_argument);
  }
  SUBCASE("inconsistent grid") {
    std::string b = good;
    b[12] = 0;  // n_sub = 0
    write_bytes(p, b);
    CHECK_THROWS_WITH_AS(read_cwf(p.string()), doctest::Contains("bad grid"),
                         std::invalid_argument);
  }
  SUBCASE("unknown sampling mode") {
    std::string b = good;
    b[24] = 7;
    write_bytes(p, b);
    CHECK_THROWS_WITH_AS(read_cwf(p.string()), doctest::Contains("sampling mode"),
                         std::invalid_argument);
  }
  SUBCASE("count mismatch") {
    std::string b = good;
    b[32] = static_cast<char>(b[32] + 1);
    write_bytes(p, b);
    CHECK_THROWS_WITH_AS(read_cwf(p.string()), doctest::Contains("sample count"),
                         std::invalid_argument);
  }
  SUBCASE("truncated payload") {
    write_bytes(p, good.substr(0, good.size() - 5));
    CHECK_THROWS_WITH_AS(read_cwf(p.string()), doctest::Contains("truncated"),
                         std::invalid_argument);
  }
  SUBCASE("trailing bytes") {
    write_bytes(p, good + "x");
    CHECK_THROWS_WITH_AS(read_cwf(p.string()), doctest::Contains("trailing"),
                         std::invalid_argument);
  }
  SUBCASE("non-finite sample") {
    CwfFile nan_file = file;
    nan_file.samples[3] = cplx(std::numeric_limits<double>::quiet_NaN(), 0.0);
    // write_cwf does not police sample values, only structure; the reader does.
    write_cwf(p.string(), nan_file);
    CHECK_THROWS_WITH_AS(read_cwf(p.string()), doctest::Contains("non-finite"),
                         std::invalid_argument);
  }
}

TEST_CASE("text helpers round-trip and name the path on failure") {
  const fs::path p = temp_dir() / "note.txt";
  const std::string text = "line one\nline two\n";
  write_text_file(p.string(), text);
  CHECK(read_text_file(p.string()) == text);

  CHECK_THROWS_WITH_AS(read_text_file((temp_dir() / "absent.txt").string()),
                       doctest::Contains("absent.txt"), std::invalid_argument);
  CHECK_THROWS_WITH_AS(write_text_file("/nonexistent-dir/out.txt", "x"),
                       doctest::Contains("/nonexistent-dir/out.txt"),
                       std::invalid_argument);
}
