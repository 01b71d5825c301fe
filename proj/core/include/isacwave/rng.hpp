// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace isacwave {

// All randomness in the library flows through this class so that equal seeds
// reproduce bit-identical streams on every platform. std::normal_distribution
// is implementation defined, hence the explicit Box-Muller transform.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform on [0, 1) with 53 random mantissa bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    constexpr double two_pi = 6.283185307179586476925286766559;
    spare_ = r * std::sin(two_pi * u2);
    have_spare_ = true;
    return r * std::cos(two_pi * u2);
  }

  // Circularly symmetric complex normal with unit total variance.
  std::complex<double> cnormal() {
    const double re = normal();
    const double im = normal();
    constexpr double inv_sqrt2 = 0.70710678118654752440;
    return {re * inv_sqrt2, im * inv_sqrt2};
  }

 private:
  std::mt19937_64 eng_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

namespace detail {
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}
}  // namespace detail

// Stable seed for a named substream of a master seed. Different (stream,
// index) pairs give statistically independent engines, and experiment
// pipelines stay reproducible when trials run in any order.
inline std::uint64_t derive_seed(std::uint64_t master, std::string_view stream,
                                 std::uint64_t index) {
  std::uint64_t h = detail::splitmix64(master);
  for (const char c : stream) {
    h = detail::splitmix64(h ^ static_cast<std::uint8_t>(c));
  }
  return detail::splitmix64(h ^ detail::splitmix64(index));
}

}  // namespace isacwave
