// SPDX-License-Identifier: Apache-2.0
#include "isacwave/channel.hpp"

#include <cmath>
#include <complex>
#include <limits>
#include <vector>

#include "doctest.h"
#include "isacwave/operators.hpp"
#include "test_support.hpp"

using namespace isacwave;
using testsup::random_cvec;

namespace {
const GridConfig kGrid{4, 8, 4, 2};

ChannelConfig base_config() {
  ChannelConfig cfg;
  cfg.n_users = 2;
  cfg.n_taps = 3;
  cfg.rician_k = 1.0;
  cfg.los_angles = {-0.5, 0.5};
  return cfg;
}
}  // namespace

TEST_CASE("channel config validation") {
  ChannelConfig cfg = base_config();
  CHECK_NOTHROW(cfg.validate(kGrid));

  cfg.n_taps = kGrid.n_cp + 2;  // longer than the prefix can absorb
  CHECK_THROWS_AS(cfg.validate(kGrid), std::invalid_argument);

  cfg = base_config();
  cfg.rician_k = -0.5;
  CHECK_THROWS_AS(cfg.validate(kGrid), std::invalid_argument);

  cfg = base_config();
  cfg.los_angles = {0.1};
  CHECK_THROWS_AS(cfg.validate(kGrid), std::invalid_argument);

  cfg = base_config();
  cfg.tap_powers = {0.5, 0.25, 0.30};
  CHECK_THROWS_AS(cfg.validate(kGrid), std::invalid_argument);
  cfg.tap_powers = {0.5, 0.25, 0.25};
  CHECK_NOTHROW(cfg.validate(kGrid));
}

TEST_CASE("uniform default tap powers") {
  const ChannelConfig cfg = base_config();
  const std::vector<double> p = cfg.resolved_tap_powers();
  REQUIRE(p.size() == 3);
  for (const double v : p) CHECK(v == doctest::Approx(1.0 / 3).epsilon(1e-15));
}

TEST_CASE("equal seeds reproduce the channel bit for bit") {
  const ChannelConfig cfg = base_config();
  const ChannelRealization a = sample_channel(cfg, kGrid, 42);
  const ChannelRealization b = sample_channel(cfg, kGrid, 42);
  const ChannelRealization c = sample_channel(cfg, kGrid, 43);
  REQUIRE(a.taps.size() == b.taps.size());
  for (std::size_t t = 0; t < a.taps.size(); ++t)
    CHECK((a.taps[t] - b.taps[t]).cwiseAbs().maxCoeff() == 0.0);
  bool any_diff = false;
  for (std::size_t t = 0; t < a.taps.size(); ++t)
    if ((a.taps[t] - c.taps[t]).cwiseAbs().maxCoeff() > 0.0) any_diff = true;
  CHECK(any_diff);
}

TEST_CASE("frequency response is the tap DFT") {
  const ChannelRealization ch = sample_channel(base_config(), kGrid, 7);
  REQUIRE(ch.n_sub() == kGrid.n_sub);
  for (int n = 0; n < kGrid.n_sub; ++n) {
    CMat want = CMat::Zero(ch.n_users(), ch.n_tx());
    for (std::size_t t = 0; t < ch.taps.size(); ++t) {
      const double ph = -2.0 * M_PI * static_cast<double>(t) * n / kGrid.n_sub;
      want += ch.taps[t] * cplx(std::cos(ph), std::sin(ph));
    }
    CHECK((ch.freq_blocks[static_cast<std::size_t>(n)] - want).cwiseAbs().maxCoeff() <
          1e-12);
  }
}

TEST_CASE("per-subcarrier application matches the block structure") {
  const ChannelRealization ch = sample_channel(base_config(), kGrid, 9);
  const CVec x = random_cvec(kGrid.freq_len(), 11);
  const CVec y = channel_apply(ch, x);
  REQUIRE(y.size() == static_cast<Eigen::Index>(kGrid.n_sub) * 2);
  for (int n = 0; n < kGrid.n_sub; ++n) {
    const CVec want = ch.freq_blocks[static_cast<std::size_t>(n)] *
                      x.segment(static_cast<Eigen::Index>(n) * kGrid.n_tx, kGrid.n_tx);
    CHECK((y.segment(static_cast<Eigen::Index>(n) * 2, 2) - want).cwiseAbs().maxCoeff() <
          1e-13);
  }
}

TEST_CASE("effective channel agrees with its dense matrix at both rates") {
  const ChannelRealization ch = sample_channel(base_config(), kGrid, 13);
  for (const SamplingMode mode : {SamplingMode::kNyquist, SamplingMode::kOversampled}) {
    const CMat hd = effective_dense(ch, kGrid, mode);
    REQUIRE(hd.rows() == static_cast<Eigen::Index>(kGrid.n_sub) * 2);
    REQUIRE(hd.cols() == kGrid.time_len(mode));
    const CVec s = random_cvec(kGrid.time_len(mode), 17);
    const CVec r = random_cvec(hd.rows(), 19);
    CHECK((effective_apply(ch, s, kGrid, mode) - hd * s).cwiseAbs().maxCoeff() < 1e-11);
    CHECK((effective_adjoint(ch, r, kGrid, mode) - hd.adjoint() * r).cwiseAbs().maxCoeff() <
          1e-11);
    const cplx lhs = effective_apply(ch, s, kGrid, mode).dot(r);
    const cplx rhs = s.dot(effective_adjoint(ch, r, kGrid, mode));
    CHECK(std::abs(lhs - rhs) < 1e-10);
  }
}

TEST_CASE("infinite K collapses tap 0 onto the steering directions") {
  ChannelConfig cfg = base_config();
  cfg.rician_k = std::numeric_limits<double>::infinity();
  const ChannelRealization ch = sample_channel(cfg, kGrid, 21);
  const double amp = std::sqrt(cfg.resolved_tap_powers()[0]);
  for (int u = 0; u < cfg.n_users; ++u) {
    const CVec a = steering_vector(cfg.los_angles[static_cast<std::size_t>(u)], kGrid.n_tx);
    // Row u is amp * e^{j phi} a^T: constant modulus and a constant ratio
    // against the steering entries.
    const cplx ratio = ch.taps[0](u, 0) / a[0];
    for (int l = 0; l < kGrid.n_tx; ++l) {
      CHECK(std::abs(std::abs(ch.taps[0](u, l)) - amp) < 1e-12);
      CHECK(std::abs(ch.taps[0](u, l) / a[l] - ratio) < 1e-12);
    }
  }
}

TEST_CASE("tap-0 magnitudes follow the Rice law") {
  // Single tap, K = 1: LOS amplitude sqrt(1/2), per-axis scatter deviation
  // sqrt(1/4). Kolmogorov-Smirnov at the 1% level over 2000 magnitudes.
  ChannelConfig cfg;
  cfg.n_users = 1;
  cfg.n_taps = 1;
  cfg.rician_k = 1.0;
  cfg.los_angles = {0.3};
  GridConfig grid = kGrid;
  grid.n_tx = 8;

  std::vector<double> mags;
  for (std::uint64_t seed = 0; seed < 250; ++seed) {
    const ChannelRealization ch = sample_channel(cfg, grid, 1000 + seed);
    for (int l = 0; l < grid.n_tx; ++l) mags.push_back(std::abs(ch.taps[0](0, l)));
  }
  const double nu = std::sqrt(0.5);
  const double sigma = 0.5;
  const double d = testsup::ks_statistic(
      mags, [&](double x) { return testsup::rician_cdf(x, nu, sigma); });
  CHECK(d < 1.62762 / std::sqrt(static_cast<double>(mags.size())));
}

TEST_CASE("excess taps are centred with the configured power") {
  ChannelConfig cfg = base_config();
  cfg.tap_powers = {0.2, 0.5, 0.3};
  double acc = 0.0;
  int count = 0;
  for (std::uint64_t seed = 0; seed < 400; ++seed) {
    const ChannelRealization ch = sample_channel(cfg, kGrid, 5000 + seed);
    acc += ch.taps[1].cwiseAbs2().sum();
    count += static_cast<int>(ch.taps[1].size());
  }
  // Mean square of tap 1 entries approaches its power share.
  CHECK(acc / count == doctest::Approx(0.5).epsilon(0.05));
}

TEST_CASE("awgn is deterministic with the requested variance") {
  const CVec a = awgn(20000, 0.5, 77);
  const CVec b = awgn(20000, 0.5, 77);
  CHECK((a - b).cwiseAbs().maxCoeff() == 0.0);
  CHECK(a.cwiseAbs2().mean() == doctest::Approx(0.25).epsilon(0.05));
  CHECK(std::abs(a.mean()) < 0.02);
}

TEST_CASE("channel JSON round trip is exact") {
  ChannelConfig cfg = base_config();
  cfg.tap_powers = {0.2, 0.5, 0.3};
  const ChannelRealization ch = sample_channel(cfg, kGrid, 23);
  const ChannelFile file{kGrid, cfg, ch};
  const std::string text = channel_to_json(file);
  const ChannelFile back = channel_from_json(text);

  CHECK(back.grid.n_tx == kGrid.n_tx);
  CHECK(back.grid.n_sub == kGrid.n_sub);
  CHECK(back.grid.n_cp == kGrid.n_cp);
  CHECK(back.grid.os_rate == kGrid.os_rate);
  CHECK(back.config.n_users == cfg.n_users);
  CHECK(back.config.rician_k == cfg.rician_k);
  REQUIRE(back.realization.taps.size() == ch.taps.size());
  for (std::size_t t = 0; t < ch.taps.size(); ++t)
    CHECK((back.realization.taps[t] - ch.taps[t]).cwiseAbs().maxCoeff() == 0.0);
  REQUIRE(back.realization.freq_blocks.size() == ch.freq_blocks.size());
  for (std::size_t n = 0; n < ch.freq_blocks.size(); ++n)
    CHECK((back.realization.freq_blocks[n] - ch.freq_blocks[n]).cwiseAbs().maxCoeff() <
          1e-12);
}

TEST_CASE("malformed channel JSON is rejected") {
  CHECK_THROWS_AS(channel_from_json("not json at all"), std::invalid_argument);
  CHECK_THROWS_AS(channel_from_json("{}"), std::invalid_argument);
}
