// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "isacwave/types.hpp"

namespace isacwave {

// Multi-user downlink channel with a Rician first tap and Rayleigh excess
// taps. All users share one tap count and K factor; each user has a line of
// sight direction whose array response forms the deterministic part of tap 0.
struct ChannelConfig {
  int n_users = 2;
  int n_taps = 4;
  double rician_k = 1.0;           // LOS-to-scatter power ratio of tap 0; may be +inf
  std::vector<double> los_angles;  // radians, one per user
  std::vector<double> tap_powers;  // per-tap power, sums to 1; uniform when empty

  void validate(const GridConfig& grid) const;
  // Resolved per-tap power profile (uniform default applied).
  std::vector<double> resolved_tap_powers() const;
};

struct ChannelRealization {
  std::vector<CMat> taps;         // n_taps matrices of n_users x n_tx
  std::vector<CMat> freq_blocks;  // n_sub matrices of n_users x n_tx
  std::uint64_t seed = 0;

  int n_users() const { return taps.empty() ? 0 : static_cast<int>(taps[0].rows()); }
  int n_tx() const { return taps.empty() ? 0 : static_cast<int>(taps[0].cols()); }
  int n_sub() const { return static_cast<int>(freq_blocks.size()); }
};

// Draws one channel realization. Equal (config, grid, seed) triples give
// bit-identical output: draws are ordered tap-major, user-major, with the
// tap-0 global phase drawn before that row's scattered entries.
ChannelRealization sample_channel(const ChannelConfig& cfg, const GridConfig& grid,
                                  std::uint64_t seed);

// Per-subcarrier response H_n = sum_t taps[t] exp(-j 2 pi t n / n_sub).
std::vector<CMat> assemble_freq_response(const std::vector<CMat>& taps, int n_sub);

// y = H x: block-diagonal per-subcarrier application. x is antenna
// interleaved (n_sub * n_tx), y is user interleaved (n_sub * n_users).
CVec channel_apply(const ChannelRealization& ch, const CVec& x);

// Effective channel seen from the time domain, H (F_analysis (x) I).
CVec effective_apply(const ChannelRealization& ch, const CVec& s,
                     const GridConfig& grid, SamplingMode mode);
// Adjoint of effective_apply.
CVec effective_adjoint(const ChannelRealization& ch, const CVec& r,
                       const GridConfig& grid, SamplingMode mode);
// Dense (n_sub * n_users) x time_len matrix of the same operator.
CMat effective_dense(const ChannelRealization& ch, const GridConfig& grid,
                     SamplingMode mode);

// Circularly symmetric complex Gaussian noise, variance noise_std^2 per entry.
CVec awgn(Eigen::Index len, double noise_std, std::uint64_t seed);

// JSON round trip for channel realizations (taps plus generating config).
// Loading reassembles freq_blocks from the stored taps.
struct ChannelFile {
  GridConfig grid;
  ChannelConfig config;
  ChannelRealization realization;
};
std::string channel_to_json(const ChannelFile& file);
ChannelFile channel_from_json(const std::string& text);

}  // namespace isacwave
