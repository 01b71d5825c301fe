// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "isacwave/channel.hpp"
#include "isacwave/types.hpp"

namespace isacwave {

// Unit-energy Gray-mapped QPSK. Symbol index = (b0 << 1) | b1; bit b0 selects
// the real sign, b1 the imaginary sign, so nearest neighbours differ in one bit.
const std::array<cplx, 4>& qpsk_constellation();

CVec qpsk_modulate(const std::vector<std::uint8_t>& bits);  // bits.size() even
Eigen::VectorXi qpsk_detect_index(const CVec& y);           // nearest-neighbour
CVec qpsk_detect(const CVec& y);
CVec random_qpsk(Eigen::Index n, std::uint64_t seed);

// Multi-user interference energy ||H x - s_d||^2 of a frequency-domain
// precode against the desired symbol vector.
double mui_energy(const ChannelRealization& ch, const CVec& x, const CVec& s_d);

struct PaprReport {
  RVec per_antenna;      // linear peak-to-average ratios
  double max_db = 0.0;   // 10 log10 of the worst antenna
};

// Per-antenna PAPR of the time-domain frame synthesized from x at the given
// rate. Peak is max |sample|^2, average is per-antenna energy divided by the
// sample count of that rate. Throws std::domain_error on a silent antenna.
PaprReport papr(const CVec& x, const GridConfig& grid, SamplingMode mode);

// Same metric evaluated directly on an effective time-domain vector.
PaprReport papr_of_time(const CVec& s, const GridConfig& grid);

// Symbol error rate of nearest-neighbour detection on y = H x + z over
// n_trials independent noise draws. s_d entries must be constellation points.
double empirical_ser(const ChannelRealization& ch, const CVec& x, const CVec& s_d,
                     double noise_std, int n_trials, std::uint64_t seed);

// Achievable sum rate treating interference as noise:
// (1/n_sub) sum log2(1 + |s_d|^2 / (|mui|^2 + noise_std^2)).
double sum_rate(const ChannelRealization& ch, const CVec& x, const CVec& s_d,
                double noise_std);

}  // namespace isacwave
