// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>

#include "isacwave/channel.hpp"
#include "isacwave/lbfgs.hpp"
#include "isacwave/radar_metrics.hpp"
#include "isacwave/types.hpp"

namespace isacwave {

// Objective for the ideal radar waveform: ambiguity sidelobe energy at the
// target directions plus a weighted squared mismatch between the transmit
// beampattern and the scene's ideal pattern over the whole angle grid.
struct IdealObjectiveSpec {
  GridConfig grid;
  SamplingMode mode = SamplingMode::kNyquist;
  RadarScene scene;
  double beam_weight = 0.0;    // <= 0 selects frame_count^2
  double target_energy = 1.0;  // effective energy of the finished design

  double resolved_beam_weight() const {
    return beam_weight > 0.0 ? beam_weight
                             : static_cast<double>(grid.frame_count(mode)) *
                                   static_cast<double>(grid.frame_count(mode));
  }
};

double ideal_objective(const CVec& s, const IdealObjectiveSpec& spec);

// Conjugate (Wirtinger) gradient d f / d conj(s). The real gradient over the
// stacked [Re(s); Im(s)] parameters is 2 [Re(g); Im(g)].
CVec ideal_gradient(const CVec& s, const IdealObjectiveSpec& spec);
RVec ideal_gradient_real(const CVec& s, const IdealObjectiveSpec& spec);

// Complex Gaussian start point scaled to the requested energy budget.
CVec random_waveform(const IdealObjectiveSpec& spec, std::uint64_t seed);

// Rescales s to the exact energy target. Throws on a zero vector.
CVec normalize_energy(const CVec& s, double target_energy);

struct IdealDesignResult {
  CVec waveform;   // energy-normalized design
  double objective = 0.0;  // raw objective at the final iterate
  int iterations = 0;
  bool converged = false;
  bool stalled = false;
  std::vector<double> trace;  // objective per accepted step, non-increasing
};

// Minimizes the ideal objective from the given start point and normalizes
// the result to the requested energy target.
IdealDesignResult design_ideal_waveform(const IdealObjectiveSpec& spec,
                                        const LbfgsConfig& cfg, const CVec& init);

// Interference-free reference: per-subcarrier least-norm precode of the
// desired symbols through the channel, synthesized at the given rate.
CVec ideal_comm_waveform(const ChannelRealization& ch, const CVec& s_d,
                         const GridConfig& grid, SamplingMode mode);

}  // namespace isacwave
