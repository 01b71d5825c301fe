// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>
#include <utility>
#include <vector>

#include "isacwave/types.hpp"

namespace isacwave {

// Sensing targets plus the evaluation geometry shared by the radar metrics
// and the ideal-waveform objective. Angles are radians.
struct RadarScene {
  std::vector<double> target_angles;  // subset of pattern_grid
  std::vector<double> pattern_grid;   // beampattern evaluation angles
  RVec ideal_pattern;                 // desired pattern per grid angle, >= 0
  // Sidelobe (delay, doppler) offsets; never contains (0, 0).
  std::vector<std::pair<int, double>> delay_doppler_set;

  void validate() const;
};

// Default scene: targets on a 1 degree grid over [-90, 90] degrees, a flat
// rectangular ideal-pattern lobe of mask_width_deg around every target, and
// delay offsets k in [-k_max, k_max] \ {0} at doppler 0, where k_max is the
// cyclic prefix length at the given rate (clamped to frame_count - 1). The
// lobe level makes the mask's grid sum equal n_tx times the average symbol
// power implied by target_energy.
RadarScene make_default_scene(const GridConfig& grid, SamplingMode mode,
                              const std::vector<double>& target_angles,
                              double target_energy, double mask_width_deg = 10.0,
                              double grid_step_deg = 1.0);

// Transmit beampattern from per-symbol antenna snapshots:
// b(theta) = mean_n |a(theta)^T s_n|^2. Every snapshot has length n_tx.
RVec beam_pattern_cov(const std::vector<CVec>& snapshots,
                      const std::vector<double>& grid_angles, int n_tx);

// Transmit beampattern of an effective waveform via the direction projector:
// b(theta) = ||G(theta) s||^2 / frame_count. Agrees with beam_pattern_cov on
// the CP-extended snapshots of s.
RVec beam_pattern_time(const CVec& s, const std::vector<double>& grid_angles,
                       const GridConfig& grid);

// Delay-doppler ambiguity of the signal radiated toward theta:
// chi(theta, k, f) = |s_v^H J_k D_f s_v|^2 with s_v = G(theta) s.
struct AmbiguitySurface {
  double theta = 0.0;
  std::vector<int> delays;
  std::vector<double> dopplers;
  Eigen::MatrixXd chi;   // delays.size() x dopplers.size(), linear scale
  double mainlobe = 0.0; // chi(theta, 0, 0)
};
AmbiguitySurface ambiguity(const CVec& s, double theta, const std::vector<int>& delays,
                           const std::vector<double>& dopplers, const GridConfig& grid);

// Integrated sidelobe level over the scene's targets and offset set.
double isl(const CVec& s, const RadarScene& scene, const GridConfig& grid);

// 10 log10 of the mean over targets of (sidelobe sum / mainlobe), floored at
// -300 dB. Throws std::domain_error when a mainlobe is exactly zero.
double islr_db(const CVec& s, const RadarScene& scene, const GridConfig& grid);

// Radar echo SNR proxy: 10 log10(b(theta) * loss_over_noise), floored at
// -300 dB. Throws std::invalid_argument on a zero waveform.
double echo_snr_db(const CVec& s, double theta, double loss_over_noise,
                   const GridConfig& grid);

// theta_deg, k, f, chi_db rows; chi is normalized by the mainlobe and floored
// at -300 dB.
void write_ambiguity_csv(const std::string& path, const AmbiguitySurface& surface);

// theta_deg, pattern, mask rows (mask column omitted when empty).
void write_beampattern_csv(const std::string& path,
                           const std::vector<double>& grid_angles, const RVec& pattern,
                           const RVec& mask = RVec());

}  // namespace isacwave
