// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <vector>

#include "isacwave/channel.hpp"
#include "isacwave/types.hpp"

namespace isacwave {

// Joint waveform design problem over the effective time-domain vector s:
//
//   minimize  rho/||s_d||^2 ||H_hat s - s_d||^2 + (1-rho)/||s0||^2 ||s - s0||^2
//   subject to |s_i|^2 <= eps for every sample,
//              ||C_l s||^2 = energy_per_antenna for every antenna l.
struct IsacProblem {
  CMat h_hat;  // (n_sub * n_users) x time_len effective channel
  CVec s_d;    // desired symbols, user interleaved
  CVec s0;     // radar reference on the same time grid
  double rho = 0.5;
  double eps = 0.0;                // per-sample power cap
  double energy_per_antenna = 0.0; // equality level per antenna
  GridConfig grid;
  SamplingMode mode = SamplingMode::kNyquist;

  Eigen::Index dim() const { return grid.time_len(mode); }
  double comm_scale() const { return rho / s_d.squaredNorm(); }
  double radar_scale() const { return (1.0 - rho) / s0.squaredNorm(); }

  // Throws std::invalid_argument on dimension mismatches, rho outside [0, 1],
  // or a cap too tight for the energy sphere (the sets would be disjoint).
  void validate() const;
};

// Energy of one antenna's effective (CP-free) samples when the whole
// CP-extended frame carries energy_total: n_sub/(n_sub+n_cp) * energy_total
// divided over n_tx antennas. Independent of the sampling mode because
// band-limited interpolation preserves energy.
double effective_energy_per_antenna(const GridConfig& grid, double energy_total);

// Per-sample power cap implied by a PAPR limit in dB:
// eps = papr_lin * effective_energy_per_antenna / (samples per antenna).
double derive_eps(double papr_max_db, const GridConfig& grid, SamplingMode mode,
                  double energy_total);

// Assembles the problem from a channel realization. energy_total is the full
// frame energy budget including the cyclic prefix.
IsacProblem make_isac_problem(const ChannelRealization& ch, const CVec& s_d,
                              const CVec& s0, double rho, double papr_max_db,
                              double energy_total, const GridConfig& grid,
                              SamplingMode mode);

// Entrywise projection onto the peak cap: t = s - lambda stays put when
// |t|^2 <= eps and shrinks to magnitude sqrt(eps) otherwise.
CVec update_y(const CVec& s, const CVec& lambda, double eps);

// Per-antenna projection of s - mu onto the energy sphere. A zero antenna
// segment maps to the equal-phase vector on the sphere (deterministic
// tie-break of the degenerate projection).
CVec update_v(const CVec& s, const CVec& mu, const GridConfig& grid,
              SamplingMode mode, double energy_per_antenna);

// Extreme eigenvalues of the quadratic form's Gram matrix and the resulting
// penalty lower bound alpha^2 l_max^2 / (eps_prop^2 l_min). degenerate flags
// l_min ~ 0 (rho = 1 with a wide channel), where the bound is meaningless.
struct EtaBound {
  double l_max = 0.0;
  double l_min = 0.0;
  double bound = 0.0;
  bool degenerate = false;
};
EtaBound eta_bound(const IsacProblem& p, double alpha = 1.0, double eps_prop = 1.0);

enum class AdmmInit { kZero, kRadar, kComm, kCustom };

struct AdmmOptions {
  double eta = 0.0;  // <= 0 selects max(1, eta_bound) with the constants below
  double tol = 1e-6; // on max consensus residual, RMS per entry; 0 runs the
                     // full iteration budget
  int max_iters = 2000;
  AdmmInit init = AdmmInit::kRadar;
  CVec custom_init;
  double alpha = 1.0;     // analysis constant feeding the automatic eta
  double eps_prop = 1.0;  // analysis constant feeding the automatic eta
};

// One ADMM iterate; exposed for tests that drive individual updates.
struct AdmmState {
  CVec s, y, v, lambda, mu;
  int iter = 0;
};

struct TraceRow {
  int iter = 0;
  double objective = 0.0;
  double comm_term = 0.0;
  double radar_term = 0.0;
  double lagrangian = 0.0;
  double res_y = 0.0;
  double res_v = 0.0;
  // Diagnostics for the convergence analysis, not part of the CSV schema.
  double stationarity = 0.0;   // ||grad f - eta (lambda+mu)|| / max(1, ||grad f||)
  double dual_delta_sq = 0.0;  // ||dual step||^2 of this iteration
  double s_delta_sq = 0.0;     // ||primal step||^2 of this iteration
  double lower_bound = 0.0;    // eta Re<dual, dual step>, a valid floor for L
};

struct ConvergenceTrace {
  std::vector<TraceRow> rows;
  // True when the recorded Lagrangian never increases by more than
  // rel_slack * max(1, |L|) between consecutive generated iterates. The
  // iteration-0 snapshot is excluded: it predates the first dual update.
  bool lagrangian_monotone(double rel_slack) const;
};

struct AdmmResult {
  CVec s_raw;  // last iterate
  CVec s;      // feasible projection of the last iterate
  ConvergenceTrace trace;
  int iterations = 0;
  bool converged = false;
  double eta = 0.0;
  EtaBound bound;
};

AdmmResult run_admm(const IsacProblem& p, const AdmmOptions& opts = {});

// Alternating peak-cap clip and per-antenna energy rescale until both
// constraints hold simultaneously; the last operation is an exact rescale, so
// the per-antenna energy is met to machine precision and every sample obeys
// the cap within a relative 1e-6.
CVec finalize_feasible(const CVec& s, const GridConfig& grid, SamplingMode mode,
                       double eps, double energy_per_antenna);

}  // namespace isacwave
