// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "isacwave/admm.hpp"
#include "isacwave/channel.hpp"
#include "isacwave/ideal_waveform.hpp"
#include "isacwave/lbfgs.hpp"
#include "isacwave/radar_metrics.hpp"
#include "isacwave/serialization.hpp"
#include "isacwave/types.hpp"

namespace isacwave {

// One experiment description: frame dimensions, scene, channel, link budget,
// design knobs, sweep grids, seeding, and output location. JSON config files
// mirror these fields by name; absent keys keep their defaults.
struct ExperimentConfig {
  // Recorded carrier metadata; the math below is carrier agnostic.
  double carrier_hz = 28e9;
  double subcarrier_spacing_hz = 300e3;

  // Frame dimensions.
  int n_tx = 8;
  int n_sub = 40;
  int n_cp = 32;
  int n_users = 2;
  int os_rate = 2;
  bool oversample = false;  // design and evaluation rate for single runs

  // Sensing scene.
  std::vector<double> target_angles_deg = {-30.0, 30.0};
  double mask_width_deg = 10.0;
  double grid_step_deg = 1.0;

  // Channel.
  int n_taps = 4;
  double rician_k = 1.0;
  // LOS direction per user; empty derives them (target directions when the
  // counts match, otherwise evenly spread over [-60, 60] degrees).
  std::vector<double> los_angles_deg;

  // Link budget.
  double esn0_db = 10.0;
  std::vector<double> esn0_grid_db = {0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0};
  double loss_over_noise = 1.0;  // echo path loss over noise power, linear

  // Design knobs.
  double energy_total = 0.0;  // <= 0 selects (n_sub + n_cp) / n_sub
  double rho = 0.5;
  double papr_db = 3.0;
  double eta = 0.0;  // <= 0 selects the automatic penalty
  double admm_tol = 1e-6;
  int admm_max_iters = 2000;
  std::string admm_init = "radar";  // zero | radar | comm
  LbfgsConfig lbfgs;
  std::string s0_path;  // optional precomputed reference waveform (.cwf)

  // Sweep grids and Monte Carlo size.
  std::vector<double> rho_grid = {0.1, 0.3, 0.5, 0.7, 0.9};
  std::vector<double> papr_grid_db = {1.0, 2.0, 3.0, 5.0};
  int n_mc = 50;
  int ser_trials = 400;

  std::uint64_t master_seed = 1;
  int threads = 0;  // 0 selects the hardware concurrency
  std::string output_dir = "out";

  GridConfig grid() const { return {n_tx, n_sub, n_cp, os_rate}; }
  SamplingMode mode() const {
    return oversample ? SamplingMode::kOversampled : SamplingMode::kNyquist;
  }
  double resolved_energy_total() const {
    return energy_total > 0.0
               ? energy_total
               : static_cast<double>(n_sub + n_cp) / static_cast<double>(n_sub);
  }
  std::vector<double> resolved_los_angles_deg() const;
  std::vector<double> target_angles_rad() const;
  ChannelConfig channel() const;

  // Throws std::invalid_argument on any out-of-range field.
  void validate() const;
};

// Partial override of the defaults from a JSON object; unknown keys are
// rejected. Throws std::invalid_argument with the offending key or parse
// error. The result is validated.
ExperimentConfig config_from_json(const std::string& text);

// Canonical JSON (sorted keys, full field set).
std::string config_to_json(const ExperimentConfig& cfg);

// 16 hex digits, FNV-1a over the canonical JSON with the non-semantic fields
// (master_seed, threads, output_dir) removed: equal hashes mean equal
// experiment definitions.
std::string config_hash(const ExperimentConfig& cfg);

// One metrics line of results.csv. wall_time_s is written to the timings
// sidecar, never to results.csv, which keeps result files byte-reproducible.
struct ResultRow {
  std::string experiment;
  std::string item;  // point within the experiment, e.g. "mode=nyquist;rho=0.3"
  std::string hash;
  std::string mode;
  std::uint64_t seed = 0;
  double rho = 0.0;
  double papr_db_max = 0.0;
  double eta = 0.0;
  int iterations = 0;
  bool converged = false;
  double objective = 0.0;
  double comm_term = 0.0;
  double radar_term = 0.0;
  double mui = 0.0;
  double ser = 0.0;
  double sum_rate = 0.0;
  double islr_db = 0.0;
  double rsnr_lo_db = 0.0;  // echo SNR at the smallest target angle
  double rsnr_hi_db = 0.0;  // echo SNR at the largest target angle
  double papr_measured_db = 0.0;
  double wall_time_s = 0.0;
};

// Reference (radar-only) design shared by the solvers: the scene, the
// objective description, and the finished waveform at the requested rate.
struct ReferenceDesign {
  IdealObjectiveSpec spec;
  CVec s0;
  IdealDesignResult result;  // empty trace when s0 was loaded from a file
  bool loaded = false;
};
ReferenceDesign make_reference(const ExperimentConfig& cfg, SamplingMode mode);

// Channel realization and desired symbols of one seeded trial. Trial 0 is the
// one every single-design command uses.
struct TrialData {
  ChannelRealization ch;
  CVec s_d;
};
TrialData make_trial(const ExperimentConfig& cfg, std::uint64_t trial);

struct SerPoint {
  double esn0_db = 0.0;
  double ser = 0.0;
  double sum_rate = 0.0;
};

// Everything computed for one designed (or loaded) waveform.
struct PointOutput {
  ResultRow row;
  SamplingMode mode = SamplingMode::kNyquist;
  CVec waveform;            // feasible effective time-domain vector
  ConvergenceTrace trace;   // empty for loaded waveforms
  RVec beampattern;         // over the scene's angle grid
  std::vector<AmbiguitySurface> ambiguities;  // one per target
  std::vector<SerPoint> ser_curve;
};

struct DesignIdealOutput {
  ReferenceDesign ref;
  SamplingMode mode = SamplingMode::kNyquist;
};
DesignIdealOutput run_design_ideal(const ExperimentConfig& cfg);
void write_design_ideal(const ExperimentConfig& cfg, const DesignIdealOutput& out);

struct DesignIsacOutput {
  ReferenceDesign ref;
  TrialData trial;
  PointOutput point;
};
DesignIsacOutput run_design_isac(const ExperimentConfig& cfg);
void write_design_isac(const ExperimentConfig& cfg, const DesignIsacOutput& out);

struct EvaluateOutput {
  TrialData trial;
  RadarScene scene;
  PointOutput point;
};
EvaluateOutput run_evaluate(const ExperimentConfig& cfg, const CwfFile& waveform,
                            const std::optional<ChannelFile>& channel);
void write_evaluate(const ExperimentConfig& cfg, const EvaluateOutput& out);

struct InitStudyRun {
  std::string name;  // zero | radar | comm
  PointOutput point;
};
struct InitStudyOutput {
  ReferenceDesign ref;
  TrialData trial;
  std::vector<InitStudyRun> runs;
};
InitStudyOutput run_init_study(const ExperimentConfig& cfg);
void write_init_study(const ExperimentConfig& cfg, const InitStudyOutput& out);

// Sweeps cover both sampling rates; points run concurrently and aggregate in
// a fixed order, so their CSVs are reproducible at any thread count.
struct SweepOutput {
  std::vector<ReferenceDesign> refs;  // index 0 symbol rate, 1 oversampled
  TrialData trial;
  std::vector<PointOutput> points;
};
SweepOutput run_rho_sweep(const ExperimentConfig& cfg);
void write_rho_sweep(const ExperimentConfig& cfg, const SweepOutput& out);
SweepOutput run_papr_sweep(const ExperimentConfig& cfg);
void write_papr_sweep(const ExperimentConfig& cfg, const SweepOutput& out);

struct MonteCarloOutput {
  ReferenceDesign ref;
  std::vector<PointOutput> trials;
  // metric name -> (mean, standard error) over trials
  std::vector<std::string> metric_names;
  std::vector<double> means;
  std::vector<double> stderrs;
};
MonteCarloOutput run_montecarlo(const ExperimentConfig& cfg);
void write_montecarlo(const ExperimentConfig& cfg, const MonteCarloOutput& out);

// results.csv / timings.csv emitters shared by the writers above.
void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows);
void write_timings_csv(const std::string& path, const std::vector<ResultRow>& rows);
void write_trace_csv(const std::string& path, const ConvergenceTrace& trace);

// Runs fn(0..n-1) on a pool of the requested size (0 selects the hardware
// concurrency). The first exception thrown by any task is rethrown after all
// workers finish.
void parallel_for(int n, int threads, const std::function<void(int)>& fn);

const char* mode_name(SamplingMode mode);

}  // namespace isacwave
