// SPDX-License-Identifier: Apache-2.0
#include "isacwave/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <limits>
#include <mutex>
#include <stdexcept>
#include <thread>

#include <nlohmann/json.hpp>

#include "isacwave/comm_metrics.hpp"
#include "isacwave/operators.hpp"
#include "isacwave/rng.hpp"

namespace isacwave {

namespace {

constexpr double kDegToRad = 0.017453292519943295769;
constexpr double kDbFloor = -300.0;

double floored_db(double linear) {
  if (!(linear > 0.0)) return kDbFloor;
  return std::max(10.0 * std::log10(linear), kDbFloor);
}

double noise_std_of(double esn0_db) { return std::pow(10.0, -esn0_db / 20.0); }

AdmmInit parse_init(const std::string& name) {
  if (name == "zero") return AdmmInit::kZero;
  if (name == "radar") return AdmmInit::kRadar;
  if (name == "comm") return AdmmInit::kComm;
  throw std::invalid_argument("admm_init must be one of zero, radar, comm");
}

double elapsed_s(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

const char* mode_name(SamplingMode mode) {
  return mode == SamplingMode::kNyquist ? "nyquist" : "oversampled";
}

std::vector<double> ExperimentConfig::resolved_los_angles_deg() const {
  if (!los_angles_deg.empty()) return los_angles_deg;
  if (static_cast<int>(target_angles_deg.size()) == n_users) return target_angles_deg;
  std::vector<double> out(static_cast<std::size_t>(n_users));
  for (int u = 0; u < n_users; ++u) {
    out[static_cast<std::size_t>(u)] =
        n_users == 1 ? 0.0 : -60.0 + 120.0 * u / (n_users - 1);
  }
  return out;
}

std::vector<double> ExperimentConfig::target_angles_rad() const {
  std::vector<double> out;
  out.reserve(target_angles_deg.size());
  for (double d : target_angles_deg) out.push_back(d * kDegToRad);
  return out;
}

ChannelConfig ExperimentConfig::channel() const {
  ChannelConfig c;
  c.n_users = n_users;
  c.n_taps = n_taps;
  c.rician_k = rician_k;
  for (double d : resolved_los_angles_deg()) c.los_angles.push_back(d * kDegToRad);
  return c;
}

void ExperimentConfig::validate() const {
  grid().validate();
  if (!(carrier_hz > 0.0) || !(subcarrier_spacing_hz > 0.0))
    throw std::invalid_argument("carrier_hz and subcarrier_spacing_hz must be > 0");
  if (n_users < 1) throw std::invalid_argument("n_users must be >= 1");
  if (!los_angles_deg.empty() &&
      static_cast<int>(los_angles_deg.size()) != n_users)
    throw std::invalid_argument("los_angles_deg must list one angle per user");
  channel().validate(grid());
  if (target_angles_deg.empty())
    throw std::invalid_argument("target_angles_deg must not be empty");
  for (double d : target_angles_deg)
    if (!(d >= -90.0 && d <= 90.0))
      throw std::invalid_argument("target angles must lie in [-90, 90] degrees");
  if (!(mask_width_deg > 0.0)) throw std::invalid_argument("mask_width_deg must be > 0");
  if (!(grid_step_deg > 0.0 && grid_step_deg <= 180.0))
    throw std::invalid_argument("grid_step_deg must lie in (0, 180]");
  if (!std::isfinite(esn0_db)) throw std::invalid_argument("esn0_db must be finite");
  for (double e : esn0_grid_db)
    if (!std::isfinite(e)) throw std::invalid_argument("esn0_grid_db must be finite");
  if (!(loss_over_noise > 0.0))
    throw std::invalid_argument("loss_over_noise must be > 0");
  if (!(rho >= 0.0 && rho <= 1.0)) throw std::invalid_argument("rho must lie in [0, 1]");
  if (!(papr_db >= 0.0)) throw std::invalid_argument("papr_db must be >= 0");
  if (rho_grid.empty()) throw std::invalid_argument("rho_grid must not be empty");
  for (double r : rho_grid)
    if (!(r >= 0.0 && r <= 1.0))
      throw std::invalid_argument("rho_grid entries must lie in [0, 1]");
  if (papr_grid_db.empty()) throw std::invalid_argument("papr_grid_db must not be empty");
  for (double p : papr_grid_db)
    if (!(p >= 0.0)) throw std::invalid_argument("papr_grid_db entries must be >= 0");
  if (!(admm_tol > 0.0)) throw std::invalid_argument("admm_tol must be > 0");
  if (admm_max_iters < 1) throw std::invalid_argument("admm_max_iters must be >= 1");
  parse_init(admm_init);
  if (lbfgs.memory < 1 || lbfgs.max_iters < 1 || !(lbfgs.grad_tol > 0.0) ||
      !(lbfgs.armijo_c1 > 0.0 && lbfgs.armijo_c1 < 1.0) ||
      !(lbfgs.backtrack > 0.0 && lbfgs.backtrack < 1.0) || lbfgs.max_backtracks < 1)
    throw std::invalid_argument("lbfgs settings out of range");
  if (n_mc < 1) throw std::invalid_argument("n_mc must be >= 1");
  if (ser_trials < 1) throw std::invalid_argument("ser_trials must be >= 1");
  if (threads < 0) throw std::invalid_argument("threads must be >= 0");
  if (output_dir.empty()) throw std::invalid_argument("output_dir must not be empty");
}

namespace {

using nlohmann::json;

double as_number(const json& v, const std::string& key) {
  if (!v.is_number()) throw std::invalid_argument("config key '" + key + "' must be a number");
  return v.get<double>();
}

int as_int(const json& v, const std::string& key) {
  if (!v.is_number_integer())
    throw std::invalid_argument("config key '" + key + "' must be an integer");
  return v.get<int>();
}

bool as_bool(const json& v, const std::string& key) {
  if (!v.is_boolean()) throw std::invalid_argument("config key '" + key + "' must be a boolean");
  return v.get<bool>();
}

std::string as_string(const json& v, const std::string& key) {
  if (!v.is_string()) throw std::invalid_argument("config key '" + key + "' must be a string");
  return v.get<std::string>();
}

std::vector<double> as_number_list(const json& v, const std::string& key) {
  if (!v.is_array()) throw std::invalid_argument("config key '" + key + "' must be an array");
  std::vector<double> out;
  for (const json& e : v) {
    if (!e.is_number())
      throw std::invalid_argument("config key '" + key + "' must contain numbers only");
    out.push_back(e.get<double>());
  }
  return out;
}

void apply_lbfgs(const json& v, LbfgsConfig& cfg) {
  if (!v.is_object()) throw std::invalid_argument("config key 'lbfgs' must be an object");
  for (const auto& [key, value] : v.items()) {
    if (key == "memory") cfg.memory = as_int(value, "lbfgs.memory");
    else if (key == "max_iters") cfg.max_iters = as_int(value, "lbfgs.max_iters");
    else if (key == "grad_tol") cfg.grad_tol = as_number(value, "lbfgs.grad_tol");
    else if (key == "armijo_c1") cfg.armijo_c1 = as_number(value, "lbfgs.armijo_c1");
    else if (key == "backtrack") cfg.backtrack = as_number(value, "lbfgs.backtrack");
    else if (key == "max_backtracks") cfg.max_backtracks = as_int(value, "lbfgs.max_backtracks");
    else throw std::invalid_argument("unknown config key 'lbfgs." + key + "'");
  }
}

}  // namespace

ExperimentConfig config_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw std::invalid_argument(std::string("config parse error: ") + e.what());
  }
  if (!j.is_object()) throw std::invalid_argument("config must be a JSON object");

  ExperimentConfig cfg;
  for (const auto& [key, v] : j.items()) {
    if (key == "carrier_hz") cfg.carrier_hz = as_number(v, key);
    else if (key == "subcarrier_spacing_hz") cfg.subcarrier_spacing_hz = as_number(v, key);
    else if (key == "n_tx") cfg.n_tx = as_int(v, key);
    else if (key == "n_sub") cfg.n_sub = as_int(v, key);
    else if (key == "n_cp") cfg.n_cp = as_int(v, key);
    else if (key == "n_users") cfg.n_users = as_int(v, key);
    else if (key == "os_rate") cfg.os_rate = as_int(v, key);
    else if (key == "oversample") cfg.oversample = as_bool(v, key);
    else if (key == "target_angles_deg") cfg.target_angles_deg = as_number_list(v, key);
    else if (key == "mask_width_deg") cfg.mask_width_deg = as_number(v, key);
    else if (key == "grid_step_deg") cfg.grid_step_deg = as_number(v, key);
    else if (key == "n_taps") cfg.n_taps = as_int(v, key);
    else if (key == "rician_k") {
      if (v.is_string() && v.get<std::string>() == "inf")
        cfg.rician_k = std::numeric_limits<double>::infinity();
      else
        cfg.rician_k = as_number(v, key);
    } else if (key == "los_angles_deg") cfg.los_angles_deg = as_number_list(v, key);
    else if (key == "esn0_db") cfg.esn0_db = as_number(v, key);
    else if (key == "esn0_grid_db") cfg.esn0_grid_db = as_number_list(v, key);
    else if (key == "loss_over_noise") cfg.loss_over_noise = as_number(v, key);
    else if (key == "energy_total") cfg.energy_total = as_number(v, key);
    else if (key == "rho") cfg.rho = as_number(v, key);
    else if (key == "papr_db") cfg.papr_db = as_number(v, key);
    else if (key == "eta") cfg.eta = as_number(v, key);
    else if (key == "admm_tol") cfg.admm_tol = as_number(v, key);
    else if (key == "admm_max_iters") cfg.admm_max_iters = as_int(v, key);
    else if (key == "admm_init") cfg.admm_init = as_string(v, key);
    else if (key == "lbfgs") apply_lbfgs(v, cfg.lbfgs);
    else if (key == "s0_path") cfg.s0_path = as_string(v, key);
    else if (key == "rho_grid") cfg.rho_grid = as_number_list(v, key);
    else if (key == "papr_grid_db") cfg.papr_grid_db = as_number_list(v, key);
    else if (key == "n_mc") cfg.n_mc = as_int(v, key);
    else if (key == "ser_trials") cfg.ser_trials = as_int(v, key);
    else if (key == "master_seed") {
      if (!v.is_number_integer() || (v.is_number_integer() && !v.is_number_unsigned() && v.get<std::int64_t>() < 0))
        throw std::invalid_argument("config key 'master_seed' must be a non-negative integer");
      cfg.master_seed = v.get<std::uint64_t>();
    } else if (key == "threads") cfg.threads = as_int(v, key);
    else if (key == "output_dir") cfg.output_dir = as_string(v, key);
    else throw std::invalid_argument("unknown config key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

std::string config_to_json(const ExperimentConfig& cfg) {
  json j;
  j["carrier_hz"] = cfg.carrier_hz;
  j["subcarrier_spacing_hz"] = cfg.subcarrier_spacing_hz;
  j["n_tx"] = cfg.n_tx;
  j["n_sub"] = cfg.n_sub;
  j["n_cp"] = cfg.n_cp;
  j["n_users"] = cfg.n_users;
  j["os_rate"] = cfg.os_rate;
  j["oversample"] = cfg.oversample;
  j["target_angles_deg"] = cfg.target_angles_deg;
  j["mask_width_deg"] = cfg.mask_width_deg;
  j["grid_step_deg"] = cfg.grid_step_deg;
  j["n_taps"] = cfg.n_taps;
  if (std::isinf(cfg.rician_k))
    j["rician_k"] = "inf";
  else
    j["rician_k"] = cfg.rician_k;
  j["los_angles_deg"] = cfg.los_angles_deg;
  j["esn0_db"] = cfg.esn0_db;
  j["esn0_grid_db"] = cfg.esn0_grid_db;
  j["loss_over_noise"] = cfg.loss_over_noise;
  j["energy_total"] = cfg.energy_total;
  j["rho"] = cfg.rho;
  j["papr_db"] = cfg.papr_db;
  j["eta"] = cfg.eta;
  j["admm_tol"] = cfg.admm_tol;
  j["admm_max_iters"] = cfg.admm_max_iters;
  j["admm_init"] = cfg.admm_init;
  j["lbfgs"] = {{"memory", cfg.lbfgs.memory},
                {"max_iters", cfg.lbfgs.max_iters},
                {"grad_tol", cfg.lbfgs.grad_tol},
                {"armijo_c1", cfg.lbfgs.armijo_c1},
                {"backtrack", cfg.lbfgs.backtrack},
                {"max_backtracks", cfg.lbfgs.max_backtracks}};
  j["s0_path"] = cfg.s0_path;
  j["rho_grid"] = cfg.rho_grid;
  j["papr_grid_db"] = cfg.papr_grid_db;
  j["n_mc"] = cfg.n_mc;
  j["ser_trials"] = cfg.ser_trials;
  j["master_seed"] = cfg.master_seed;
  j["threads"] = cfg.threads;
  j["output_dir"] = cfg.output_dir;
  return j.dump(2) + "\n";
}

std::string config_hash(const ExperimentConfig& cfg) {
  json j = json::parse(config_to_json(cfg));
  j.erase("master_seed");
  j.erase("threads");
  j.erase("output_dir");
  const std::string s = j.dump();
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return std::string(buf);
}

ReferenceDesign make_reference(const ExperimentConfig& cfg, SamplingMode mode) {
  cfg.validate();
  const GridConfig grid = cfg.grid();
  const double e_total = cfg.resolved_energy_total();
  const double e_eff = e_total * grid.n_sub / (grid.n_sub + grid.n_cp);

  ReferenceDesign ref;
  ref.spec.grid = grid;
  ref.spec.mode = mode;
  ref.spec.scene = make_default_scene(grid, mode, cfg.target_angles_rad(), e_eff,
                                      cfg.mask_width_deg, cfg.grid_step_deg);
  ref.spec.target_energy = e_eff;

  if (!cfg.s0_path.empty()) {
    const CwfFile f = read_cwf(cfg.s0_path);
    if (f.grid.n_tx != grid.n_tx || f.grid.n_sub != grid.n_sub ||
        f.grid.n_cp != grid.n_cp || f.grid.os_rate != grid.os_rate)
      throw std::invalid_argument(cfg.s0_path +
                                  ": waveform grid does not match the configuration");
    CVec s0 = f.samples;
    if (f.mode != mode) s0 = to_time_domain(to_freq_domain(s0, grid), grid, mode);
    ref.s0 = normalize_energy(s0, e_eff);
    ref.loaded = true;
  } else {
    const CVec init = random_waveform(ref.spec, derive_seed(cfg.master_seed, "ideal-init", 0));
    ref.result = design_ideal_waveform(ref.spec, cfg.lbfgs, init);
    ref.s0 = ref.result.waveform;
  }
  return ref;
}

TrialData make_trial(const ExperimentConfig& cfg, std::uint64_t trial) {
  TrialData td;
  td.ch = sample_channel(cfg.channel(), cfg.grid(),
                         derive_seed(cfg.master_seed, "channel", trial));
  td.s_d = random_qpsk(static_cast<Eigen::Index>(cfg.n_sub) * cfg.n_users,
                       derive_seed(cfg.master_seed, "symbols", trial));
  return td;
}

namespace {

// One work item: which waveform to design, which extras to compute.
struct PointSpec {
  std::string experiment;
  std::string item;
  SamplingMode mode = SamplingMode::kNyquist;
  double rho = 0.5;
  double papr_db = 3.0;
  std::uint64_t ser_index = 0;  // index of the "ser"/"ser-curve" seed streams
  AdmmInit init = AdmmInit::kRadar;
  bool want_beams = false;
  bool want_ambiguity = false;
  bool want_curve = false;
};

void surface_axes(const RadarScene& scene, std::vector<int>& delays,
                  std::vector<double>& dopplers) {
  delays = {0};
  dopplers = {0.0};
  for (const auto& [k, f] : scene.delay_doppler_set) {
    delays.push_back(k);
    dopplers.push_back(f);
  }
  std::sort(delays.begin(), delays.end());
  delays.erase(std::unique(delays.begin(), delays.end()), delays.end());
  std::sort(dopplers.begin(), dopplers.end());
  dopplers.erase(std::unique(dopplers.begin(), dopplers.end()), dopplers.end());
}

void fill_metrics(const ExperimentConfig& cfg, const RadarScene& scene,
                  const TrialData& td, const PointSpec& ps, PointOutput& out) {
  const GridConfig grid = cfg.grid();
  const CVec& s = out.waveform;
  const CVec x = to_freq_domain(s, grid);
  const double noise_std = noise_std_of(cfg.esn0_db);

  ResultRow& row = out.row;
  row.mui = mui_energy(td.ch, x, td.s_d);
  row.ser = empirical_ser(td.ch, x, td.s_d, noise_std, cfg.ser_trials,
                          derive_seed(cfg.master_seed, "ser", ps.ser_index));
  row.sum_rate = sum_rate(td.ch, x, td.s_d, noise_std);
  row.islr_db = islr_db(s, scene, grid);
  const auto [lo, hi] = std::minmax_element(scene.target_angles.begin(),
                                            scene.target_angles.end());
  row.rsnr_lo_db = echo_snr_db(s, *lo, cfg.loss_over_noise, grid);
  row.rsnr_hi_db = echo_snr_db(s, *hi, cfg.loss_over_noise, grid);
  row.papr_measured_db = papr_of_time(s, grid).max_db;

  if (ps.want_beams) out.beampattern = beam_pattern_time(s, scene.pattern_grid, grid);
  if (ps.want_ambiguity) {
    std::vector<int> delays;
    std::vector<double> dopplers;
    surface_axes(scene, delays, dopplers);
    for (double th : scene.target_angles)
      out.ambiguities.push_back(ambiguity(s, th, delays, dopplers, grid));
  }
  if (ps.want_curve) {
    const std::uint64_t base = derive_seed(cfg.master_seed, "ser-curve", ps.ser_index);
    for (std::size_t i = 0; i < cfg.esn0_grid_db.size(); ++i) {
      SerPoint pt;
      pt.esn0_db = cfg.esn0_grid_db[i];
      const double ns = noise_std_of(pt.esn0_db);
      pt.ser = empirical_ser(td.ch, x, td.s_d, ns, cfg.ser_trials,
                             derive_seed(base, "esn0", i));
      pt.sum_rate = sum_rate(td.ch, x, td.s_d, ns);
      out.ser_curve.push_back(pt);
    }
  }
}

PointOutput design_point(const ExperimentConfig& cfg, const ReferenceDesign& ref,
                         const TrialData& td, const PointSpec& ps) {
  const auto t0 = std::chrono::steady_clock::now();
  const GridConfig grid = cfg.grid();

  IsacProblem problem =
      make_isac_problem(td.ch, td.s_d, ref.s0, ps.rho, ps.papr_db,
                        cfg.resolved_energy_total(), grid, ps.mode);
  AdmmOptions opts;
  opts.eta = cfg.eta;
  opts.tol = cfg.admm_tol;
  opts.max_iters = cfg.admm_max_iters;
  opts.init = ps.init;
  AdmmResult admm = run_admm(problem, opts);

  PointOutput out;
  out.mode = ps.mode;
  out.waveform = admm.s;
  out.trace = std::move(admm.trace);

  ResultRow& row = out.row;
  row.experiment = ps.experiment;
  row.item = ps.item;
  row.hash = config_hash(cfg);
  row.mode = mode_name(ps.mode);
  row.seed = cfg.master_seed;
  row.rho = ps.rho;
  row.papr_db_max = ps.papr_db;
  row.eta = admm.eta;
  row.iterations = admm.iterations;
  row.converged = admm.converged;
  const TraceRow& last = out.trace.rows.back();
  row.objective = last.objective;
  row.comm_term = last.comm_term;
  row.radar_term = last.radar_term;

  fill_metrics(cfg, ref.spec.scene, td, ps, out);
  row.wall_time_s = elapsed_s(t0);
  return out;
}

PointOutput evaluate_point(const ExperimentConfig& cfg, const RadarScene& scene,
                           const TrialData& td, const CVec& s, const PointSpec& ps) {
  const auto t0 = std::chrono::steady_clock::now();
  PointOutput out;
  out.mode = ps.mode;
  out.waveform = s;

  ResultRow& row = out.row;
  row.experiment = ps.experiment;
  row.item = ps.item;
  row.hash = config_hash(cfg);
  row.mode = mode_name(ps.mode);
  row.seed = cfg.master_seed;
  row.rho = ps.rho;
  row.papr_db_max = ps.papr_db;
  row.eta = 0.0;
  row.iterations = 0;
  row.converged = false;
  // No solver ran; the composite objective has no reference here.
  row.objective = std::numeric_limits<double>::quiet_NaN();
  row.comm_term = std::numeric_limits<double>::quiet_NaN();
  row.radar_term = std::numeric_limits<double>::quiet_NaN();

  fill_metrics(cfg, scene, td, ps, out);
  row.wall_time_s = elapsed_s(t0);
  return out;
}

std::string ensure_dir(const ExperimentConfig& cfg) {
  std::filesystem::create_directories(cfg.output_dir);
  return cfg.output_dir + "/";
}

void write_config_echo(const std::string& dir, const ExperimentConfig& cfg) {
  write_text_file(dir + "config.json", config_to_json(cfg));
}

void write_channel_echo(const std::string& dir, const ExperimentConfig& cfg,
                        const TrialData& td) {
  const ChannelFile file{cfg.grid(), cfg.channel(), td.ch};
  write_text_file(dir + "channel.json", channel_to_json(file));
}

void write_lbfgs_trace_csv(const std::string& path, const std::vector<double>& trace) {
  CsvWriter csv(path);
  csv.row({"schema", "iter", "objective"});
  for (std::size_t i = 0; i < trace.size(); ++i)
    csv.row({"lbfgs_trace/1", CsvWriter::num(static_cast<std::int64_t>(i)),
             CsvWriter::num(trace[i])});
}

void write_surfaces_csv(const std::string& path,
                        const std::vector<AmbiguitySurface>& surfaces) {
  CsvWriter csv(path);
  csv.row({"schema", "theta_deg", "k", "f", "chi_db"});
  for (const AmbiguitySurface& surface : surfaces) {
    const double theta_deg = surface.theta / kDegToRad;
    for (std::size_t ki = 0; ki < surface.delays.size(); ++ki)
      for (std::size_t fi = 0; fi < surface.dopplers.size(); ++fi) {
        const double value = surface.chi(static_cast<Eigen::Index>(ki),
                                         static_cast<Eigen::Index>(fi));
        const double rel = surface.mainlobe > 0.0 ? value / surface.mainlobe : 0.0;
        csv.row({"ambiguity/1", CsvWriter::num(theta_deg),
                 CsvWriter::num(surface.delays[ki]),
                 CsvWriter::num(surface.dopplers[fi]),
                 CsvWriter::num(floored_db(rel))});
      }
  }
}

void write_ser_curves_csv(const std::string& path,
                          const std::vector<const PointOutput*>& points) {
  CsvWriter csv(path);
  csv.row({"schema", "experiment", "item", "mode", "rho", "papr_db_max", "esn0_db",
           "ser", "sum_rate"});
  for (const PointOutput* p : points)
    for (const SerPoint& pt : p->ser_curve)
      csv.row({"ser_curve/1", p->row.experiment, p->row.item, p->row.mode,
               CsvWriter::num(p->row.rho), CsvWriter::num(p->row.papr_db_max),
               CsvWriter::num(pt.esn0_db), CsvWriter::num(pt.ser),
               CsvWriter::num(pt.sum_rate)});
}

void write_beampattern_of(const std::string& path, const CVec& s,
                          const RadarScene& scene, const GridConfig& grid) {
  write_beampattern_csv(path, scene.pattern_grid,
                        beam_pattern_time(s, scene.pattern_grid, grid),
                        scene.ideal_pattern);
}

}  // namespace

void write_results_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  CsvWriter csv(path);
  csv.row({"schema", "experiment", "item", "config_hash", "mode", "seed", "rho",
           "papr_db_max", "eta", "iterations", "converged", "objective", "comm_term",
           "radar_term", "mui", "ser", "sum_rate", "islr_db", "rsnr_lo_db",
           "rsnr_hi_db", "papr_measured_db"});
  for (const ResultRow& r : rows)
    csv.row({"results/1", r.experiment, r.item, r.hash, r.mode, CsvWriter::num(r.seed),
             CsvWriter::num(r.rho), CsvWriter::num(r.papr_db_max), CsvWriter::num(r.eta),
             CsvWriter::num(r.iterations), CsvWriter::num(r.converged ? 1 : 0),
             CsvWriter::num(r.objective), CsvWriter::num(r.comm_term),
             CsvWriter::num(r.radar_term), CsvWriter::num(r.mui), CsvWriter::num(r.ser),
             CsvWriter::num(r.sum_rate), CsvWriter::num(r.islr_db),
             CsvWriter::num(r.rsnr_lo_db), CsvWriter::num(r.rsnr_hi_db),
             CsvWriter::num(r.papr_measured_db)});
}

void write_timings_csv(const std::string& path, const std::vector<ResultRow>& rows) {
  CsvWriter csv(path);
  csv.row({"schema", "experiment", "item", "wall_time_s"});
  for (const ResultRow& r : rows)
    csv.row({"timings/1", r.experiment, r.item, CsvWriter::num(r.wall_time_s)});
}

void write_trace_csv(const std::string& path, const ConvergenceTrace& trace) {
  CsvWriter csv(path);
  csv.row({"schema", "iter", "objective", "comm_term", "radar_term", "lagrangian",
           "res_y", "res_v"});
  for (const TraceRow& r : trace.rows)
    csv.row({"trace/1", CsvWriter::num(r.iter), CsvWriter::num(r.objective),
             CsvWriter::num(r.comm_term), CsvWriter::num(r.radar_term),
             CsvWriter::num(r.lagrangian), CsvWriter::num(r.res_y),
             CsvWriter::num(r.res_v)});
}

void parallel_for(int n, int threads, const std::function<void(int)>& fn) {
  if (n <= 0) return;
  int workers = threads > 0 ? threads
                            : static_cast<int>(std::thread::hardware_concurrency());
  workers = std::clamp(workers, 1, n);
  if (workers == 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }

  std::atomic<int> next{0};
  std::mutex err_mutex;
  std::exception_ptr err;
  const auto worker = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= n) return;
      try {
        fn(i);
      } catch (...) {
        {
          const std::lock_guard<std::mutex> lock(err_mutex);
          if (!err) err = std::current_exception();
        }
        next.store(n);
        return;
      }
    }
  };

  std::vector<std::thread> pool;
  pool.reserve(static_cast<std::size_t>(workers));
  for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
  for (std::thread& t : pool) t.join();
  if (err) std::rethrow_exception(err);
}

DesignIdealOutput run_design_ideal(const ExperimentConfig& cfg) {
  DesignIdealOutput out;
  out.mode = cfg.mode();
  out.ref = make_reference(cfg, out.mode);
  return out;
}

void write_design_ideal(const ExperimentConfig& cfg, const DesignIdealOutput& out) {
  const std::string dir = ensure_dir(cfg);
  write_config_echo(dir, cfg);
  write_cwf(dir + "s0.cwf", {cfg.grid(), out.mode, out.ref.s0});
  write_lbfgs_trace_csv(dir + "lbfgs_trace.csv", out.ref.result.trace);
  const RadarScene& scene = out.ref.spec.scene;
  write_beampattern_of(dir + "beampattern.csv", out.ref.s0, scene, cfg.grid());
  std::vector<int> delays;
  std::vector<double> dopplers;
  surface_axes(scene, delays, dopplers);
  std::vector<AmbiguitySurface> surfaces;
  for (double th : scene.target_angles)
    surfaces.push_back(ambiguity(out.ref.s0, th, delays, dopplers, cfg.grid()));
  write_surfaces_csv(dir + "ambiguity.csv", surfaces);
}

DesignIsacOutput run_design_isac(const ExperimentConfig& cfg) {
  DesignIsacOutput out;
  const SamplingMode mode = cfg.mode();
  out.ref = make_reference(cfg, mode);
  out.trial = make_trial(cfg, 0);

  PointSpec ps;
  ps.experiment = "design-isac";
  ps.item = "";
  ps.mode = mode;
  ps.rho = cfg.rho;
  ps.papr_db = cfg.papr_db;
  ps.ser_index = 0;
  ps.init = parse_init(cfg.admm_init);
  ps.want_beams = true;
  ps.want_ambiguity = true;
  ps.want_curve = true;
  out.point = design_point(cfg, out.ref, out.trial, ps);
  return out;
}

void write_design_isac(const ExperimentConfig& cfg, const DesignIsacOutput& out) {
  const std::string dir = ensure_dir(cfg);
  write_config_echo(dir, cfg);
  write_channel_echo(dir, cfg, out.trial);
  write_cwf(dir + "s0.cwf", {cfg.grid(), out.point.mode, out.ref.s0});
  write_cwf(dir + "isac.cwf", {cfg.grid(), out.point.mode, out.point.waveform});
  if (!out.ref.loaded) write_lbfgs_trace_csv(dir + "lbfgs_trace.csv", out.ref.result.trace);
  write_trace_csv(dir + "trace.csv", out.point.trace);
  write_results_csv(dir + "results.csv", {out.point.row});
  write_timings_csv(dir + "timings.csv", {out.point.row});
  const RadarScene& scene = out.ref.spec.scene;
  write_beampattern_csv(dir + "beampattern.csv", scene.pattern_grid, out.point.beampattern,
                        scene.ideal_pattern);
  write_beampattern_of(dir + "beampattern_s0.csv", out.ref.s0, scene, cfg.grid());
  write_surfaces_csv(dir + "ambiguity.csv", out.point.ambiguities);
  write_ser_curves_csv(dir + "ser_curve.csv", {&out.point});
}

EvaluateOutput run_evaluate(const ExperimentConfig& cfg, const CwfFile& waveform,
                            const std::optional<ChannelFile>& channel) {
  cfg.validate();
  const GridConfig grid = cfg.grid();
  if (waveform.grid.n_tx != grid.n_tx || waveform.grid.n_sub != grid.n_sub ||
      waveform.grid.n_cp != grid.n_cp || waveform.grid.os_rate != grid.os_rate)
    throw std::invalid_argument("evaluate: waveform grid does not match the configuration");

  EvaluateOutput out;
  if (channel.has_value()) {
    const GridConfig& cg = channel->grid;
    if (cg.n_tx != grid.n_tx || cg.n_sub != grid.n_sub)
      throw std::invalid_argument("evaluate: channel grid does not match the configuration");
    if (channel->config.n_users != cfg.n_users)
      throw std::invalid_argument("evaluate: channel user count does not match the configuration");
    out.trial.ch = channel->realization;
  } else {
    out.trial.ch = sample_channel(cfg.channel(), grid,
                                  derive_seed(cfg.master_seed, "channel", 0));
  }
  out.trial.s_d = random_qpsk(static_cast<Eigen::Index>(cfg.n_sub) * cfg.n_users,
                              derive_seed(cfg.master_seed, "symbols", 0));

  const double e_eff =
      cfg.resolved_energy_total() * grid.n_sub / (grid.n_sub + grid.n_cp);
  out.scene = make_default_scene(grid, waveform.mode, cfg.target_angles_rad(), e_eff,
                                 cfg.mask_width_deg, cfg.grid_step_deg);

  PointSpec ps;
  ps.experiment = "evaluate";
  ps.item = "";
  ps.mode = waveform.mode;
  ps.rho = cfg.rho;
  ps.papr_db = cfg.papr_db;
  ps.ser_index = 0;
  ps.want_beams = true;
  ps.want_ambiguity = true;
  ps.want_curve = true;
  out.point = evaluate_point(cfg, out.scene, out.trial, waveform.samples, ps);
  return out;
}

void write_evaluate(const ExperimentConfig& cfg, const EvaluateOutput& out) {
  const std::string dir = ensure_dir(cfg);
  write_config_echo(dir, cfg);
  write_channel_echo(dir, cfg, out.trial);
  write_results_csv(dir + "results.csv", {out.point.row});
  write_timings_csv(dir + "timings.csv", {out.point.row});
  write_beampattern_csv(dir + "beampattern.csv", out.scene.pattern_grid,
                        out.point.beampattern, out.scene.ideal_pattern);
  write_surfaces_csv(dir + "ambiguity.csv", out.point.ambiguities);
  write_ser_curves_csv(dir + "ser_curve.csv", {&out.point});
}

InitStudyOutput run_init_study(const ExperimentConfig& cfg) {
  InitStudyOutput out;
  const SamplingMode mode = cfg.mode();
  out.ref = make_reference(cfg, mode);
  out.trial = make_trial(cfg, 0);

  const std::vector<std::pair<std::string, AdmmInit>> inits = {
      {"zero", AdmmInit::kZero}, {"radar", AdmmInit::kRadar}, {"comm", AdmmInit::kComm}};
  out.runs.resize(inits.size());
  parallel_for(static_cast<int>(inits.size()), cfg.threads, [&](int i) {
    PointSpec ps;
    ps.experiment = "init-study";
    ps.item = "init=" + inits[static_cast<std::size_t>(i)].first;
    ps.mode = mode;
    ps.rho = cfg.rho;
    ps.papr_db = cfg.papr_db;
    ps.ser_index = 0;
    ps.init = inits[static_cast<std::size_t>(i)].second;
    out.runs[static_cast<std::size_t>(i)].name = inits[static_cast<std::size_t>(i)].first;
    out.runs[static_cast<std::size_t>(i)].point = design_point(cfg, out.ref, out.trial, ps);
  });
  return out;
}

void write_init_study(const ExperimentConfig& cfg, const InitStudyOutput& out) {
  const std::string dir = ensure_dir(cfg);
  write_config_echo(dir, cfg);
  write_channel_echo(dir, cfg, out.trial);
  write_cwf(dir + "s0.cwf", {cfg.grid(), out.ref.spec.mode, out.ref.s0});

  CsvWriter csv(dir + "init_study.csv");
  csv.row({"schema", "init", "iter", "objective", "comm_term", "radar_term",
           "lagrangian", "res_y", "res_v"});
  for (const InitStudyRun& run : out.runs)
    for (const TraceRow& r : run.point.trace.rows)
      csv.row({"init_study/1", run.name, CsvWriter::num(r.iter),
               CsvWriter::num(r.objective), CsvWriter::num(r.comm_term),
               CsvWriter::num(r.radar_term), CsvWriter::num(r.lagrangian),
               CsvWriter::num(r.res_y), CsvWriter::num(r.res_v)});

  std::vector<ResultRow> rows;
  for (const InitStudyRun& run : out.runs) rows.push_back(run.point.row);
  write_results_csv(dir + "results.csv", rows);
  write_timings_csv(dir + "timings.csv", rows);
}

namespace {

SweepOutput run_sweep(const ExperimentConfig& cfg, const std::string& experiment,
                      const std::vector<double>& values, bool values_are_rho) {
  SweepOutput out;
  out.refs.push_back(make_reference(cfg, SamplingMode::kNyquist));
  out.refs.push_back(make_reference(cfg, SamplingMode::kOversampled));
  out.trial = make_trial(cfg, 0);

  const int per_mode = static_cast<int>(values.size());
  out.points.resize(2 * static_cast<std::size_t>(per_mode));
  parallel_for(2 * per_mode, cfg.threads, [&](int i) {
    const int mode_i = i / per_mode;
    const double value = values[static_cast<std::size_t>(i % per_mode)];
    const SamplingMode mode =
        mode_i == 0 ? SamplingMode::kNyquist : SamplingMode::kOversampled;
    PointSpec ps;
    ps.experiment = experiment;
    ps.mode = mode;
    ps.rho = values_are_rho ? value : cfg.rho;
    ps.papr_db = values_are_rho ? cfg.papr_db : value;
    ps.item = std::string("mode=") + mode_name(mode) + ";" +
              (values_are_rho ? "rho=" : "papr_db=") + CsvWriter::num(value);
    ps.ser_index = static_cast<std::uint64_t>(i);
    ps.init = parse_init(cfg.admm_init);
    ps.want_beams = values_are_rho;
    ps.want_ambiguity = values_are_rho;
    ps.want_curve = true;
    out.points[static_cast<std::size_t>(i)] =
        design_point(cfg, out.refs[static_cast<std::size_t>(mode_i)], out.trial, ps);
  });
  return out;
}

void write_sweep_common(const ExperimentConfig& cfg, const SweepOutput& out,
                        const std::string& dir) {
  write_config_echo(dir, cfg);
  write_channel_echo(dir, cfg, out.trial);
  std::vector<ResultRow> rows;
  std::vector<const PointOutput*> points;
  for (const PointOutput& p : out.points) {
    rows.push_back(p.row);
    points.push_back(&p);
  }
  write_results_csv(dir + "results.csv", rows);
  write_timings_csv(dir + "timings.csv", rows);
  write_ser_curves_csv(dir + "ser_curve.csv", points);
}

std::string point_file_tag(const PointOutput& p, bool values_are_rho) {
  const double value = values_are_rho ? p.row.rho : p.row.papr_db_max;
  return std::string(mode_name(p.mode)) + "_" +
         (values_are_rho ? "rho" : "papr") + CsvWriter::num(value);
}

}  // namespace

SweepOutput run_rho_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_sweep(cfg, "rho-sweep", cfg.rho_grid, true);
}

void write_rho_sweep(const ExperimentConfig& cfg, const SweepOutput& out) {
  const std::string dir = ensure_dir(cfg);
  write_sweep_common(cfg, out, dir);
  for (std::size_t m = 0; m < out.refs.size(); ++m) {
    const ReferenceDesign& ref = out.refs[m];
    write_beampattern_of(dir + "beampattern_s0_" + mode_name(ref.spec.mode) + ".csv",
                         ref.s0, ref.spec.scene, cfg.grid());
  }
  for (const PointOutput& p : out.points) {
    const std::string tag = point_file_tag(p, true);
    const RadarScene& scene =
        out.refs[p.mode == SamplingMode::kNyquist ? 0 : 1].spec.scene;
    write_beampattern_csv(dir + "beampattern_" + tag + ".csv", scene.pattern_grid,
                          p.beampattern, scene.ideal_pattern);
    write_surfaces_csv(dir + "ambiguity_" + tag + ".csv", p.ambiguities);
  }
}

SweepOutput run_papr_sweep(const ExperimentConfig& cfg) {
  cfg.validate();
  return run_sweep(cfg, "papr-sweep", cfg.papr_grid_db, false);
}

void write_papr_sweep(const ExperimentConfig& cfg, const SweepOutput& out) {
  const std::string dir = ensure_dir(cfg);
  write_sweep_common(cfg, out, dir);
  for (const PointOutput& p : out.points)
    write_trace_csv(dir + "trace_" + point_file_tag(p, false) + ".csv", p.trace);
}

MonteCarloOutput run_montecarlo(const ExperimentConfig& cfg) {
  cfg.validate();
  MonteCarloOutput out;
  const SamplingMode mode = cfg.mode();
  out.ref = make_reference(cfg, mode);

  out.trials.resize(static_cast<std::size_t>(cfg.n_mc));
  parallel_for(cfg.n_mc, cfg.threads, [&](int t) {
    const TrialData td = make_trial(cfg, static_cast<std::uint64_t>(t));
    PointSpec ps;
    ps.experiment = "montecarlo";
    ps.item = "trial=" + CsvWriter::num(t);
    ps.mode = mode;
    ps.rho = cfg.rho;
    ps.papr_db = cfg.papr_db;
    ps.ser_index = static_cast<std::uint64_t>(t);
    ps.init = parse_init(cfg.admm_init);
    out.trials[static_cast<std::size_t>(t)] = design_point(cfg, out.ref, td, ps);
  });

  const std::vector<std::pair<std::string, double ResultRow::*>> metrics = {
      {"objective", &ResultRow::objective},
      {"comm_term", &ResultRow::comm_term},
      {"radar_term", &ResultRow::radar_term},
      {"mui", &ResultRow::mui},
      {"ser", &ResultRow::ser},
      {"sum_rate", &ResultRow::sum_rate},
      {"islr_db", &ResultRow::islr_db},
      {"rsnr_lo_db", &ResultRow::rsnr_lo_db},
      {"rsnr_hi_db", &ResultRow::rsnr_hi_db},
      {"papr_measured_db", &ResultRow::papr_measured_db}};
  const double n = static_cast<double>(cfg.n_mc);
  for (const auto& [name, member] : metrics) {
    double mean = 0.0;
    for (const PointOutput& p : out.trials) mean += p.row.*member;
    mean /= n;
    double var = 0.0;
    for (const PointOutput& p : out.trials) {
      const double d = p.row.*member - mean;
      var += d * d;
    }
    const double stderr_val = cfg.n_mc > 1 ? std::sqrt(var / (n - 1.0) / n) : 0.0;
    out.metric_names.push_back(name);
    out.means.push_back(mean);
    out.stderrs.push_back(stderr_val);
  }
  return out;
}

void write_montecarlo(const ExperimentConfig& cfg, const MonteCarloOutput& out) {
  const std::string dir = ensure_dir(cfg);
  write_config_echo(dir, cfg);
  std::vector<ResultRow> rows;
  for (const PointOutput& p : out.trials) rows.push_back(p.row);
  write_results_csv(dir + "results.csv", rows);
  write_timings_csv(dir + "timings.csv", rows);

  CsvWriter csv(dir + "summary.csv");
  csv.row({"schema", "metric", "mean", "stderr", "n"});
  for (std::size_t i = 0; i < out.metric_names.size(); ++i)
    csv.row({"mc_summary/1", out.metric_names[i], CsvWriter::num(out.means[i]),
             CsvWriter::num(out.stderrs[i]), CsvWriter::num(cfg.n_mc)});
}

}  // namespace isacwave
