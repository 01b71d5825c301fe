// SPDX-License-Identifier: Apache-2.0
#include "isacwave/radar_metrics.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "isacwave/operators.hpp"
#include "isacwave/serialization.hpp"

namespace isacwave {

namespace {
constexpr double kDbFloor = -300.0;
constexpr double kDegToRad = 0.017453292519943295769;

double floored_db(double linear) {
  if (!(linear > 0.0)) return kDbFloor;
  return std::max(10.0 * std::log10(linear), kDbFloor);
}
}  // namespace

void RadarScene::validate() const {
  if (target_angles.empty()) throw std::invalid_argument("RadarScene: no targets");
  if (pattern_grid.empty()) throw std::invalid_argument("RadarScene: empty pattern grid");
  if (ideal_pattern.size() != static_cast<Eigen::Index>(pattern_grid.size()))
    throw std::invalid_argument("RadarScene: ideal_pattern / pattern_grid size mismatch");
  for (Eigen::Index i = 0; i < ideal_pattern.size(); ++i)
    if (!(ideal_pattern[i] >= 0.0))
      throw std::invalid_argument("RadarScene: ideal_pattern must be >= 0");
  for (const double t : target_angles) {
    const bool on_grid =
        std::any_of(pattern_grid.begin(), pattern_grid.end(),
                    [t](double g) { return std::abs(g - t) < 1e-12; });
    if (!on_grid)
      throw std::invalid_argument("RadarScene: target angle not on pattern grid");
  }
  for (const auto& [k, f] : delay_doppler_set)
    if (k == 0 && f == 0.0)
      throw std::invalid_argument("RadarScene: delay_doppler_set contains the mainlobe");
}

RadarScene make_default_scene(const GridConfig& grid, SamplingMode mode,
                              const std::vector<double>& target_angles,
                              double target_energy, double mask_width_deg,
                              double grid_step_deg) {
  grid.validate();
  if (target_angles.empty())
    throw std::invalid_argument("make_default_scene: no targets");
  if (!(target_energy > 0.0))
    throw std::invalid_argument("make_default_scene: target_energy must be > 0");
  if (!(grid_step_deg > 0.0) || !(mask_width_deg >= 0.0))
    throw std::invalid_argument("make_default_scene: bad mask geometry");

  RadarScene scene;
  scene.target_angles = target_angles;
  const int steps = static_cast<int>(std::lround(180.0 / grid_step_deg));
  scene.pattern_grid.reserve(static_cast<std::size_t>(steps) + 1);
  for (int i = 0; i <= steps; ++i)
    scene.pattern_grid.push_back((-90.0 + i * grid_step_deg) * kDegToRad);
  // Snap each target onto the nearest grid point so the containment invariant
  // holds under rounding of degree inputs.
  for (double& t : scene.target_angles) {
    double best = scene.pattern_grid[0];
    for (const double g : scene.pattern_grid)
      if (std::abs(g - t) < std::abs(best - t)) best = g;
    if (std::abs(best - t) > 1e-9)
      throw std::invalid_argument("make_default_scene: target not representable on grid");
    t = best;
  }

  const double half_width = mask_width_deg / 2.0 * kDegToRad;
  scene.ideal_pattern = RVec::Zero(static_cast<Eigen::Index>(scene.pattern_grid.size()));
  int in_lobe = 0;
  for (std::size_t i = 0; i < scene.pattern_grid.size(); ++i) {
    for (const double t : scene.target_angles) {
      if (std::abs(scene.pattern_grid[i] - t) <= half_width + 1e-12) {
        scene.ideal_pattern[static_cast<Eigen::Index>(i)] = 1.0;
        ++in_lobe;
        break;
      }
    }
  }
  if (in_lobe > 0) {
    const double symbol_power = target_energy / grid.sub_count(mode);
    const double level = grid.n_tx * symbol_power / in_lobe;
    scene.ideal_pattern *= level;
  }

  const int k_max = std::min(grid.cp_count(mode), grid.frame_count(mode) - 1);
  for (int k = -k_max; k <= k_max; ++k)
    if (k != 0) scene.delay_doppler_set.emplace_back(k, 0.0);

  scene.validate();
  return scene;
}

RVec beam_pattern_cov(const std::vector<CVec>& snapshots,
                      const std::vector<double>& grid_angles, int n_tx) {
  if (snapshots.empty()) throw std::invalid_argument("beam_pattern_cov: no snapshots");
  for (const CVec& s : snapshots)
    if (s.size() != n_tx)
      throw std::invalid_argument("beam_pattern_cov: snapshot length != n_tx");
  RVec b = RVec::Zero(static_cast<Eigen::Index>(grid_angles.size()));
  for (std::size_t i = 0; i < grid_angles.size(); ++i) {
    const CVec a = steering_vector(grid_angles[i], n_tx);
    double acc = 0.0;
    for (const CVec& s : snapshots) acc += std::norm(a.cwiseProduct(s).sum());
    b[static_cast<Eigen::Index>(i)] = acc / static_cast<double>(snapshots.size());
  }
  return b;
}

RVec beam_pattern_time(const CVec& s, const std::vector<double>& grid_angles,
                       const GridConfig& grid) {
  const SamplingMode mode = grid.mode_of(s.size());
  RVec b(static_cast<Eigen::Index>(grid_angles.size()));
  for (std::size_t i = 0; i < grid_angles.size(); ++i) {
    const DirectionOperator g(grid_angles[i], grid, mode);
    b[static_cast<Eigen::Index>(i)] = g.apply(s).squaredNorm() / g.frame_count();
  }
  return b;
}

AmbiguitySurface ambiguity(const CVec& s, double theta, const std::vector<int>& delays,
                           const std::vector<double>& dopplers, const GridConfig& grid) {
  const SamplingMode mode = grid.mode_of(s.size());
  const DirectionOperator g(theta, grid, mode);
  const CVec sv = g.apply(s);
  AmbiguitySurface out;
  out.theta = theta;
  out.delays = delays;
  out.dopplers = dopplers;
  out.chi.resize(static_cast<Eigen::Index>(delays.size()),
                 static_cast<Eigen::Index>(dopplers.size()));
  for (std::size_t ki = 0; ki < delays.size(); ++ki)
    for (std::size_t fi = 0; fi < dopplers.size(); ++fi) {
      const cplx u = sv.dot(delay_doppler_apply(sv, delays[ki], dopplers[fi]));
      out.chi(static_cast<Eigen::Index>(ki), static_cast<Eigen::Index>(fi)) = std::norm(u);
    }
  out.mainlobe = std::norm(sv.dot(sv));
  return out;
}

namespace {
// Sidelobe energy sum and mainlobe per target, shared by isl and islr.
void sidelobe_sums(const CVec& s, const RadarScene& scene, const GridConfig& grid,
                   std::vector<double>& sums, std::vector<double>& mains) {
  scene.validate();
  const SamplingMode mode = grid.mode_of(s.size());
  for (const double theta : scene.target_angles) {
    const DirectionOperator g(theta, grid, mode);
    const CVec sv = g.apply(s);
    double acc = 0.0;
    for (const auto& [k, f] : scene.delay_doppler_set)
      acc += std::norm(sv.dot(delay_doppler_apply(sv, k, f)));
    sums.push_back(acc);
    mains.push_back(std::norm(sv.dot(sv)));
  }
}
}  // namespace

double isl(const CVec& s, const RadarScene& scene, const GridConfig& grid) {
  std::vector<double> sums, mains;
  sidelobe_sums(s, scene, grid, sums, mains);
  double total = 0.0;
  for (const double v : sums) total += v;
  return total;
}

double islr_db(const CVec& s, const RadarScene& scene, const GridConfig& grid) {
  std::vector<double> sums, mains;
  sidelobe_sums(s, scene, grid, sums, mains);
  double mean_ratio = 0.0;
  for (std::size_t i = 0; i < sums.size(); ++i) {
    if (mains[i] == 0.0)
      throw std::domain_error("islr_db: degenerate waveform, zero mainlobe");
    mean_ratio += sums[i] / mains[i];
  }
  mean_ratio /= static_cast<double>(sums.size());
  return floored_db(mean_ratio);
}

double echo_snr_db(const CVec& s, double theta, double loss_over_noise,
                   const GridConfig& grid) {
  if (s.squaredNorm() == 0.0)
    throw std::invalid_argument("echo_snr_db: zero waveform");
  if (!(loss_over_noise > 0.0))
    throw std::invalid_argument("echo_snr_db: loss_over_noise must be > 0");
  const SamplingMode mode = grid.mode_of(s.size());
  const DirectionOperator g(theta, grid, mode);
  const double b = g.apply(s).squaredNorm() / g.frame_count();
  return floored_db(b * loss_over_noise);
}

void write_ambiguity_csv(const std::string& path, const AmbiguitySurface& surface) {
  CsvWriter csv(path);
  csv.row({"schema", "theta_deg", "k", "f", "chi_db"});
  const double theta_deg = surface.theta / kDegToRad;
  for (std::size_t ki = 0; ki < surface.delays.size(); ++ki)
    for (std::size_t fi = 0; fi < surface.dopplers.size(); ++fi) {
      const double value = surface.chi(static_cast<Eigen::Index>(ki),
                                       static_cast<Eigen::Index>(fi));
      const double rel = surface.mainlobe > 0.0 ? value / surface.mainlobe : 0.0;
      csv.row({"ambiguity/1", CsvWriter::num(theta_deg),
               CsvWriter::num(surface.delays[ki]), CsvWriter::num(surface.dopplers[fi]),
               CsvWriter::num(floored_db(rel))});
    }
}

void write_beampattern_csv(const std::string& path,
                           const std::vector<double>& grid_angles, const RVec& pattern,
                           const RVec& mask) {
  if (pattern.size() != static_cast<Eigen::Index>(grid_angles.size()))
    throw std::invalid_argument("write_beampattern_csv: size mismatch");
  const bool with_mask = mask.size() != 0;
  if (with_mask && mask.size() != pattern.size())
    throw std::invalid_argument("write_beampattern_csv: mask size mismatch");
  CsvWriter csv(path);
  if (with_mask)
    csv.row({"schema", "theta_deg", "pattern", "mask"});
  else
    csv.row({"schema", "theta_deg", "pattern"});
  for (std::size_t i = 0; i < grid_angles.size(); ++i) {
    const Eigen::Index e = static_cast<Eigen::Index>(i);
    if (with_mask)
      csv.row({"beampattern/1", CsvWriter::num(grid_angles[i] / kDegToRad),
               CsvWriter::num(pattern[e]), CsvWriter::num(mask[e])});
    else
      csv.row({"beampattern/1", CsvWriter::num(grid_angles[i] / kDegToRad),
               CsvWriter::num(pattern[e])});
  }
}

}  // namespace isacwave
