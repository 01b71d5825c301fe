// SPDX-License-Identifier: Apache-2.0
#include "isacwave/ideal_waveform.hpp"

#include <cmath>
#include <stdexcept>

#include "isacwave/operators.hpp"
#include "isacwave/rng.hpp"

namespace isacwave {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Shared evaluation state: the direction projectors depend only on the scene,
// only the waveform changes between calls.
class Objective {
 public:
  explicit Objective(const IdealObjectiveSpec& spec)
      : weight_(spec.resolved_beam_weight()),
        frame_(spec.grid.frame_count(spec.mode)),
        mask_(spec.scene.ideal_pattern),
        pairs_(spec.scene.delay_doppler_set) {
    spec.grid.validate();
    spec.scene.validate();
    for (const double t : spec.scene.target_angles)
      targets_.emplace_back(t, spec.grid, spec.mode);
    for (const double t : spec.scene.pattern_grid)
      grid_ops_.emplace_back(t, spec.grid, spec.mode);
  }

  // Objective value; accumulates the conjugate gradient when g is non-null.
  double eval(const CVec& s, CVec* g) const {
    if (g) g->setZero(s.size());
    double obj = 0.0;

    for (const DirectionOperator& op : targets_) {
      const CVec sv = op.apply(s);
      const Eigen::Index n = sv.size();
      CVec acc;
      if (g) acc = CVec::Zero(n);
      for (const auto& [k, f] : pairs_) {
        // u = s_v^H J_k D_f s_v, evaluated as one pass over valid shifts.
        cplx u(0.0, 0.0);
        const Eigen::Index lo = std::max<Eigen::Index>(0, k);
        const Eigen::Index hi = std::min<Eigen::Index>(n, n + k);
        if (f == 0.0) {
          for (Eigen::Index i = lo; i < hi; ++i) u += std::conj(sv[i]) * sv[i - k];
          if (g) {
            const cplx cu = std::conj(u);
            for (Eigen::Index i = lo; i < hi; ++i) {
              acc[i] += cu * sv[i - k];       // J_k D_f s_v term
              acc[i - k] += u * sv[i];        // D_f^H J_k^T s_v term
            }
          }
        } else {
          for (Eigen::Index i = lo; i < hi; ++i) {
            const double ph = kTwoPi * f * static_cast<double>(i - k + 1);
            u += std::conj(sv[i]) * cplx(std::cos(ph), std::sin(ph)) * sv[i - k];
          }
          if (g) {
            const cplx cu = std::conj(u);
            for (Eigen::Index i = lo; i < hi; ++i) {
              const double ph = kTwoPi * f * static_cast<double>(i - k + 1);
              const cplx e(std::cos(ph), std::sin(ph));
              acc[i] += cu * e * sv[i - k];
              acc[i - k] += u * std::conj(e) * sv[i];
            }
          }
        }
        obj += std::norm(u);
      }
      if (g) *g += op.adjoint(acc);
    }

    const double inv_frame = 1.0 / static_cast<double>(frame_);
    for (std::size_t a = 0; a < grid_ops_.size(); ++a) {
      const CVec sv = grid_ops_[a].apply(s);
      const double q = sv.squaredNorm() * inv_frame;
      const double r = q - mask_[static_cast<Eigen::Index>(a)];
      obj += weight_ * r * r;
      if (g) *g += grid_ops_[a].adjoint((2.0 * weight_ * r * inv_frame) * sv);
    }
    return obj;
  }

 private:
  std::vector<DirectionOperator> targets_;
  std::vector<DirectionOperator> grid_ops_;
  double weight_;
  int frame_;
  RVec mask_;
  std::vector<std::pair<int, double>> pairs_;
};

CVec unstack(const RVec& x) {
  const Eigen::Index n = x.size() / 2;
  CVec s(n);
  for (Eigen::Index i = 0; i < n; ++i) s[i] = cplx(x[i], x[n + i]);
  return s;
}

RVec stack(const CVec& s) {
  const Eigen::Index n = s.size();
  RVec x(2 * n);
  for (Eigen::Index i = 0; i < n; ++i) {
    x[i] = s[i].real();
    x[n + i] = s[i].imag();
  }
  return x;
}
}  // namespace

double ideal_objective(const CVec& s, const IdealObjectiveSpec& spec) {
  if (s.size() != spec.grid.time_len(spec.mode))
    throw std::invalid_argument("ideal_objective: wrong waveform length");
  return Objective(spec).eval(s, nullptr);
}

CVec ideal_gradient(const CVec& s, const IdealObjectiveSpec& spec) {
  if (s.size() != spec.grid.time_len(spec.mode))
    throw std::invalid_argument("ideal_gradient: wrong waveform length");
  CVec g;
  Objective(spec).eval(s, &g);
  return g;
}

RVec ideal_gradient_real(const CVec& s, const IdealObjectiveSpec& spec) {
  const CVec g = ideal_gradient(s, spec);
  RVec out(2 * g.size());
  for (Eigen::Index i = 0; i < g.size(); ++i) {
    out[i] = 2.0 * g[i].real();
    out[g.size() + i] = 2.0 * g[i].imag();
  }
  return out;
}

CVec random_waveform(const IdealObjectiveSpec& spec, std::uint64_t seed) {
  Rng rng(seed);
  CVec s(spec.grid.time_len(spec.mode));
  for (Eigen::Index i = 0; i < s.size(); ++i) s[i] = rng.cnormal();
  return normalize_energy(s, spec.target_energy);
}

CVec normalize_energy(const CVec& s, double target_energy) {
  if (!(target_energy > 0.0))
    throw std::invalid_argument("normalize_energy: target must be > 0");
  const double e = s.squaredNorm();
  if (e == 0.0) throw std::domain_error("normalize_energy: zero waveform");
  return s * std::sqrt(target_energy / e);
}

IdealDesignResult design_ideal_waveform(const IdealObjectiveSpec& spec,
                                        const LbfgsConfig& cfg, const CVec& init) {
  if (init.size() != spec.grid.time_len(spec.mode))
    throw std::invalid_argument("design_ideal_waveform: wrong init length");
  const Objective objective(spec);
  const ObjectiveFn fn = [&objective](const RVec& x, RVec* grad) {
    const CVec s = unstack(x);
    if (!grad) return objective.eval(s, nullptr);
    CVec g;
    const double f = objective.eval(s, &g);
    grad->resize(x.size());
    const Eigen::Index n = g.size();
    for (Eigen::Index i = 0; i < n; ++i) {
      (*grad)[i] = 2.0 * g[i].real();
      (*grad)[n + i] = 2.0 * g[i].imag();
    }
    return f;
  };

  const LbfgsResult r = lbfgs_minimize(fn, stack(init), cfg);
  IdealDesignResult out;
  out.waveform = normalize_energy(unstack(r.x), spec.target_energy);
  out.objective = r.objective;
  out.iterations = r.iterations;
  out.converged = r.converged;
  out.stalled = r.stalled;
  out.trace = r.trace;
  return out;
}

CVec ideal_comm_waveform(const ChannelRealization& ch, const CVec& s_d,
                         const GridConfig& grid, SamplingMode mode) {
  const int n_sub = ch.n_sub();
  const int nt = ch.n_tx();
  const int nu = ch.n_users();
  if (n_sub != grid.n_sub || nt != grid.n_tx)
    throw std::invalid_argument("ideal_comm_waveform: channel/grid mismatch");
  if (s_d.size() != static_cast<Eigen::Index>(n_sub) * nu)
    throw std::invalid_argument("ideal_comm_waveform: s_d has wrong length");
  CVec x(static_cast<Eigen::Index>(n_sub) * nt);
  for (int n = 0; n < n_sub; ++n) {
    // Least-norm solve keeps the precode defined when H_n loses row rank.
    const auto cod = ch.freq_blocks[static_cast<std::size_t>(n)]
                         .completeOrthogonalDecomposition();
    x.segment(static_cast<Eigen::Index>(n) * nt, nt) =
        cod.solve(s_d.segment(static_cast<Eigen::Index>(n) * nu, nu));
  }
  return to_time_domain(x, grid, mode);
}

}  // namespace isacwave
