// SPDX-License-Identifier: Apache-2.0
#include "isacwave/admm.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <stdexcept>

#include "isacwave/rng.hpp"

namespace isacwave {

void IsacProblem::validate() const {
  grid.validate();
  const Eigen::Index n = dim();
  if (h_hat.cols() != n)
    throw std::invalid_argument("IsacProblem: channel column count does not match the grid");
  if (h_hat.rows() != s_d.size())
    throw std::invalid_argument("IsacProblem: symbol vector does not match the channel");
  if (s0.size() != n)
    throw std::invalid_argument("IsacProblem: reference waveform does not match the grid");
  if (!(rho >= 0.0 && rho <= 1.0))
    throw std::invalid_argument("IsacProblem: rho must lie in [0, 1]");
  if (!(s_d.squaredNorm() > 0.0))
    throw std::invalid_argument("IsacProblem: zero symbol vector");
  if (!(s0.squaredNorm() > 0.0))
    throw std::invalid_argument("IsacProblem: zero reference waveform");
  if (!(eps > 0.0)) throw std::invalid_argument("IsacProblem: eps must be > 0");
  if (!(energy_per_antenna > 0.0))
    throw std::invalid_argument("IsacProblem: energy_per_antenna must be > 0");
  const double per = static_cast<double>(grid.sub_count(mode));
  if (eps * per < energy_per_antenna * (1.0 - 1e-12))
    throw std::invalid_argument(
        "IsacProblem: peak cap is below the average power it must carry");
}

double effective_energy_per_antenna(const GridConfig& grid, double energy_total) {
  grid.validate();
  if (!(energy_total > 0.0))
    throw std::invalid_argument("effective_energy_per_antenna: energy_total must be > 0");
  const double cp_less = energy_total * grid.n_sub / (grid.n_sub + grid.n_cp);
  return cp_less / grid.n_tx;
}

double derive_eps(double papr_max_db, const GridConfig& grid, SamplingMode mode,
                  double energy_total) {
  if (papr_max_db < 0.0)
    throw std::invalid_argument("derive_eps: a PAPR cap below 0 dB is infeasible");
  const double ea = effective_energy_per_antenna(grid, energy_total);
  return std::pow(10.0, papr_max_db / 10.0) * ea / grid.sub_count(mode);
}

IsacProblem make_isac_problem(const ChannelRealization& ch, const CVec& s_d,
                              const CVec& s0, double rho, double papr_max_db,
                              double energy_total, const GridConfig& grid,
                              SamplingMode mode) {
  IsacProblem p;
  p.grid = grid;
  p.mode = mode;
  p.h_hat = effective_dense(ch, grid, mode);
  p.s_d = s_d;
  p.s0 = s0;
  p.rho = rho;
  p.energy_per_antenna = effective_energy_per_antenna(grid, energy_total);
  p.eps = derive_eps(papr_max_db, grid, mode, energy_total);
  p.validate();
  return p;
}

CVec update_y(const CVec& s, const CVec& lambda, double eps) {
  if (s.size() != lambda.size())
    throw std::invalid_argument("update_y: size mismatch");
  const double cap = std::sqrt(eps);
  CVec t = s - lambda;
  for (Eigen::Index i = 0; i < t.size(); ++i) {
    const double m = std::abs(t[i]);
    if (m > cap) t[i] *= cap / m;
  }
  return t;
}

CVec update_v(const CVec& s, const CVec& mu, const GridConfig& grid,
              SamplingMode mode, double energy_per_antenna) {
  if (s.size() != mu.size()) throw std::invalid_argument("update_v: size mismatch");
  if (s.size() != grid.time_len(mode))
    throw std::invalid_argument("update_v: vector does not match the grid");
  const int nt = grid.n_tx;
  const int per = grid.sub_count(mode);
  CVec t = s - mu;
  for (int l = 0; l < nt; ++l) {
    double e = 0.0;
    for (int i = 0; i < per; ++i) e += std::norm(t[static_cast<Eigen::Index>(i) * nt + l]);
    if (e > 0.0) {
      const double sc = std::sqrt(energy_per_antenna / e);
      for (int i = 0; i < per; ++i) t[static_cast<Eigen::Index>(i) * nt + l] *= sc;
    } else {
      // Every point of the sphere is equally close to the origin; pick the
      // equal-phase point so the update stays deterministic.
      const double fill = std::sqrt(energy_per_antenna / per);
      for (int i = 0; i < per; ++i) t[static_cast<Eigen::Index>(i) * nt + l] = fill;
    }
  }
  return t;
}

namespace {

// Largest eigenvalue of a Hermitian PSD operator by power iteration with a
// fixed pseudo-random start. Rayleigh quotients of a Hermitian matrix are
// real, so the imaginary part is dropped.
double top_eigenvalue(const std::function<CVec(const CVec&)>& apply, Eigen::Index n) {
  Rng rng(0x1d872b41u);
  CVec x(n);
  for (Eigen::Index i = 0; i < n; ++i) x[i] = rng.cnormal();
  x /= x.norm();
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    CVec y = apply(x);
    const double rayleigh = x.dot(y).real();
    const double ny = y.norm();
    if (ny == 0.0) return 0.0;
    x = y / ny;
    if (it > 0 && std::abs(rayleigh - lambda) <= 1e-13 * std::max(1.0, std::abs(rayleigh))) {
      return rayleigh;
    }
    lambda = rayleigh;
  }
  return lambda;
}

}  // namespace

EtaBound eta_bound(const IsacProblem& p, double alpha, double eps_prop) {
  p.validate();
  if (!(alpha > 0.0) || !(eps_prop > 0.0))
    throw std::invalid_argument("eta_bound: alpha and eps_prop must be > 0");
  const double c = p.comm_scale();
  const double r = p.radar_scale();
  const CMat& h = p.h_hat;

  const auto gram = [&](const CVec& x) -> CVec { return c * (h.adjoint() * (h * x)) + r * x; };

  EtaBound out;
  out.l_max = top_eigenvalue(gram, p.dim());
  if (h.rows() < h.cols()) {
    // Wide channel: the Gram matrix of h is rank deficient, so the smallest
    // eigenvalue is exactly the regularization weight.
    out.l_min = r;
  } else {
    const double shift = out.l_max;
    const auto flipped = [&](const CVec& x) -> CVec { return shift * x - gram(x); };
    out.l_min = shift - top_eigenvalue(flipped, p.dim());
  }
  out.l_min = std::max(out.l_min, 0.0);

  if (out.l_min <= 1e-12 * std::max(1.0, out.l_max)) {
    out.degenerate = true;
    out.bound = std::numeric_limits<double>::infinity();
  } else {
    out.bound = alpha * alpha * out.l_max * out.l_max / (eps_prop * eps_prop * out.l_min);
  }
  return out;
}

bool ConvergenceTrace::lagrangian_monotone(double rel_slack) const {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    // The start snapshot predates any dual movement, so the descent guarantee
    // begins with the first generated iterate.
    if (rows[i - 1].iter == 0) continue;
    const double prev = rows[i - 1].lagrangian;
    const double slack = rel_slack * std::max(1.0, std::abs(prev));
    if (rows[i].lagrangian > prev + slack) return false;
  }
  return true;
}

AdmmResult run_admm(const IsacProblem& p, const AdmmOptions& opts) {
  p.validate();
  if (opts.tol < 0.0) throw std::invalid_argument("run_admm: tol must be >= 0");
  if (opts.max_iters < 1) throw std::invalid_argument("run_admm: max_iters must be >= 1");

  const Eigen::Index n = p.dim();
  const double c = p.comm_scale();
  const double r = p.radar_scale();

  AdmmResult res;
  res.bound = eta_bound(p, opts.alpha, opts.eps_prop);
  double eta = opts.eta;
  if (eta <= 0.0) {
    const double suggested =
        res.bound.degenerate ? 1e3 : std::min(res.bound.bound, 1e6);
    eta = std::max(1.0, suggested);
  }
  res.eta = eta;

  // One factorization serves every iteration: the quadratic form is constant.
  CMat a = c * (p.h_hat.adjoint() * p.h_hat);
  a.diagonal().array() += r + eta;
  Eigen::LLT<CMat> llt(a);
  if (llt.info() != Eigen::Success)
    throw std::runtime_error("run_admm: factorization of the normal matrix failed");

  CVec s;
  switch (opts.init) {
    case AdmmInit::kZero:
      s = CVec::Zero(n);
      break;
    case AdmmInit::kRadar:
      s = p.s0;
      break;
    case AdmmInit::kComm:
      // Least-norm interpolator of the symbols, the communication-optimal
      // corner of the trade-off.
      s = p.h_hat.completeOrthogonalDecomposition().solve(p.s_d);
      break;
    case AdmmInit::kCustom:
      if (opts.custom_init.size() != n)
        throw std::invalid_argument("run_admm: custom init does not match the grid");
      s = opts.custom_init;
      break;
  }

  CVec y = s;
  CVec v = s;
  CVec lambda = CVec::Zero(n);
  CVec mu = CVec::Zero(n);

  const CVec b_const = c * (p.h_hat.adjoint() * p.s_d) + r * p.s0;
  const double sqrt_n = std::sqrt(static_cast<double>(n));

  const auto record = [&](int iter, double dual_delta_sq, double s_delta_sq,
                          double lower_bound) {
    TraceRow row;
    row.iter = iter;
    const CVec ce = p.h_hat * s - p.s_d;
    row.comm_term = c * ce.squaredNorm();
    row.radar_term = r * (s - p.s0).squaredNorm();
    row.objective = row.comm_term + row.radar_term;
    row.lagrangian = row.objective +
                     0.5 * eta * ((y - s + lambda).squaredNorm() - lambda.squaredNorm()) +
                     0.5 * eta * ((v - s + mu).squaredNorm() - mu.squaredNorm());
    row.res_y = (y - s).norm() / sqrt_n;
    row.res_v = (v - s).norm() / sqrt_n;
    const CVec grad = 2.0 * c * (p.h_hat.adjoint() * ce) + 2.0 * r * (s - p.s0);
    row.stationarity =
        (grad - eta * (lambda + mu)).norm() / std::max(1.0, grad.norm());
    row.dual_delta_sq = dual_delta_sq;
    row.s_delta_sq = s_delta_sq;
    row.lower_bound = lower_bound;
    res.trace.rows.push_back(row);
  };

  record(0, 0.0, 0.0, 0.0);

  for (int k = 1; k <= opts.max_iters; ++k) {
    y = update_y(s, lambda, p.eps);
    v = update_v(s, mu, p.grid, p.mode, p.energy_per_antenna);

    const CVec b = b_const + 0.5 * eta * (y + lambda + v + mu);
    const CVec s_new = llt.solve(b);

    const CVec dl = y - s_new;
    const CVec dm = v - s_new;
    lambda += dl;
    mu += dm;

    const double s_delta_sq = (s_new - s).squaredNorm();
    s = s_new;

    const double dual_delta_sq = dl.squaredNorm() + dm.squaredNorm();
    const double lower_bound = eta * (lambda.dot(dl).real() + mu.dot(dm).real());
    record(k, dual_delta_sq, s_delta_sq, lower_bound);

    res.iterations = k;
    const double res_y = res.trace.rows.back().res_y;
    const double res_v = res.trace.rows.back().res_v;
    if (std::max(res_y, res_v) < opts.tol) {
      res.converged = true;
      break;
    }
  }

  res.s_raw = s;
  res.s = finalize_feasible(s, p.grid, p.mode, p.eps, p.energy_per_antenna);
  return res;
}

CVec finalize_feasible(const CVec& s, const GridConfig& grid, SamplingMode mode,
                       double eps, double energy_per_antenna) {
  if (s.size() != grid.time_len(mode))
    throw std::invalid_argument("finalize_feasible: vector does not match the grid");
  if (!(eps > 0.0) || !(energy_per_antenna > 0.0))
    throw std::invalid_argument("finalize_feasible: eps and energy must be > 0");
  const int nt = grid.n_tx;
  const int per = grid.sub_count(mode);
  if (eps * per < energy_per_antenna * (1.0 - 1e-12))
    throw std::invalid_argument("finalize_feasible: constraint sets are disjoint");

  const double cap = std::sqrt(eps);
  CVec t = s;
  // Alternate cap clipping with per-antenna rescaling. Clipping only removes
  // energy, rescaling restores it with a factor that shrinks toward one, so
  // the loop settles geometrically. The rescale runs last, which makes the
  // energy equality exact; the cap then holds within the final factor's
  // deviation from one.
  for (int pass = 0; pass < 500; ++pass) {
    for (Eigen::Index i = 0; i < t.size(); ++i) {
      const double m = std::abs(t[i]);
      if (m > cap) t[i] *= cap / m;
    }
    double worst = 0.0;
    for (int l = 0; l < nt; ++l) {
      double e = 0.0;
      for (int i = 0; i < per; ++i) e += std::norm(t[static_cast<Eigen::Index>(i) * nt + l]);
      if (e > 0.0) {
        const double sc = std::sqrt(energy_per_antenna / e);
        worst = std::max(worst, std::abs(sc - 1.0));
        for (int i = 0; i < per; ++i) t[static_cast<Eigen::Index>(i) * nt + l] *= sc;
      } else {
        const double fill = std::sqrt(energy_per_antenna / per);
        for (int i = 0; i < per; ++i) t[static_cast<Eigen::Index>(i) * nt + l] = fill;
        worst = std::max(worst, 1.0);
      }
    }
    if (worst <= 5e-8) break;
  }
  return t;
}

}  // namespace isacwave
