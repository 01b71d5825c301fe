// SPDX-License-Identifier: Apache-2.0
#include "isacwave/lbfgs.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

namespace isacwave {

namespace {
struct Pair {
  RVec s, y;
  double rho;  // 1 / s'y
};
}  // namespace

LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, RVec init, const LbfgsConfig& cfg) {
  if (cfg.memory < 1 || cfg.max_iters < 1 || !(cfg.backtrack > 0.0) ||
      !(cfg.backtrack < 1.0) || !(cfg.armijo_c1 > 0.0) || !(cfg.armijo_c1 < 1.0))
    throw std::invalid_argument("lbfgs_minimize: bad configuration");

  LbfgsResult res;
  res.x = std::move(init);
  RVec grad(res.x.size());
  res.objective = fn(res.x, &grad);
  if (!std::isfinite(res.objective))
    throw std::domain_error("lbfgs_minimize: objective not finite at start point");
  res.trace.push_back(res.objective);

  std::deque<Pair> history;
  RVec q, direction, trial;
  std::vector<double> alpha(static_cast<std::size_t>(cfg.memory));

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    const double gnorm = grad.norm();
    if (gnorm <= cfg.grad_tol) {
      res.converged = true;
      break;
    }

    // Two-loop recursion over the stored curvature pairs.
    q = grad;
    for (std::size_t i = history.size(); i-- > 0;) {
      alpha[i] = history[i].rho * history[i].s.dot(q);
      q -= alpha[i] * history[i].y;
    }
    if (!history.empty()) {
      const Pair& last = history.back();
      q *= last.s.dot(last.y) / last.y.squaredNorm();
    }
    for (std::size_t i = 0; i < history.size(); ++i) {
      const double beta = history[i].rho * history[i].y.dot(q);
      q += (alpha[i] - beta) * history[i].s;
    }
    direction = -q;

    double slope = grad.dot(direction);
    if (!(slope < 0.0)) {
      direction = -grad;
      slope = -gnorm * gnorm;
    }

    // First step is scaled to unit length; later ones start at the natural
    // quasi-Newton step of 1.
    double step = history.empty() ? std::min(1.0, 1.0 / gnorm) : 1.0;
    double f_trial = 0.0;
    bool accepted = false;
    for (int bt = 0; bt < cfg.max_backtracks; ++bt) {
      trial = res.x + step * direction;
      f_trial = fn(trial, nullptr);
      if (std::isfinite(f_trial) &&
          f_trial <= res.objective + cfg.armijo_c1 * step * slope) {
        accepted = true;
        break;
      }
      step *= cfg.backtrack;
    }
    if (!accepted) {
      res.stalled = true;
      break;
    }

    RVec grad_new(res.x.size());
    const double f_new = fn(trial, &grad_new);

    Pair pair;
    pair.s = trial - res.x;
    pair.y = grad_new - grad;
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-12 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      history.push_back(std::move(pair));
      if (static_cast<int>(history.size()) > cfg.memory) history.pop_front();
    }

    res.x = std::move(trial);
    trial = RVec();
    res.objective = f_new;
    grad = std::move(grad_new);
    res.trace.push_back(res.objective);
    res.iterations = iter + 1;
  }

  if (!res.converged && !res.stalled && grad.norm() <= cfg.grad_tol)
    res.converged = true;
  res.gradient = std::move(grad);
  return res;
}

}  // namespace isacwave
