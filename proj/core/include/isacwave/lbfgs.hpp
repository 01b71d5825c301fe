// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <functional>
#include <vector>

#include "isacwave/types.hpp"

namespace isacwave {

struct LbfgsConfig {
  int memory = 10;          // curvature pairs kept by the two-loop recursion
  int max_iters = 500;
  double grad_tol = 1e-6;   // stop when ||grad||_2 falls below this
  double armijo_c1 = 1e-4;  // sufficient-decrease constant
  double backtrack = 0.5;   // step shrink factor
  int max_backtracks = 50;
};

struct LbfgsResult {
  RVec x;
  double objective = 0.0;
  RVec gradient;
  int iterations = 0;
  bool converged = false;        // gradient tolerance reached
  bool stalled = false;          // line search failed to make progress
  std::vector<double> trace;     // objective after every accepted step,
                                 // trace[0] is the value at the start point
};

// Objective callback: returns f(x); fills *grad when grad is non-null.
using ObjectiveFn = std::function<double(const RVec& x, RVec* grad)>;

// Limited-memory BFGS with two-loop recursion and Armijo backtracking.
// The objective trace is non-increasing by construction; curvature pairs
// with non-positive s'y are dropped to keep the implicit Hessian positive
// definite, and a non-descent two-loop direction falls back to steepest
// descent for that step.
LbfgsResult lbfgs_minimize(const ObjectiveFn& fn, RVec init, const LbfgsConfig& cfg);

}  // namespace isacwave
