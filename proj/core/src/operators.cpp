// SPDX-License-Identifier: Apache-2.0
#include "isacwave/operators.hpp"

#include <cmath>
#include <stdexcept>

namespace isacwave {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;

// Dense-grid frequency index carried by row i of the folded analysis matrix.
int folded_row_freq(int i, int n_sub, int os_rate) {
  return i < n_sub / 2 ? i : (os_rate - 1) * n_sub + i;
}
}  // namespace

void GridConfig::validate() const {
  if (n_tx < 1) throw std::invalid_argument("GridConfig: n_tx must be >= 1");
  if (n_sub < 2 || n_sub % 2 != 0)
    throw std::invalid_argument("GridConfig: n_sub must be even and >= 2");
  if (n_cp < 0 || n_cp > n_sub)
    throw std::invalid_argument("GridConfig: n_cp must lie in [0, n_sub]");
  if (os_rate < 1) throw std::invalid_argument("GridConfig: os_rate must be >= 1");
}

SamplingMode GridConfig::mode_of(Eigen::Index len) const {
  if (len == time_len(SamplingMode::kNyquist)) return SamplingMode::kNyquist;
  if (len == time_len(SamplingMode::kOversampled)) return SamplingMode::kOversampled;
  throw std::invalid_argument("GridConfig: vector length matches neither sampling grid");
}

CMat dft_matrix(int n) {
  if (n < 1) throw std::invalid_argument("dft_matrix: n must be >= 1");
  CMat f(n, n);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) {
      const double phase = -kTwoPi * static_cast<double>(r) * static_cast<double>(c) / n;
      f(r, c) = scale * cplx(std::cos(phase), std::sin(phase));
    }
  }
  return f;
}

CVec interpolate_oversample(const CVec& x, const GridConfig& grid) {
  grid.validate();
  if (x.size() != grid.freq_len())
    throw std::invalid_argument("interpolate_oversample: x has wrong length");
  const int nt = grid.n_tx;
  const int half = grid.n_sub / 2 * nt;
  CVec out = CVec::Zero(static_cast<Eigen::Index>(grid.n_sub) * grid.os_rate * nt);
  out.head(half) = x.head(half);
  out.tail(half) = x.tail(half);
  return out;
}

CMat folded_dft_matrix(const GridConfig& grid) {
  grid.validate();
  const int n = grid.n_sub;
  const int cols = n * grid.os_rate;
  CMat f(n, cols);
  const double scale = 1.0 / std::sqrt(static_cast<double>(cols));
  for (int i = 0; i < n; ++i) {
    const int freq = folded_row_freq(i, n, grid.os_rate);
    for (int c = 0; c < cols; ++c) {
      const double phase = -kTwoPi * static_cast<double>(freq) * static_cast<double>(c) / cols;
      f(i, c) = scale * cplx(std::cos(phase), std::sin(phase));
    }
  }
  return f;
}

CMat analysis_matrix(const GridConfig& grid, SamplingMode mode) {
  return mode == SamplingMode::kNyquist ? dft_matrix(grid.n_sub)
                                        : folded_dft_matrix(grid);
}

CVec to_time_domain(const CVec& x, const GridConfig& grid, SamplingMode mode) {
  grid.validate();
  if (x.size() != grid.freq_len())
    throw std::invalid_argument("to_time_domain: x has wrong length");
  const int nt = grid.n_tx;
  const CMat fa = analysis_matrix(grid, mode);
  // s = (F^H (x) I) x; with X = reshape(x, nt x n_sub) this is S = X conj(F).
  Eigen::Map<const CMat> xm(x.data(), nt, grid.n_sub);
  CMat sm = xm * fa.conjugate();
  return Eigen::Map<CVec>(sm.data(), sm.size());
}

CVec to_freq_domain(const CVec& s, const GridConfig& grid) {
  grid.validate();
  const SamplingMode mode = grid.mode_of(s.size());
  const int nt = grid.n_tx;
  const CMat fa = analysis_matrix(grid, mode);
  Eigen::Map<const CMat> sm(s.data(), nt, grid.sub_count(mode));
  CMat xm = sm * fa.transpose();
  return Eigen::Map<CVec>(xm.data(), xm.size());
}

CVec add_cp(const CVec& s, const GridConfig& grid) {
  grid.validate();
  const SamplingMode mode = grid.mode_of(s.size());
  const Eigen::Index cp = static_cast<Eigen::Index>(grid.cp_count(mode)) * grid.n_tx;
  CVec out(s.size() + cp);
  out.head(cp) = s.tail(cp);
  out.tail(s.size()) = s;
  return out;
}

CVec antenna_select(const CVec& v, int antenna, int n_tx) {
  if (n_tx < 1 || v.size() % n_tx != 0)
    throw std::invalid_argument("antenna_select: length not a multiple of n_tx");
  if (antenna < 0 || antenna >= n_tx)
    throw std::invalid_argument("antenna_select: antenna index out of range");
  const Eigen::Index blocks = v.size() / n_tx;
  CVec out(blocks);
  for (Eigen::Index b = 0; b < blocks; ++b) out[b] = v[b * n_tx + antenna];
  return out;
}

CVec steering_vector(double theta, int n_tx) {
  if (n_tx < 1) throw std::invalid_argument("steering_vector: n_tx must be >= 1");
  CVec a(n_tx);
  const double s = std::sin(theta);
  for (int n = 1; n <= n_tx; ++n) {
    const double phase = (static_cast<double>(n) - n_tx / 2.0) * M_PI * s;
    a[n - 1] = cplx(std::cos(phase), std::sin(phase));
  }
  return a;
}

CVec delay_doppler_apply(const CVec& v, int k, double f) {
  const Eigen::Index n = v.size();
  CVec out = CVec::Zero(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::Index src = i - k;
    if (src < 0 || src >= n) continue;
    const double phase = kTwoPi * f * static_cast<double>(src + 1);
    out[i] = cplx(std::cos(phase), std::sin(phase)) * v[src];
  }
  return out;
}

DirectionOperator::DirectionOperator(double theta, const GridConfig& grid,
                                     SamplingMode mode)
    : steer_(steering_vector(theta, grid.n_tx)),
      theta_(theta),
      n_tx_(grid.n_tx),
      n_blocks_(grid.sub_count(mode)),
      n_cp_(grid.cp_count(mode)) {
  grid.validate();
}

CVec DirectionOperator::apply(const CVec& s) const {
  if (s.size() != static_cast<Eigen::Index>(n_blocks_) * n_tx_)
    throw std::invalid_argument("DirectionOperator::apply: wrong vector length");
  CVec w(frame_count());
  const auto block_dot = [&](int b) {
    cplx acc(0.0, 0.0);
    const Eigen::Index off = static_cast<Eigen::Index>(b) * n_tx_;
    for (int l = 0; l < n_tx_; ++l) acc += steer_[l] * s[off + l];
    return acc;
  };
  for (int i = 0; i < n_cp_; ++i) w[i] = block_dot(n_blocks_ - n_cp_ + i);
  for (int i = 0; i < n_blocks_; ++i) w[n_cp_ + i] = block_dot(i);
  return w;
}

CVec DirectionOperator::adjoint(const CVec& w) const {
  if (w.size() != frame_count())
    throw std::invalid_argument("DirectionOperator::adjoint: wrong vector length");
  CVec out = CVec::Zero(static_cast<Eigen::Index>(n_blocks_) * n_tx_);
  const CVec steer_conj = steer_.conjugate();
  const auto scatter = [&](int b, cplx coeff) {
    const Eigen::Index off = static_cast<Eigen::Index>(b) * n_tx_;
    for (int l = 0; l < n_tx_; ++l) out[off + l] += coeff * steer_conj[l];
  };
  for (int i = 0; i < n_cp_; ++i) scatter(n_blocks_ - n_cp_ + i, w[i]);
  for (int i = 0; i < n_blocks_; ++i) scatter(i, w[n_cp_ + i]);
  return out;
}

CMat DirectionOperator::dense() const {
  CMat g = CMat::Zero(frame_count(), time_len());
  const auto fill_row = [&](int row, int b) {
    const Eigen::Index off = static_cast<Eigen::Index>(b) * n_tx_;
    for (int l = 0; l < n_tx_; ++l) g(row, off + l) = steer_[l];
  };
  for (int i = 0; i < n_cp_; ++i) fill_row(i, n_blocks_ - n_cp_ + i);
  for (int i = 0; i < n_blocks_; ++i) fill_row(n_cp_ + i, i);
  return g;
}

}  // namespace isacwave
