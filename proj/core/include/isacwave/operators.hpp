// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "isacwave/types.hpp"

namespace isacwave {

// Linear operators tying the frequency-domain precoded symbols to the
// transmitted time-domain frame. Everything here is a pure function of its
// arguments; concurrent calls are safe.
//
// Conventions used throughout:
//   * vectors are antenna interleaved (antenna index fastest),
//   * DFT matrices are unitary (1/sqrt(n) normalization),
//   * angles are radians, measured from array broadside.

// n x n unitary DFT, entry (r, c) = exp(-j 2 pi r c / n) / sqrt(n).
// Covers both the symbol-rate grid (n = n_sub) and the dense grid
// (n = os_rate * n_sub).
CMat dft_matrix(int n);

// Inserts (os_rate - 1) * n_sub zero blocks between the two spectral halves
// of x, mapping it onto the dense frequency grid. Zero insertion only; the
// output has the energy of the input.
CVec interpolate_oversample(const CVec& x, const GridConfig& grid);

// Folded analysis matrix, n_sub x (os_rate * n_sub), with orthonormal rows.
// Row i < n_sub/2 carries dense-grid frequency i, row i >= n_sub/2 carries
// (os_rate - 1) * n_sub + i, so its adjoint applied to x equals the full
// dense-grid IDFT of interpolate_oversample(x). With os_rate = 1 this is
// exactly dft_matrix(n_sub).
CMat folded_dft_matrix(const GridConfig& grid);

// Analysis matrix of the requested mode: dft_matrix(n_sub) at symbol rate,
// folded_dft_matrix on the oversampled grid. x = (analysis (x) I) s.
CMat analysis_matrix(const GridConfig& grid, SamplingMode mode);

// Time-domain synthesis s = (F^H (x) I) x for the requested mode.
CVec to_time_domain(const CVec& x, const GridConfig& grid, SamplingMode mode);

// Inverse of to_time_domain; the mode is recovered from the vector length.
CVec to_freq_domain(const CVec& s, const GridConfig& grid);

// Prepends a copy of the last cp_count(mode) symbol blocks (mode recovered
// from the vector length).
CVec add_cp(const CVec& s, const GridConfig& grid);

// Per-antenna subsequence of an interleaved vector; antenna is zero based.
CVec antenna_select(const CVec& v, int antenna, int n_tx);

// Half-wavelength ULA response: entry n = exp(j (n - n_tx/2) pi sin(theta)),
// n = 1..n_tx. Satisfies a(-theta) = conj(a(theta)) and a(0) = ones.
CVec steering_vector(double theta, int n_tx);

// Delay by k samples (zeros shifted in) after Doppler modulation:
// out[i] = exp(j 2 pi f (i - k)) v[i - k] with one-based indices. Any k is
// accepted; |k| >= length(v) gives the zero vector.
CVec delay_doppler_apply(const CVec& v, int k, double f);

// Virtual direction projector G(theta): cyclic-prefix extension followed by
// contraction of every symbol block with the transmit steering vector
// (transpose, not conjugate). apply() returns the scalar signal radiated
// toward theta over the whole frame (length frame_count); adjoint() is the
// exact adjoint back onto the effective time grid.
class DirectionOperator {
 public:
  DirectionOperator(double theta, const GridConfig& grid, SamplingMode mode);

  CVec apply(const CVec& s) const;
  CVec adjoint(const CVec& w) const;

  // Explicit frame_count x time_len matrix. Test oracle; the apply/adjoint
  // pair is what production paths use.
  CMat dense() const;

  int frame_count() const { return n_blocks_ + n_cp_; }
  int time_len() const { return n_blocks_ * n_tx_; }
  double theta() const { return theta_; }
  const CVec& steer() const { return steer_; }

 private:
  CVec steer_;
  double theta_;
  int n_tx_;
  int n_blocks_;  // effective symbol blocks at this mode's rate
  int n_cp_;      // prefix blocks at this mode's rate
};

}  // namespace isacwave
