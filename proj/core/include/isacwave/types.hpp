// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Dense>
#include <complex>

namespace isacwave {

using cplx = std::complex<double>;
using CVec = Eigen::VectorXcd;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

// Frequency-domain precoded symbols, antenna interleaved: entry i belongs to
// subcarrier i / n_tx and antenna i % n_tx. Length n_sub * n_tx.
using FreqVector = CVec;

// Time-domain samples in the same antenna-interleaved layout. Effective
// (CP-free) vectors have length sub_count(mode) * n_tx; CP-extended vectors
// gain cp_count(mode) leading blocks.
using TimeVector = CVec;

// Whether a time-domain vector lives on the symbol-rate grid or on the
// oversampled grid (os_rate times denser, band-limited interpolation).
enum class SamplingMode { kNyquist, kOversampled };

// Static dimensions of one MIMO-OFDM frame.
struct GridConfig {
  int n_tx = 8;     // transmit antennas
  int n_sub = 40;   // subcarriers, must be even
  int n_cp = 32;    // cyclic prefix length in symbol-rate samples, <= n_sub
  int os_rate = 2;  // oversampling factor, >= 1

  // Throws std::invalid_argument on inconsistent dimensions.
  void validate() const;

  // Sample blocks per effective symbol period at the given rate.
  int sub_count(SamplingMode m) const {
    return m == SamplingMode::kNyquist ? n_sub : n_sub * os_rate;
  }
  int cp_count(SamplingMode m) const {
    return m == SamplingMode::kNyquist ? n_cp : n_cp * os_rate;
  }
  int frame_count(SamplingMode m) const { return sub_count(m) + cp_count(m); }

  int freq_len() const { return n_sub * n_tx; }
  int time_len(SamplingMode m) const { return sub_count(m) * n_tx; }

  // Recovers the sampling mode of an effective time-domain vector from its
  // length. Throws std::invalid_argument if the length matches neither grid.
  SamplingMode mode_of(Eigen::Index len) const;
};

}  // namespace isacwave
