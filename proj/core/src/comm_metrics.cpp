// SPDX-License-Identifier: Apache-2.0
#include "isacwave/comm_metrics.hpp"

#include <cmath>
#include <stdexcept>

#include "isacwave/operators.hpp"
#include "isacwave/rng.hpp"

namespace isacwave {

const std::array<cplx, 4>& qpsk_constellation() {
  static const double h = 0.70710678118654752440;
  static const std::array<cplx, 4> table = {cplx(h, h), cplx(h, -h), cplx(-h, h),
                                            cplx(-h, -h)};
  return table;
}

CVec qpsk_modulate(const std::vector<std::uint8_t>& bits) {
  if (bits.size() % 2 != 0)
    throw std::invalid_argument("qpsk_modulate: odd bit count");
  const auto& table = qpsk_constellation();
  CVec out(static_cast<Eigen::Index>(bits.size() / 2));
  for (std::size_t i = 0; i < bits.size(); i += 2) {
    const int idx = ((bits[i] & 1) << 1) | (bits[i + 1] & 1);
    out[static_cast<Eigen::Index>(i / 2)] = table[static_cast<std::size_t>(idx)];
  }
  return out;
}

Eigen::VectorXi qpsk_detect_index(const CVec& y) {
  Eigen::VectorXi idx(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const int b0 = y[i].real() < 0.0 ? 1 : 0;
    const int b1 = y[i].imag() < 0.0 ? 1 : 0;
    idx[i] = (b0 << 1) | b1;
  }
  return idx;
}

CVec qpsk_detect(const CVec& y) {
  const auto& table = qpsk_constellation();
  const Eigen::VectorXi idx = qpsk_detect_index(y);
  CVec out(y.size());
  for (Eigen::Index i = 0; i < y.size(); ++i)
    out[i] = table[static_cast<std::size_t>(idx[i])];
  return out;
}

CVec random_qpsk(Eigen::Index n, std::uint64_t seed) {
  const auto& table = qpsk_constellation();
  Rng rng(seed);
  CVec out(n);
  for (Eigen::Index i = 0; i < n; ++i)
    out[i] = table[static_cast<std::size_t>(rng.next_u64() & 3)];
  return out;
}

double mui_energy(const ChannelRealization& ch, const CVec& x, const CVec& s_d) {
  const CVec y = channel_apply(ch, x);
  if (y.size() != s_d.size())
    throw std::invalid_argument("mui_energy: s_d has wrong length");
  return (y - s_d).squaredNorm();
}

namespace {
PaprReport papr_of_samples(const CVec& s, int n_tx) {
  const Eigen::Index blocks = s.size() / n_tx;
  PaprReport report;
  report.per_antenna = RVec(n_tx);
  double worst = 0.0;
  for (int l = 0; l < n_tx; ++l) {
    double peak = 0.0;
    double energy = 0.0;
    for (Eigen::Index b = 0; b < blocks; ++b) {
      const double p = std::norm(s[b * n_tx + l]);
      peak = std::max(peak, p);
      energy += p;
    }
    if (energy == 0.0) throw std::domain_error("papr: antenna silent");
    const double ratio = peak / (energy / static_cast<double>(blocks));
    report.per_antenna[l] = ratio;
    worst = std::max(worst, ratio);
  }
  report.max_db = 10.0 * std::log10(worst);
  return report;
}
}  // namespace

PaprReport papr(const CVec& x, const GridConfig& grid, SamplingMode mode) {
  return papr_of_samples(to_time_domain(x, grid, mode), grid.n_tx);
}

PaprReport papr_of_time(const CVec& s, const GridConfig& grid) {
  grid.mode_of(s.size());  // validates the length
  return papr_of_samples(s, grid.n_tx);
}

double empirical_ser(const ChannelRealization& ch, const CVec& x, const CVec& s_d,
                     double noise_std, int n_trials, std::uint64_t seed) {
  if (n_trials < 1) throw std::invalid_argument("empirical_ser: n_trials must be >= 1");
  const CVec base = channel_apply(ch, x);
  if (base.size() != s_d.size())
    throw std::invalid_argument("empirical_ser: s_d has wrong length");
  const Eigen::VectorXi truth = qpsk_detect_index(s_d);
  // The reference symbols must be actual constellation points, otherwise the
  // error count would measure quantization instead of noise.
  const CVec snapped = qpsk_detect(s_d);
  if ((snapped - s_d).lpNorm<Eigen::Infinity>() > 1e-12)
    throw std::invalid_argument("empirical_ser: s_d is not a QPSK symbol vector");

  std::int64_t errors = 0;
  for (int t = 0; t < n_trials; ++t) {
    const CVec y = base + awgn(base.size(), noise_std, derive_seed(seed, "ser-trial",
                                                                   static_cast<std::uint64_t>(t)));
    const Eigen::VectorXi detected = qpsk_detect_index(y);
    for (Eigen::Index i = 0; i < detected.size(); ++i)
      if (detected[i] != truth[i]) ++errors;
  }
  return static_cast<double>(errors) /
         (static_cast<double>(n_trials) * static_cast<double>(s_d.size()));
}

double sum_rate(const ChannelRealization& ch, const CVec& x, const CVec& s_d,
                double noise_std) {
  const CVec y = channel_apply(ch, x);
  if (y.size() != s_d.size())
    throw std::invalid_argument("sum_rate: s_d has wrong length");
  const double n0 = noise_std * noise_std;
  double rate = 0.0;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    const double interference = std::norm(y[i] - s_d[i]);
    rate += std::log2(1.0 + std::norm(s_d[i]) / (interference + n0));
  }
  return rate / static_cast<double>(ch.n_sub());
}

}  // namespace isacwave
