// SPDX-License-Identifier: Apache-2.0
#include "isacwave/channel.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "isacwave/operators.hpp"
#include "isacwave/rng.hpp"

namespace isacwave {

namespace {
constexpr double kTwoPi = 6.283185307179586476925286766559;
}

void ChannelConfig::validate(const GridConfig& grid) const {
  grid.validate();
  if (n_users < 1) throw std::invalid_argument("ChannelConfig: n_users must be >= 1");
  if (n_taps < 1 || n_taps > grid.n_cp + 1)
    throw std::invalid_argument("ChannelConfig: need 1 <= n_taps <= n_cp + 1");
  if (!(rician_k >= 0.0))  // accepts +inf, rejects NaN and negatives
    throw std::invalid_argument("ChannelConfig: rician_k must be >= 0");
  if (static_cast<int>(los_angles.size()) != n_users)
    throw std::invalid_argument("ChannelConfig: need one LOS angle per user");
  if (!tap_powers.empty()) {
    if (static_cast<int>(tap_powers.size()) != n_taps)
      throw std::invalid_argument("ChannelConfig: tap_powers size mismatch");
    double sum = 0.0;
    for (const double p : tap_powers) {
      if (!(p >= 0.0)) throw std::invalid_argument("ChannelConfig: negative tap power");
      sum += p;
    }
    if (std::abs(sum - 1.0) > 1e-9)
      throw std::invalid_argument("ChannelConfig: tap_powers must sum to 1");
  }
}

std::vector<double> ChannelConfig::resolved_tap_powers() const {
  if (!tap_powers.empty()) return tap_powers;
  return std::vector<double>(static_cast<std::size_t>(n_taps), 1.0 / n_taps);
}

ChannelRealization sample_channel(const ChannelConfig& cfg, const GridConfig& grid,
                                  std::uint64_t seed) {
  cfg.validate(grid);
  Rng rng(seed);
  const std::vector<double> powers = cfg.resolved_tap_powers();
  const double k = cfg.rician_k;
  const bool pure_los = std::isinf(k);
  const double los_w = pure_los ? 1.0 : std::sqrt(k / (k + 1.0));
  const double sc_w = pure_los ? 0.0 : std::sqrt(1.0 / (k + 1.0));

  ChannelRealization out;
  out.seed = seed;
  out.taps.reserve(powers.size());
  for (int t = 0; t < cfg.n_taps; ++t) {
    CMat tap(cfg.n_users, grid.n_tx);
    const double amp = std::sqrt(powers[static_cast<std::size_t>(t)]);
    for (int u = 0; u < cfg.n_users; ++u) {
      if (t == 0) {
        const double phi = kTwoPi * rng.uniform();
        const cplx ph(std::cos(phi), std::sin(phi));
        const CVec a = steering_vector(cfg.los_angles[static_cast<std::size_t>(u)], grid.n_tx);
        for (int l = 0; l < grid.n_tx; ++l)
          tap(u, l) = amp * (los_w * ph * a[l] + sc_w * rng.cnormal());
      } else {
        for (int l = 0; l < grid.n_tx; ++l) tap(u, l) = amp * rng.cnormal();
      }
    }
    out.taps.push_back(std::move(tap));
  }
  out.freq_blocks = assemble_freq_response(out.taps, grid.n_sub);
  return out;
}

std::vector<CMat> assemble_freq_response(const std::vector<CMat>& taps, int n_sub) {
  if (taps.empty()) throw std::invalid_argument("assemble_freq_response: no taps");
  std::vector<CMat> blocks;
  blocks.reserve(static_cast<std::size_t>(n_sub));
  for (int n = 0; n < n_sub; ++n) {
    CMat h = CMat::Zero(taps[0].rows(), taps[0].cols());
    for (std::size_t t = 0; t < taps.size(); ++t) {
      const double phase = -kTwoPi * static_cast<double>(t) * n / n_sub;
      h += taps[t] * cplx(std::cos(phase), std::sin(phase));
    }
    blocks.push_back(std::move(h));
  }
  return blocks;
}

CVec channel_apply(const ChannelRealization& ch, const CVec& x) {
  const int n_sub = ch.n_sub();
  const int nt = ch.n_tx();
  const int nu = ch.n_users();
  if (x.size() != static_cast<Eigen::Index>(n_sub) * nt)
    throw std::invalid_argument("channel_apply: x has wrong length");
  CVec y(static_cast<Eigen::Index>(n_sub) * nu);
  for (int n = 0; n < n_sub; ++n)
    y.segment(static_cast<Eigen::Index>(n) * nu, nu) =
        ch.freq_blocks[static_cast<std::size_t>(n)] *
        x.segment(static_cast<Eigen::Index>(n) * nt, nt);
  return y;
}

CVec effective_apply(const ChannelRealization& ch, const CVec& s,
                     const GridConfig& grid, SamplingMode mode) {
  if (s.size() != grid.time_len(mode))
    throw std::invalid_argument("effective_apply: s has wrong length");
  return channel_apply(ch, to_freq_domain(s, grid));
}

CVec effective_adjoint(const ChannelRealization& ch, const CVec& r,
                       const GridConfig& grid, SamplingMode mode) {
  const int n_sub = ch.n_sub();
  const int nt = ch.n_tx();
  const int nu = ch.n_users();
  if (r.size() != static_cast<Eigen::Index>(n_sub) * nu)
    throw std::invalid_argument("effective_adjoint: r has wrong length");
  CVec w(static_cast<Eigen::Index>(n_sub) * nt);
  for (int n = 0; n < n_sub; ++n)
    w.segment(static_cast<Eigen::Index>(n) * nt, nt) =
        ch.freq_blocks[static_cast<std::size_t>(n)].adjoint() *
        r.segment(static_cast<Eigen::Index>(n) * nu, nu);
  // (F_a (x) I)^H w, i.e. synthesis with the analysis matrix conjugated.
  const CMat fa = analysis_matrix(grid, mode);
  Eigen::Map<const CMat> wm(w.data(), nt, n_sub);
  CMat sm = wm * fa.conjugate();
  return Eigen::Map<CVec>(sm.data(), sm.size());
}

CMat effective_dense(const ChannelRealization& ch, const GridConfig& grid,
                     SamplingMode mode) {
  const int n_sub = ch.n_sub();
  const int nt = ch.n_tx();
  const int nu = ch.n_users();
  const CMat fa = analysis_matrix(grid, mode);
  const int cols_t = static_cast<int>(fa.cols());
  CMat d(static_cast<Eigen::Index>(n_sub) * nu, static_cast<Eigen::Index>(cols_t) * nt);
  for (int n = 0; n < n_sub; ++n)
    for (int t = 0; t < cols_t; ++t)
      d.block(static_cast<Eigen::Index>(n) * nu, static_cast<Eigen::Index>(t) * nt, nu, nt) =
          fa(n, t) * ch.freq_blocks[static_cast<std::size_t>(n)];
  return d;
}

CVec awgn(Eigen::Index len, double noise_std, std::uint64_t seed) {
  if (noise_std < 0.0) throw std::invalid_argument("awgn: noise_std must be >= 0");
  Rng rng(seed);
  CVec z(len);
  for (Eigen::Index i = 0; i < len; ++i) z[i] = noise_std * rng.cnormal();
  return z;
}

namespace {

nlohmann::json cmat_to_json(const CMat& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c)
      row.push_back({m(r, c).real(), m(r, c).imag()});
    rows.push_back(std::move(row));
  }
  return rows;
}

CMat cmat_from_json(const nlohmann::json& rows) {
  const Eigen::Index nr = static_cast<Eigen::Index>(rows.size());
  if (nr == 0) throw std::invalid_argument("channel_from_json: empty tap matrix");
  const Eigen::Index nc = static_cast<Eigen::Index>(rows.at(0).size());
  CMat m(nr, nc);
  for (Eigen::Index r = 0; r < nr; ++r) {
    const auto& row = rows.at(static_cast<std::size_t>(r));
    if (static_cast<Eigen::Index>(row.size()) != nc)
      throw std::invalid_argument("channel_from_json: ragged tap matrix");
    for (Eigen::Index c = 0; c < nc; ++c) {
      const auto& e = row.at(static_cast<std::size_t>(c));
      m(r, c) = cplx(e.at(0).get<double>(), e.at(1).get<double>());
    }
  }
  return m;
}

}  // namespace

std::string channel_to_json(const ChannelFile& file) {
  nlohmann::json j;
  j["format"] = "isacwave-channel/1";
  j["grid"] = {{"n_tx", file.grid.n_tx},
               {"n_sub", file.grid.n_sub},
               {"n_cp", file.grid.n_cp},
               {"os_rate", file.grid.os_rate}};
  nlohmann::json cfg;
  cfg["n_users"] = file.config.n_users;
  cfg["n_taps"] = file.config.n_taps;
  // +inf is not representable in JSON; a pure LOS channel stores k as string.
  if (std::isinf(file.config.rician_k))
    cfg["rician_k"] = "inf";
  else
    cfg["rician_k"] = file.config.rician_k;
  cfg["los_angles"] = file.config.los_angles;
  cfg["tap_powers"] = file.config.tap_powers;
  j["config"] = std::move(cfg);
  j["seed"] = file.realization.seed;
  nlohmann::json taps = nlohmann::json::array();
  for (const CMat& t : file.realization.taps) taps.push_back(cmat_to_json(t));
  j["taps"] = std::move(taps);
  return j.dump(2);
}

namespace {
ChannelFile channel_from_parsed(const nlohmann::json& j);
}  // namespace

ChannelFile channel_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("channel parse error: ") + e.what());
  }
  try {
    return channel_from_parsed(j);
  } catch (const nlohmann::json::exception& e) {
    throw std::invalid_argument(std::string("malformed channel file: ") + e.what());
  }
}

namespace {

ChannelFile channel_from_parsed(const nlohmann::json& j) {
  if (j.value("format", "") != "isacwave-channel/1")
    throw std::invalid_argument("channel_from_json: unknown format tag");
  ChannelFile file;
  file.grid.n_tx = j.at("grid").at("n_tx").get<int>();
  file.grid.n_sub = j.at("grid").at("n_sub").get<int>();
  file.grid.n_cp = j.at("grid").at("n_cp").get<int>();
  file.grid.os_rate = j.at("grid").at("os_rate").get<int>();
  const auto& cfg = j.at("config");
  file.config.n_users = cfg.at("n_users").get<int>();
  file.config.n_taps = cfg.at("n_taps").get<int>();
  if (cfg.at("rician_k").is_string())
    file.config.rician_k = std::numeric_limits<double>::infinity();
  else
    file.config.rician_k = cfg.at("rician_k").get<double>();
  file.config.los_angles = cfg.at("los_angles").get<std::vector<double>>();
  file.config.tap_powers = cfg.at("tap_powers").get<std::vector<double>>();
  file.config.validate(file.grid);
  file.realization.seed = j.at("seed").get<std::uint64_t>();
  for (const auto& t : j.at("taps")) file.realization.taps.push_back(cmat_from_json(t));
  if (static_cast<int>(file.realization.taps.size()) != file.config.n_taps)
    throw std::invalid_argument("channel_from_json: tap count mismatch");
  for (const CMat& t : file.realization.taps) {
    if (t.rows() != file.config.n_users || t.cols() != file.grid.n_tx)
      throw std::invalid_argument("channel_from_json: tap dimensions mismatch");
    if (!t.allFinite()) throw std::invalid_argument("channel_from_json: non-finite tap");
  }
  file.realization.freq_blocks =
      assemble_freq_response(file.realization.taps, file.grid.n_sub);
  return file;
}

}  // namespace

}  // namespace isacwave
