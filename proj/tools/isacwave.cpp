// SPDX-License-Identifier: Apache-2.0
//
// Command line front end. Every subcommand reads an optional JSON config,
// applies flag overrides, runs one experiment, and writes its outputs into
// the configured directory.
//
// Exit codes: 0 success, 2 configuration or input-file error, 3 numerical
// failure during a solve.

#include <cstdint>
#include <functional>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "isacwave/harness.hpp"
#include "isacwave/serialization.hpp"

namespace {

using isacwave::ExperimentConfig;

struct Overrides {
  std::string config_path;
  std::string out_dir;
  std::uint64_t seed = 0;
  bool seed_set = false;
  bool oversample = false;
  double rho = 0.0;
  bool rho_set = false;
  double papr_db = 0.0;
  bool papr_set = false;
  double eta = 0.0;
  bool eta_set = false;
  std::vector<double> rho_list;
  std::vector<double> papr_list;
};

// Options shared by every subcommand. rho/papr flags are added per command
// since the sweeps read them as comma separated lists.
void add_common(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--config", ov.config_path, "JSON experiment config file");
  cmd->add_option("--seed", ov.seed, "master seed override")
      ->each([&ov](const std::string&) { ov.seed_set = true; });
  cmd->add_option("--out", ov.out_dir, "output directory override");
  cmd->add_flag("--oversample", ov.oversample,
                "design and evaluate at the oversampled rate");
  cmd->add_option("--eta", ov.eta, "ADMM penalty override (0 selects automatic)")
      ->each([&ov](const std::string&) { ov.eta_set = true; });
}

void add_rho_scalar(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--rho", ov.rho, "communication weight in [0, 1]")
      ->each([&ov](const std::string&) { ov.rho_set = true; });
}

void add_papr_scalar(CLI::App* cmd, Overrides& ov) {
  cmd->add_option("--papr-db", ov.papr_db, "PAPR cap in dB")
      ->each([&ov](const std::string&) { ov.papr_set = true; });
}

ExperimentConfig load_config(const Overrides& ov) {
  ExperimentConfig cfg;
  if (!ov.config_path.empty())
    cfg = isacwave::config_from_json(isacwave::read_text_file(ov.config_path));
  if (ov.seed_set) cfg.master_seed = ov.seed;
  if (!ov.out_dir.empty()) cfg.output_dir = ov.out_dir;
  if (ov.oversample) cfg.oversample = true;
  if (ov.rho_set) cfg.rho = ov.rho;
  if (ov.papr_set) cfg.papr_db = ov.papr_db;
  if (ov.eta_set) cfg.eta = ov.eta;
  if (!ov.rho_list.empty()) cfg.rho_grid = ov.rho_list;
  if (!ov.papr_list.empty()) cfg.papr_grid_db = ov.papr_list;
  cfg.validate();
  return cfg;
}

std::string num(double v) { return isacwave::CsvWriter::num(v); }

void print_row(const isacwave::ResultRow& row) {
  std::cout << row.experiment;
  if (!row.item.empty()) std::cout << " [" << row.item << "]";
  std::cout << ": mode=" << row.mode;
  if (row.iterations > 0)
    std::cout << " iterations=" << row.iterations
              << " converged=" << (row.converged ? "yes" : "no")
              << " objective=" << num(row.objective);
  std::cout << " mui=" << num(row.mui) << " ser=" << num(row.ser)
            << " islr_db=" << num(row.islr_db)
            << " papr_db=" << num(row.papr_measured_db) << "\n";
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"MIMO-OFDM joint sensing and communication waveform design"};
  app.require_subcommand(1);

  Overrides ov;
  std::string waveform_path;
  std::string channel_path;

  CLI::App* ideal = app.add_subcommand(
      "design-ideal", "Design the radar reference waveform by L-BFGS");
  add_common(ideal, ov);

  CLI::App* isac = app.add_subcommand(
      "design-isac", "Design the PAPR-constrained dual-function waveform by ADMM");
  add_common(isac, ov);
  add_rho_scalar(isac, ov);
  add_papr_scalar(isac, ov);

  CLI::App* eval = app.add_subcommand(
      "evaluate", "Evaluate a stored waveform against a channel");
  add_common(eval, ov);
  add_rho_scalar(eval, ov);
  add_papr_scalar(eval, ov);
  eval->add_option("--waveform", waveform_path, "waveform file (.cwf)")->required();
  eval->add_option("--channel", channel_path,
                   "channel realization JSON (absent samples a fresh one)");

  CLI::App* init_study = app.add_subcommand(
      "init-study", "Run the ADMM from zero, radar, and comm starts");
  add_common(init_study, ov);
  add_rho_scalar(init_study, ov);
  add_papr_scalar(init_study, ov);

  CLI::App* rho_sweep = app.add_subcommand(
      "rho-sweep", "Sweep the communication weight at both sampling rates");
  add_common(rho_sweep, ov);
  rho_sweep->add_option("--rho", ov.rho_list, "comma separated rho grid override")
      ->delimiter(',');
  add_papr_scalar(rho_sweep, ov);

  CLI::App* papr_sweep = app.add_subcommand(
      "papr-sweep", "Sweep the PAPR cap at both sampling rates");
  add_common(papr_sweep, ov);
  add_rho_scalar(papr_sweep, ov);
  papr_sweep->add_option("--papr-db", ov.papr_list,
                         "comma separated PAPR grid override (dB)")
      ->delimiter(',');

  CLI::App* mc = app.add_subcommand(
      "montecarlo", "Average the design metrics over seeded channel draws");
  add_common(mc, ov);
  add_rho_scalar(mc, ov);
  add_papr_scalar(mc, ov);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }

  try {
    const ExperimentConfig cfg = load_config(ov);

    if (app.got_subcommand(ideal)) {
      const auto out = isacwave::run_design_ideal(cfg);
      isacwave::write_design_ideal(cfg, out);
      std::cout << "design-ideal: mode=" << isacwave::mode_name(out.mode)
                << " iterations=" << out.ref.result.iterations
                << " converged=" << (out.ref.result.converged ? "yes" : "no")
                << " objective=" << num(out.ref.result.objective) << "\n";
    } else if (app.got_subcommand(isac)) {
      const auto out = isacwave::run_design_isac(cfg);
      isacwave::write_design_isac(cfg, out);
      print_row(out.point.row);
    } else if (app.got_subcommand(eval)) {
      const isacwave::CwfFile waveform = isacwave::read_cwf(waveform_path);
      std::optional<isacwave::ChannelFile> channel;
      if (!channel_path.empty())
        channel = isacwave::channel_from_json(isacwave::read_text_file(channel_path));
      const auto out = isacwave::run_evaluate(cfg, waveform, channel);
      isacwave::write_evaluate(cfg, out);
      print_row(out.point.row);
    } else if (app.got_subcommand(init_study)) {
      const auto out = isacwave::run_init_study(cfg);
      isacwave::write_init_study(cfg, out);
      for (const auto& run : out.runs) print_row(run.point.row);
    } else if (app.got_subcommand(rho_sweep)) {
      const auto out = isacwave::run_rho_sweep(cfg);
      isacwave::write_rho_sweep(cfg, out);
      for (const auto& p : out.points) print_row(p.row);
    } else if (app.got_subcommand(papr_sweep)) {
      const auto out = isacwave::run_papr_sweep(cfg);
      isacwave::write_papr_sweep(cfg, out);
      for (const auto& p : out.points) print_row(p.row);
    } else if (app.got_subcommand(mc)) {
      const auto out = isacwave::run_montecarlo(cfg);
      isacwave::write_montecarlo(cfg, out);
      for (std::size_t i = 0; i < out.metric_names.size(); ++i)
        std::cout << "montecarlo: " << out.metric_names[i]
                  << " mean=" << num(out.means[i])
                  << " stderr=" << num(out.stderrs[i]) << "\n";
    }
    std::cout << "outputs in " << cfg.output_dir << "\n";
  } catch (const std::invalid_argument& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
