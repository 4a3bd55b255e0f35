// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0
//
// Command-line front end: four experiment subcommands sharing one option
// set. Settings come from an optional config file; individual flags
// override it; the resolved configuration is echoed into the CSV header.

#include <CLI11.hpp>
#include <fstream>
#include <iostream>

#include "sgmcmc/errors.hpp"
#include "sgmcmc/experiments.hpp"

namespace {

struct CliOverrides {
  std::string config_path;
  std::string out_path;
  std::uint64_t seed = 0;
  std::uint64_t replicates = 0;
  std::vector<std::uint64_t> taus;
  std::vector<std::uint64_t> workers;
  std::vector<std::uint64_t> servers;
  double step_size = -1.0;
  std::uint64_t iterations = 0;

  bool has_seed = false, has_replicates = false, has_iterations = false;
};

void add_common_options(CLI::App* cmd, CliOverrides& o) {
  cmd->add_option("--config", o.config_path,
                  "Experiment config file (INI-style sections)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--out", o.out_path, "Output CSV path");
  cmd->add_option("--seed", o.seed, "Base seed (replicate r uses seed + r)")
      ->each([&o](const std::string&) { o.has_seed = true; });
  cmd->add_option("--replicates", o.replicates, "Number of replicated runs")
      ->each([&o](const std::string&) { o.has_replicates = true; });
  cmd->add_option("--tau", o.taus, "Staleness list (comma separated)")
      ->delimiter(',');
  cmd->add_option("--workers", o.workers, "Worker-count list")->delimiter(',');
  cmd->add_option("--servers", o.servers, "Server-count list")->delimiter(',');
  cmd->add_option("--step-size", o.step_size, "Kernel step size h");
  cmd->add_option("--iterations", o.iterations,
                  "Iteration budget (L0 for synth-mse, per-worker otherwise)")
      ->each([&o](const std::string&) { o.has_iterations = true; });
}

int run(sgmcmc::ExperimentKind kind, const CliOverrides& o) {
  sgmcmc::ExperimentConfig cfg;
  if (!o.config_path.empty()) {
    cfg = sgmcmc::parse_config(o.config_path);
    if (cfg.experiment != kind) {
      throw sgmcmc::ConfigError("config file is for '" +
                                sgmcmc::to_string(cfg.experiment) +
                                "' but the '" + sgmcmc::to_string(kind) +
                                "' subcommand was invoked");
    }
  } else {
    cfg.experiment = kind;
  }

  if (!o.out_path.empty()) cfg.output = o.out_path;
  if (o.has_seed) cfg.base_seed = o.seed;
  if (o.has_replicates) cfg.replicates = o.replicates;
  if (!o.taus.empty()) cfg.taus = o.taus;
  if (!o.workers.empty()) cfg.workers = o.workers;
  if (!o.servers.empty()) cfg.servers = o.servers;
  if (o.step_size >= 0.0) cfg.step_size = o.step_size;
  if (o.has_iterations) cfg.iterations = o.iterations;
  if (cfg.output.empty()) cfg.output = sgmcmc::to_string(kind) + ".csv";
  cfg.validate();

  sgmcmc::ChainConfig probe;
  probe.kernel = cfg.kernel;
  probe.step_size = cfg.step_size > 0.0 ? cfg.step_size : 1.0;
  probe.friction = cfg.friction;
  for (const std::string& w : probe.warnings()) {
    std::cerr << "warning: " << w << '\n';
  }

  std::ofstream out(cfg.output);
  if (!out) {
    throw sgmcmc::ConfigError("cannot open output file: " + cfg.output);
  }
  sgmcmc::run_experiment(cfg, out);
  out.flush();
  if (!out) throw sgmcmc::ConfigError("write failed: " + cfg.output);
  std::cerr << "wrote " << cfg.output << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Stale-gradient SG-MCMC experiments: stochastic-gradient MCMC kernels "
      "driven by a deterministic asynchronous parameter-server simulation"};
  app.require_subcommand(1);

  struct Sub {
    sgmcmc::ExperimentKind kind;
    CLI::App* cmd;
    CliOverrides opts;
  };
  std::vector<Sub> subs;
  subs.push_back({sgmcmc::ExperimentKind::kSynthMse,
                  app.add_subcommand("synth-mse",
                                     "MSE of the theta^2 estimator vs "
                                     "staleness on the conjugate Gaussian model"),
                  {}});
  subs.push_back({sgmcmc::ExperimentKind::kVarianceSpeedup,
                  app.add_subcommand("variance-speedup",
                                     "Estimator variance vs per-worker "
                                     "iterations and speedup over worker counts"),
                  {}});
  subs.push_back({sgmcmc::ExperimentKind::kMultiChain,
                  app.add_subcommand("multichain",
                                     "Variance of the time-weighted aggregate "
                                     "across independent servers"),
                  {}});
  subs.push_back({sgmcmc::ExperimentKind::kBlrLoss,
                  app.add_subcommand("blr",
                                     "Held-out logistic loss for Bayesian "
                                     "logistic regression (LIBSVM data)"),
                  {}});
  for (auto& sub : subs) add_common_options(sub.cmd, sub.opts);

  CLI11_PARSE(app, argc, argv);

  try {
    for (const auto& sub : subs) {
      if (sub.cmd->parsed()) return run(sub.kind, sub.opts);
    }
    std::cerr << "error: no subcommand selected\n";
    return 2;
  } catch (const sgmcmc::Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
