// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <iosfwd>
#include <string>

#include "sgmcmc/async_sim.hpp"
#include "sgmcmc/metrics.hpp"
#include "sgmcmc/posterior.hpp"

namespace sgmcmc {

enum class ExperimentKind { kSynthMse, kVarianceSpeedup, kMultiChain, kBlrLoss };

std::string to_string(ExperimentKind kind);
ExperimentKind experiment_kind_from_string(const std::string& name);

//! Full description of one experiment run. Parsed from an INI-style file
//! ([section] headers, key = value lines, '#'/';' comments); every field
//! has a default, so an empty file is a valid starting point.
struct ExperimentConfig {
  // [experiment]
  ExperimentKind experiment = ExperimentKind::kSynthMse;
  std::uint64_t replicates = 200;  //!< R
  std::uint64_t base_seed = 1;     //!< replicate r uses base_seed + r
  std::string output;              //!< CSV path; may be set by --out

  // [model]
  std::string model_kind = "gaussian";  //!< "gaussian" | "blr"
  double theta_true = 0.0;
  std::uint64_t n_data = 1000;
  std::uint64_t data_seed = 42;
  std::string train_path;       //!< blr: LIBSVM file ("" = built-in synthetic)
  std::string test_path;        //!< blr: held-out LIBSVM file
  std::uint64_t n_features = 0; //!< blr: 0 = infer from data
  std::uint64_t subset = 0;     //!< blr: 0 = all, else seeded subsample size

  // [chain]
  KernelKind kernel = KernelKind::kSgld;
  double step_size = 0.0;  //!< 0 in synth-mse = derive from step_constant
  double step_constant = 1.0 / 30.0;  //!< C in h = C tau^(-2/3) L^(-1/3)
  double friction = 1.0;
  std::uint64_t minibatch = 10;
  std::uint64_t iterations = 500;  //!< L0 (synth-mse) or per-worker budget
  std::uint64_t burn_in = 0;
  std::vector<std::uint64_t> taus = {1, 2, 5, 10, 15, 20};
  std::uint64_t staleness_bound = 0;  //!< 0 = auto per experiment

  // [cluster]
  std::vector<std::uint64_t> workers = {1, 2, 4, 8};
  std::vector<std::uint64_t> servers = {1, 2, 4};
  PolicyKind policy = PolicyKind::kRoundRobin;
  std::vector<double> compute_times = {1.0};
  bool exponential_durations = false;
  bool real_threads = false;

  // [output]
  std::uint64_t checkpoints = 50;
  double target_variance = 0.0;  //!< 0 = mid-range target chosen from W=1

  //! Cross-field validation; throws ConfigError with the offending key.
  void validate() const;

  bool operator==(const ExperimentConfig&) const = default;
};

//! Parse + validate a config file. Unknown sections or keys, malformed
//! values, and missing referenced files are reported by name.
ExperimentConfig parse_config(const std::string& path);

//! Same grammar from an in-memory string; origin labels error messages.
ExperimentConfig parse_config_text(const std::string& text,
                                   const std::string& origin = "<config>");

//! Canonical text form: every field, fixed order, lossless numerics.
//! parse_config_text(serialize_config(c)) == c.
std::string serialize_config(const ExperimentConfig& cfg);

//! 64-bit FNV-1a of the canonical serialization, as 16 hex digits. The
//! output path is excluded: it names where results go, not what they are.
std::string config_fingerprint(const ExperimentConfig& cfg);

//! One CSV record. Column order:
//! experiment,fingerprint,kernel,tau,workers,servers,step_size,iterations,
//! replicate,metric,value,sim_time
struct ResultRow {
  std::string experiment;
  std::string fingerprint;
  std::string kernel;
  std::uint64_t tau = 0;
  std::uint64_t workers = 1;
  std::uint64_t servers = 1;
  double step_size = 0.0;
  double iterations = 0.0;   //!< L, per-worker budget, or checkpoint
  std::string replicate;     //!< replicate index or "aggregate"
  std::string metric;
  double value = 0.0;
  double sim_time = 0.0;

  bool operator==(const ResultRow&) const = default;
};

//! Parse rows back from a CSV stream previously written by the commands
//! ('#' comment lines skipped, header validated).
std::vector<ResultRow> read_result_csv(std::istream& in);

//! Dispatch on cfg.experiment and stream the CSV (comments, header,
//! rows). Byte-identical across reruns in simulated mode.
void run_experiment(const ExperimentConfig& cfg, std::ostream& out);

//! Individual experiment drivers (cfg.experiment must match).
void cmd_synth_mse(const ExperimentConfig& cfg, std::ostream& out);
void cmd_variance_speedup(const ExperimentConfig& cfg, std::ostream& out);
void cmd_multichain(const ExperimentConfig& cfg, std::ostream& out);
void cmd_blr(const ExperimentConfig& cfg, std::ostream& out);

//! Train/test pair for BLR experiments: parsed from cfg paths (with the
//! optional seeded subsample applied to the training split) or generated
//! synthetically when no paths are configured.
struct BlrProblem {
  std::shared_ptr<const SparseDataset> train;
  std::shared_ptr<const SparseDataset> test;
};
BlrProblem load_blr_problem(const ExperimentConfig& cfg);

//! Geometric grid of `points` iteration checkpoints in (burn_in, l],
//! deduplicated, ascending, always ending exactly at l.
std::vector<std::uint64_t> checkpoint_grid(std::uint64_t l, std::uint64_t points,
                                           std::uint64_t burn_in);

}  // namespace sgmcmc
