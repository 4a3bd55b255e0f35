// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgmcmc/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <istream>
#include <memory>
#include <mutex>
#include <ostream>
#include <sstream>
#include <thread>

#include "sgmcmc/errors.hpp"

namespace sgmcmc {

namespace {

constexpr const char* kCsvHeader =
    "experiment,fingerprint,kernel,tau,workers,servers,step_size,iterations,"
    "replicate,metric,value,sim_time";

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

// Run fn(r) for r in [0, total), fanning out across hardware threads.
// Each replicate writes only to its own output slot, so results are
// position-stable no matter how execution interleaves.
void parallel_replicates(std::uint64_t total,
                         const std::function<void(std::uint64_t)>& fn) {
  const unsigned hw = std::thread::hardware_concurrency();
  const std::uint64_t threads =
      std::min<std::uint64_t>(hw == 0 ? 1 : hw, total);
  if (threads <= 1) {
    for (std::uint64_t r = 0; r < total; ++r) fn(r);
    return;
  }
  std::mutex mu;
  std::exception_ptr first_error;  // first error wins
  std::atomic<std::uint64_t> next{0};
  auto worker = [&] {
    for (;;) {
      const std::uint64_t r = next.fetch_add(1);
      if (r >= total) return;
      try {
        fn(r);
      } catch (...) {
        std::lock_guard lock(mu);
        if (!first_error) first_error = std::current_exception();
        return;
      }
    }
  };
  std::vector<std::thread> pool;
  pool.reserve(threads);
  for (std::uint64_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string kernel_name(KernelKind k) {
  return k == KernelKind::kSgld ? "sgld" : "sghmc";
}

void write_row(std::ostream& out, const ResultRow& row) {
  out << row.experiment << ',' << row.fingerprint << ',' << row.kernel << ','
      << row.tau << ',' << row.workers << ',' << row.servers << ','
      << fmt(row.step_size) << ',' << fmt(row.iterations) << ','
      << row.replicate << ',' << row.metric << ',' << fmt(row.value) << ','
      << fmt(row.sim_time) << '\n';
}

// Config echo (every resolved key as a comment) + fixed header row. The
// output path is omitted so the bytes written do not depend on where they
// are written, only on what was computed.
void write_preamble(std::ostream& out, const ExperimentConfig& cfg) {
  ExperimentConfig echoed = cfg;
  echoed.output.clear();
  std::istringstream config(serialize_config(echoed));
  std::string line;
  while (std::getline(config, line)) out << "# " << line << '\n';
  out << kCsvHeader << '\n';
}

ResultRow base_row(const ExperimentConfig& cfg, const std::string& fingerprint) {
  ResultRow row;
  row.experiment = to_string(cfg.experiment);
  row.fingerprint = fingerprint;
  row.kernel = kernel_name(cfg.kernel);
  row.replicate = "aggregate";
  return row;
}

ChainConfig chain_config(const ExperimentConfig& cfg, double step_size,
                         std::uint64_t iterations, std::uint64_t bound,
                         std::uint64_t seed) {
  ChainConfig cc;
  cc.kernel = cfg.kernel;
  cc.step_size = step_size;
  cc.friction = cfg.friction;
  cc.minibatch = cfg.minibatch;
  cc.iterations = iterations;
  cc.burn_in = cfg.burn_in;
  cc.staleness_bound = bound;
  cc.seed = seed;
  return cc;
}

SchedulePolicy schedule_policy(const ExperimentConfig& cfg, std::uint64_t seed) {
  SchedulePolicy p;
  p.kind = cfg.policy;
  p.compute_times = cfg.compute_times;
  p.exponential_durations = cfg.exponential_durations;
  p.seed = seed;
  return p;
}

// Default staleness bound per worker count: round-robin needs exactly
// W-1; jittery policies get headroom so rejections stay rare.
std::uint64_t auto_bound(const ExperimentConfig& cfg, std::uint64_t workers) {
  if (cfg.staleness_bound > 0) return cfg.staleness_bound;
  if (cfg.policy == PolicyKind::kRoundRobin) return workers - 1;
  return 8 * workers;
}

GaussianModel make_gaussian(const ExperimentConfig& cfg) {
  return GaussianModel(
      generate_gaussian_data(cfg.theta_true, cfg.n_data, cfg.data_seed));
}

double variance_of(const std::vector<double>& xs) {
  if (xs.size() < 2) {
    throw ConfigError("variance requires at least 2 replicates");
  }
  double mean = 0.0;
  for (double x : xs) mean += x;
  mean /= static_cast<double>(xs.size());
  double ss = 0.0;
  for (double x : xs) ss += (x - mean) * (x - mean);
  return ss / static_cast<double>(xs.size() - 1);
}

void require_kind(const ExperimentConfig& cfg, ExperimentKind kind) {
  if (cfg.experiment != kind) {
    throw ConfigError("configuration is for '" + to_string(cfg.experiment) +
                      "' but was dispatched to '" + to_string(kind) + "'");
  }
}

}  // namespace

std::vector<std::uint64_t> checkpoint_grid(std::uint64_t l, std::uint64_t points,
                                           std::uint64_t burn_in) {
  if (l == 0) throw ConfigError("checkpoint_grid: l must be >= 1");
  if (points < 2) throw ConfigError("checkpoint_grid: need at least 2 points");
  if (burn_in >= l) throw ConfigError("checkpoint_grid: burn_in >= l");
  const double lo = static_cast<double>(burn_in + 1);
  const double hi = static_cast<double>(l);
  std::vector<std::uint64_t> grid;
  grid.reserve(points);
  for (std::uint64_t i = 0; i < points; ++i) {
    const double t = static_cast<double>(i) / static_cast<double>(points - 1);
    const double c = lo * std::pow(hi / lo, t);
    grid.push_back(static_cast<std::uint64_t>(std::llround(c)));
  }
  grid.back() = l;
  std::sort(grid.begin(), grid.end());
  grid.erase(std::unique(grid.begin(), grid.end()), grid.end());
  return grid;
}

BlrProblem load_blr_problem(const ExperimentConfig& cfg) {
  BlrProblem p;
  if (cfg.train_path.empty()) {
    // Built-in desk-scale synthetic problem; deterministic in data_seed.
    auto synth = generate_blr_data(/*n_train=*/2000, /*n_test=*/1000,
                                   /*n_features=*/123, /*nnz=*/14,
                                   /*coef_scale=*/0.5, cfg.data_seed);
    p.train = std::make_shared<SparseDataset>(std::move(synth.train));
    p.test = std::make_shared<SparseDataset>(std::move(synth.test));
    return p;
  }
  std::optional<std::uint32_t> features;
  if (cfg.n_features > 0) {
    features = static_cast<std::uint32_t>(cfg.n_features);
  }
  SparseDataset train = parse_libsvm(cfg.train_path, features);
  SparseDataset test = parse_libsvm(cfg.test_path, features);
  if (!features) {
    // Align dimensions when inferring from data (train/test max feature
    // indices frequently differ in LIBSVM distributions).
    const std::uint32_t n = std::max(train.n_features, test.n_features);
    train.n_features = n;
    test.n_features = n;
  }
  if (cfg.subset > 0) {
    train = subsample(train, cfg.subset, cfg.data_seed);
  }
  p.train = std::make_shared<SparseDataset>(std::move(train));
  p.test = std::make_shared<SparseDataset>(std::move(test));
  return p;
}

// ---------------------------------------------------------------------------
// synth-mse: MSE of the theta^2 estimator vs iterations, per staleness tau.

void cmd_synth_mse(const ExperimentConfig& cfg, std::ostream& out) {
  require_kind(cfg, ExperimentKind::kSynthMse);
  cfg.validate();

  const GaussianModel model = make_gaussian(cfg);
  const TestFunction phi = TestFunction::theta_squared();
  const double phi_bar = gaussian_posterior_summary(model.data(), phi).phi_bar;
  const std::string fingerprint = config_fingerprint(cfg);

  write_preamble(out, cfg);

  for (std::uint64_t tau : cfg.taus) {
    // Auto mode ties h and L to tau via the optimal-stepsize rule; an
    // explicit step_size instead fixes (h, L) across the tau list.
    std::uint64_t l;
    double h;
    if (cfg.step_size > 0.0) {
      l = cfg.iterations;
      h = cfg.step_size;
    } else {
      l = cfg.iterations * std::max<std::uint64_t>(tau, 1);
      h = optimal_stepsize(cfg.step_constant, tau, l);
    }
    const std::uint64_t bound =
        cfg.staleness_bound > 0 ? cfg.staleness_bound : tau;
    const auto grid = checkpoint_grid(l, cfg.checkpoints, cfg.burn_in);

    std::vector<std::vector<double>> per_replicate(cfg.replicates);
    parallel_replicates(cfg.replicates, [&](std::uint64_t r) {
      const ChainConfig cc = chain_config(cfg, h, l, bound, cfg.base_seed + r);
      const SimTrace trace = run_chain(model, phi, cc, fixed_delay(tau));
      per_replicate[r] = sample_average_at(trace, grid, cfg.burn_in);
    });

    ResultRow row = base_row(cfg, fingerprint);
    row.tau = tau;
    row.step_size = h;

    RunEnsemble ensemble;
    ensemble.estimates.resize(cfg.replicates);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
        ensemble.estimates[r] = per_replicate[r][g];
      }
      const EstimatorReport rep = estimate_report(ensemble, phi_bar);
      row.iterations = static_cast<double>(grid[g]);
      row.sim_time = static_cast<double>(grid[g]);
      row.metric = "mse";
      row.value = rep.mse;
      write_row(out, row);
      if (g + 1 == grid.size()) {
        const struct { const char* name; double value; } finals[] = {
            {"mse_final", rep.mse},
            {"bias_final", rep.bias},
            {"variance_final", rep.variance},
            {"sem_final", rep.standard_error_of_mean},
        };
        for (const auto& f : finals) {
          row.metric = f.name;
          row.value = f.value;
          write_row(out, row);
        }
      }
    }
  }
}

// ---------------------------------------------------------------------------
// variance-speedup: estimator variance vs per-worker iterations, per W,
// plus iterations-to-target and the speedup relative to W=1.

void cmd_variance_speedup(const ExperimentConfig& cfg, std::ostream& out) {
  require_kind(cfg, ExperimentKind::kVarianceSpeedup);
  cfg.validate();

  std::unique_ptr<Model> model;
  std::unique_ptr<TestFunction> phi;
  if (cfg.model_kind == "gaussian") {
    model = std::make_unique<GaussianModel>(make_gaussian(cfg));
    phi = std::make_unique<TestFunction>(TestFunction::theta_squared());
  } else {
    const BlrProblem problem = load_blr_problem(cfg);
    model = std::make_unique<LogisticRegressionModel>(problem.train);
    phi = std::make_unique<TestFunction>(TestFunction::logistic_loss(problem.test));
  }
  const std::string fingerprint = config_fingerprint(cfg);
  const std::uint64_t budget = cfg.iterations;  // per-worker budget L-bar

  write_preamble(out, cfg);

  // Per-worker checkpoints; burn_in is likewise counted per worker.
  const auto grid = checkpoint_grid(budget, cfg.checkpoints, cfg.burn_in);
  std::map<std::size_t, MetricCurve> curves;

  ResultRow row = base_row(cfg, fingerprint);
  row.step_size = cfg.step_size;

  for (std::uint64_t w : cfg.workers) {
    std::vector<std::uint64_t> totals(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) totals[g] = grid[g] * w;

    std::vector<std::vector<double>> per_replicate(cfg.replicates);
    std::vector<double> first_sim_times;
    parallel_replicates(cfg.replicates, [&](std::uint64_t r) {
      const ChainConfig cc = chain_config(cfg, cfg.step_size, budget * w,
                                          auto_bound(cfg, w), cfg.base_seed + r);
      const SchedulePolicy policy = schedule_policy(cfg, cfg.base_seed + r);
      const SimTrace trace = run_single_server(*model, *phi, cc,
                                               static_cast<std::size_t>(w),
                                               policy);
      per_replicate[r] = sample_average_at(trace, totals, cfg.burn_in * w);
      if (r == 0) {
        first_sim_times.resize(totals.size());
        for (std::size_t g = 0; g < totals.size(); ++g) {
          first_sim_times[g] = trace.sim_times[totals[g] - 1];
        }
      }
    });

    MetricCurve curve;
    row.tau = 0;
    row.workers = w;
    std::vector<double> column(cfg.replicates);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
        column[r] = per_replicate[r][g];
      }
      const double var = variance_of(column);
      curve.iterations.push_back(static_cast<double>(grid[g]));
      curve.values.push_back(var);
      row.iterations = static_cast<double>(grid[g]);
      row.sim_time = first_sim_times[g];
      row.metric = "variance";
      row.value = var;
      write_row(out, row);
    }
    curves[static_cast<std::size_t>(w)] = std::move(curve);
  }

  // Mid-range default: the W=1 variance at the grid point nearest to 40%
  // of the per-worker budget (past the early transient, well before the
  // flat tail, so every W still crosses it).
  double target = cfg.target_variance;
  if (target == 0.0) {
    const auto it = curves.find(1);
    if (it == curves.end()) {
      throw ConfigError(
          "variance-speedup: an explicit output.target_variance is required "
          "when the worker list omits W=1");
    }
    const double want = 0.4 * static_cast<double>(budget);
    std::size_t best = 0;
    for (std::size_t g = 1; g < grid.size(); ++g) {
      if (std::abs(static_cast<double>(grid[g]) - want) <
          std::abs(static_cast<double>(grid[best]) - want)) {
        best = g;
      }
    }
    target = it->second.values[best];
  }

  const SpeedupReport speedup = iteration_speedup(curves, target);

  row.workers = 0;
  row.iterations = 0.0;
  row.sim_time = 0.0;
  row.metric = "target_variance";
  row.value = target;
  write_row(out, row);

  for (std::size_t i = 0; i < speedup.worker_counts.size(); ++i) {
    row.workers = speedup.worker_counts[i];
    row.iterations = speedup.iterations_to_precision[i];
    row.sim_time = 0.0;
    row.metric = "iterations_to_target";
    row.value = speedup.iterations_to_precision[i];
    write_row(out, row);
    row.metric = "iteration_speedup";
    row.value = speedup.iteration_speedup[i];
    write_row(out, row);
  }

  if (cfg.real_threads) {
    // Informational wall-clock comparison at a fixed total budget; this
    // is the one nondeterministic block, and it is clearly labeled.
    std::vector<double> wall(cfg.workers.size());
    for (std::size_t i = 0; i < cfg.workers.size(); ++i) {
      const ChainConfig cc =
          chain_config(cfg, cfg.step_size, budget,
                       auto_bound(cfg, cfg.workers[i]), cfg.base_seed);
      const SimTrace trace = run_single_server_threaded(
          *model, *phi, cc, static_cast<std::size_t>(cfg.workers[i]));
      wall[i] = trace.sim_times.back();
    }
    for (std::size_t i = 0; i < cfg.workers.size(); ++i) {
      row.workers = cfg.workers[i];
      row.iterations = static_cast<double>(budget);
      row.sim_time = wall[i];
      row.metric = "time_speedup";
      row.value = wall[0] > 0.0 && wall[i] > 0.0 ? wall[0] / wall[i] : 1.0;
      write_row(out, row);
    }
  }
}

// ---------------------------------------------------------------------------
// multichain: variance of the time-weighted aggregate across S servers.

void cmd_multichain(const ExperimentConfig& cfg, std::ostream& out) {
  require_kind(cfg, ExperimentKind::kMultiChain);
  cfg.validate();

  const GaussianModel model = make_gaussian(cfg);
  const TestFunction phi = TestFunction::theta_squared();
  const double phi_bar = gaussian_posterior_summary(model.data(), phi).phi_bar;
  const std::string fingerprint = config_fingerprint(cfg);
  const std::uint64_t budget = cfg.iterations;
  const std::uint64_t workers_per_server = cfg.workers.front();

  write_preamble(out, cfg);

  ResultRow row = base_row(cfg, fingerprint);
  row.step_size = cfg.step_size;
  row.workers = workers_per_server;
  row.iterations = static_cast<double>(budget);

  std::vector<double> variances;
  for (std::uint64_t s_count : cfg.servers) {
    std::vector<double> aggregates(cfg.replicates);
    double weight_sum = 0.0;
    std::mutex weight_mu;
    parallel_replicates(cfg.replicates, [&](std::uint64_t r) {
      std::vector<ServerSpec> specs(s_count);
      for (auto& spec : specs) {
        spec.chain = chain_config(cfg, cfg.step_size, budget,
                                  auto_bound(cfg, workers_per_server),
                                  cfg.base_seed + r);
        spec.workers = static_cast<std::size_t>(workers_per_server);
        spec.policy = schedule_policy(cfg, cfg.base_seed + r);
      }
      const auto traces = run_multi_server(model, phi, specs);
      std::vector<double> estimates(s_count);
      std::vector<ChainSpan> spans(s_count);
      for (std::uint64_t s = 0; s < s_count; ++s) {
        estimates[s] = sample_average(traces[s], cfg.burn_in);
        spans[s] = {budget, cfg.step_size};
      }
      aggregates[r] = aggregate_chains(estimates, spans);
      if (r == 0) {
        double total = 0.0;
        for (const ChainSpan& sp : spans) {
          total += static_cast<double>(sp.iterations) * sp.step_size;
        }
        double sum = 0.0;
        for (const ChainSpan& sp : spans) {
          sum += static_cast<double>(sp.iterations) * sp.step_size / total;
        }
        std::lock_guard lock(weight_mu);
        weight_sum = sum;
      }
    });

    double mean = 0.0;
    for (double a : aggregates) mean += a;
    mean /= static_cast<double>(cfg.replicates);
    const double var = variance_of(aggregates);
    variances.push_back(var);

    row.servers = s_count;
    row.metric = "aggregate_variance";
    row.value = var;
    write_row(out, row);
    row.metric = "aggregate_mean";
    row.value = mean;
    write_row(out, row);
    row.metric = "aggregate_bias";
    row.value = std::abs(mean - phi_bar);
    write_row(out, row);
    row.metric = "weight_sum";
    row.value = weight_sum;
    write_row(out, row);
  }

  for (std::size_t i = 0; i < cfg.servers.size(); ++i) {
    row.servers = cfg.servers[i];
    row.metric = "variance_ratio";
    row.value = variances[i] / variances[0];
    write_row(out, row);
  }
}

// ---------------------------------------------------------------------------
// blr: held-out logistic loss vs per-worker iterations.

void cmd_blr(const ExperimentConfig& cfg, std::ostream& out) {
  require_kind(cfg, ExperimentKind::kBlrLoss);
  cfg.validate();

  const BlrProblem problem = load_blr_problem(cfg);
  const LogisticRegressionModel model(problem.train);
  const TestFunction phi = TestFunction::logistic_loss(problem.test);
  const std::string fingerprint = config_fingerprint(cfg);
  const std::uint64_t budget = cfg.iterations;

  const Vector theta0 = Vector::Zero(model.dim());
  const double loss0 = logistic_test_loss(theta0, *problem.test);

  write_preamble(out, cfg);

  const auto grid = checkpoint_grid(budget, cfg.checkpoints, cfg.burn_in);

  ResultRow row = base_row(cfg, fingerprint);
  row.step_size = cfg.step_size;

  for (std::uint64_t w : cfg.workers) {
    std::vector<std::uint64_t> totals(grid.size());
    for (std::size_t g = 0; g < grid.size(); ++g) totals[g] = grid[g] * w;

    struct ReplicateResult {
      std::vector<double> pointwise;  // loss at theta after checkpoint
      std::vector<double> averaged;   // loss estimator (running average)
      std::vector<double> times;
    };
    std::vector<ReplicateResult> results(cfg.replicates);
    parallel_replicates(cfg.replicates, [&](std::uint64_t r) {
      const ChainConfig cc = chain_config(cfg, cfg.step_size, budget * w,
                                          auto_bound(cfg, w), cfg.base_seed + r);
      const SchedulePolicy policy = schedule_policy(cfg, cfg.base_seed + r);
      const SimTrace trace = run_single_server(model, phi, cc,
                                               static_cast<std::size_t>(w),
                                               policy);
      ReplicateResult res;
      res.averaged = sample_average_at(trace, totals, cfg.burn_in * w);
      for (std::uint64_t c : totals) {
        res.pointwise.push_back(trace.phi_values[c - 1]);
        res.times.push_back(trace.sim_times[c - 1]);
      }
      results[r] = std::move(res);
    });

    row.workers = w;

    // The iteration-zero anchor: every chain starts at theta_0 = 0.
    for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
      row.replicate = std::to_string(r);
      row.iterations = 0.0;
      row.sim_time = 0.0;
      row.metric = "test_loss";
      row.value = loss0;
      write_row(out, row);
    }

    for (std::size_t g = 0; g < grid.size(); ++g) {
      for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
        row.replicate = std::to_string(r);
        row.iterations = static_cast<double>(grid[g]);
        row.sim_time = results[r].times[g];
        row.metric = "test_loss";
        row.value = results[r].pointwise[g];
        write_row(out, row);
      }
    }

    row.replicate = "aggregate";
    std::vector<double> column(cfg.replicates);
    for (std::size_t g = 0; g < grid.size(); ++g) {
      double mean = 0.0;
      for (std::uint64_t r = 0; r < cfg.replicates; ++r) {
        column[r] = results[r].averaged[g];
        mean += results[r].averaged[g];
      }
      mean /= static_cast<double>(cfg.replicates);
      row.iterations = static_cast<double>(grid[g]);
      row.sim_time = results[0].times[g];
      row.metric = "loss_estimate_mean";
      row.value = mean;
      write_row(out, row);
      if (cfg.replicates >= 2) {
        row.metric = "loss_estimate_variance";
        row.value = variance_of(column);
        write_row(out, row);
      }
    }
  }
}

void run_experiment(const ExperimentConfig& cfg, std::ostream& out) {
  switch (cfg.experiment) {
    case ExperimentKind::kSynthMse: return cmd_synth_mse(cfg, out);
    case ExperimentKind::kVarianceSpeedup: return cmd_variance_speedup(cfg, out);
    case ExperimentKind::kMultiChain: return cmd_multichain(cfg, out);
    case ExperimentKind::kBlrLoss: return cmd_blr(cfg, out);
  }
  throw ConfigError("run_experiment: unknown experiment kind");
}

std::vector<ResultRow> read_result_csv(std::istream& in) {
  std::vector<ResultRow> rows;
  std::string line;
  bool saw_header = false;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    if (!saw_header) {
      if (line != kCsvHeader) {
        throw ParseError("csv:" + std::to_string(line_no) +
                         ": unexpected header '" + line + "'");
      }
      saw_header = true;
      continue;
    }
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (fields.size() != 12) {
      throw ParseError("csv:" + std::to_string(line_no) + ": expected 12 fields, got " +
                       std::to_string(fields.size()));
    }
    ResultRow row;
    row.experiment = fields[0];
    row.fingerprint = fields[1];
    row.kernel = fields[2];
    row.tau = std::stoull(fields[3]);
    row.workers = std::stoull(fields[4]);
    row.servers = std::stoull(fields[5]);
    row.step_size = std::stod(fields[6]);
    row.iterations = std::stod(fields[7]);
    row.replicate = fields[8];
    row.metric = fields[9];
    row.value = std::stod(fields[10]);
    row.sim_time = std::stod(fields[11]);
    rows.push_back(std::move(row));
  }
  if (!saw_header) throw ParseError("csv: missing header row");
  return rows;
}

}  // namespace sgmcmc
