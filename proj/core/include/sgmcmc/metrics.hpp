// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>
#include <optional>
#include <span>

#include "sgmcmc/sampler.hpp"

namespace sgmcmc {

//! Replicated estimates phi_hat of one posterior average, one entry per
//! independent run. All entries must be finite.
struct RunEnsemble {
  std::vector<double> estimates;
  std::uint64_t config_fingerprint = 0;
};

//! The three quality measures of an estimator ensemble relative to the
//! exact posterior average phi_bar.
struct EstimatorReport {
  double bias = 0.0;      //!< |mean(estimates) - phi_bar|
  double mse = 0.0;       //!< mean((estimates - phi_bar)^2)
  double variance = 0.0;  //!< sum((e - mean)^2) / (R - 1)
  double phi_bar = 0.0;
  std::size_t r = 0;
  double standard_error_of_mean = 0.0;  //!< sqrt(variance / R)
};

//! Iterations-to-target and speedups per worker count.
struct SpeedupReport {
  std::vector<std::size_t> worker_counts;
  std::vector<double> iterations_to_precision;
  std::vector<double> iteration_speedup;  //!< L1 / L_W; exactly 1 at W=1
  std::optional<std::vector<double>> time_speedup;  //!< real-threads only
};

//! phi_hat = mean of phi over iterations (burn_in, L]. Throws ConfigError
//! when burn_in leaves nothing to average.
double sample_average(const SimTrace& trace, std::uint64_t burn_in);

//! Running value of the sample average at each requested iteration count
//! (ascending, each in (burn_in, L]). Shares sample_average's convention.
std::vector<double> sample_average_at(const SimTrace& trace,
                                      std::span<const std::uint64_t> checkpoints,
                                      std::uint64_t burn_in);

//! Bias / MSE / variance of an ensemble against the exact value. Needs
//! R >= 2 (the variance field uses the R-1 divisor) and finite estimates.
EstimatorReport estimate_report(const RunEnsemble& ensemble, double phi_bar);

//! One chain's contribution to the multi-chain aggregate.
struct ChainSpan {
  std::uint64_t iterations = 0;  //!< L_s
  double step_size = 0.0;        //!< h_s
};

//! Time-weighted combination of per-chain sample averages:
//!   sum_s (T_s / T) * estimate_s,  T_s = L_s * h_s,  T = sum_s T_s.
double aggregate_chains(std::span<const double> estimates,
                        std::span<const ChainSpan> spans);

//! Step-size rule h = c * tau^(-2/3) * l^(-1/3) for the stale regime.
//! tau = 0 is rejected; callers wanting the stale-free chain substitute
//! tau = 1 explicitly.
double optimal_stepsize(double c, std::uint64_t tau, std::uint64_t l);

//! A metric logged against per-worker iteration counts.
struct MetricCurve {
  std::vector<double> iterations;  //!< strictly increasing
  std::vector<double> values;
};

//! For each worker count, the first per-worker iteration count where the
//! curve reaches `target` (linear interpolation between logged points),
//! and the speedup relative to the W=1 curve. Throws TargetUnreachable
//! naming the worker count whose curve never crosses.
SpeedupReport iteration_speedup(const std::map<std::size_t, MetricCurve>& curves,
                                double target);

}  // namespace sgmcmc
