// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgmcmc/metrics.hpp"

#include <cmath>

#include "sgmcmc/errors.hpp"

namespace sgmcmc {

double sample_average(const SimTrace& trace, std::uint64_t burn_in) {
  const std::uint64_t l = trace.phi_values.size();
  if (burn_in >= l) {
    throw ConfigError("sample_average: burn_in " + std::to_string(burn_in) +
                      " leaves no samples out of " + std::to_string(l));
  }
  double sum = 0.0;
  for (std::uint64_t i = burn_in; i < l; ++i) sum += trace.phi_values[i];
  return sum / static_cast<double>(l - burn_in);
}

std::vector<double> sample_average_at(const SimTrace& trace,
                                      std::span<const std::uint64_t> checkpoints,
                                      std::uint64_t burn_in) {
  const std::uint64_t l = trace.phi_values.size();
  std::vector<double> out;
  out.reserve(checkpoints.size());
  double sum = 0.0;
  std::uint64_t upto = burn_in;  // samples burn_in..upto-1 are in `sum`
  std::uint64_t prev = 0;
  for (std::uint64_t c : checkpoints) {
    if (c <= burn_in || c > l) {
      throw ConfigError("sample_average_at: checkpoint " + std::to_string(c) +
                        " outside (" + std::to_string(burn_in) + ", " +
                        std::to_string(l) + "]");
    }
    if (c < prev) {
      throw ConfigError("sample_average_at: checkpoints must be ascending");
    }
    prev = c;
    for (; upto < c; ++upto) sum += trace.phi_values[upto];
    out.push_back(sum / static_cast<double>(c - burn_in));
  }
  return out;
}

EstimatorReport estimate_report(const RunEnsemble& ensemble, double phi_bar) {
  const std::size_t r = ensemble.estimates.size();
  if (r < 2) {
    throw ConfigError(
        "estimate_report: at least 2 replicates are required to report a "
        "variance (got " + std::to_string(r) + ")");
  }
  double mean = 0.0;
  for (double e : ensemble.estimates) {
    if (!std::isfinite(e)) {
      throw ConfigError("estimate_report: non-finite estimate in ensemble");
    }
    mean += e;
  }
  mean /= static_cast<double>(r);

  double mse = 0.0, ss = 0.0;
  for (double e : ensemble.estimates) {
    const double d = e - phi_bar;
    mse += d * d;
    const double c = e - mean;
    ss += c * c;
  }

  EstimatorReport rep;
  rep.r = r;
  rep.phi_bar = phi_bar;
  rep.bias = std::abs(mean - phi_bar);
  rep.mse = mse / static_cast<double>(r);
  rep.variance = ss / static_cast<double>(r - 1);
  rep.standard_error_of_mean = std::sqrt(rep.variance / static_cast<double>(r));
  return rep;
}

double aggregate_chains(std::span<const double> estimates,
                        std::span<const ChainSpan> spans) {
  if (estimates.empty()) {
    throw ConfigError("aggregate_chains: empty estimate list");
  }
  if (estimates.size() != spans.size()) {
    throw ConfigError("aggregate_chains: " + std::to_string(estimates.size()) +
                      " estimates vs " + std::to_string(spans.size()) +
                      " spans");
  }
  double total_time = 0.0;
  for (const ChainSpan& s : spans) {
    if (!(s.step_size > 0.0)) {
      throw ConfigError("aggregate_chains: step sizes must be positive");
    }
    if (s.iterations == 0) {
      throw ConfigError("aggregate_chains: chain spans must cover >= 1 iteration");
    }
    total_time += static_cast<double>(s.iterations) * s.step_size;
  }
  double out = 0.0;
  for (std::size_t i = 0; i < estimates.size(); ++i) {
    const double weight =
        static_cast<double>(spans[i].iterations) * spans[i].step_size / total_time;
    out += weight * estimates[i];
  }
  return out;
}

double optimal_stepsize(double c, std::uint64_t tau, std::uint64_t l) {
  if (!(c > 0.0)) throw ConfigError("optimal_stepsize: c must be positive");
  if (tau == 0) {
    throw ConfigError(
        "optimal_stepsize: the rule covers the stale regime (tau >= 1); "
        "substitute tau = 1 for a stale-free chain");
  }
  if (l == 0) throw ConfigError("optimal_stepsize: l must be >= 1");
  return c * std::pow(static_cast<double>(tau), -2.0 / 3.0) *
         std::pow(static_cast<double>(l), -1.0 / 3.0);
}

SpeedupReport iteration_speedup(const std::map<std::size_t, MetricCurve>& curves,
                                double target) {
  if (curves.find(1) == curves.end()) {
    throw ConfigError("iteration_speedup: the W=1 reference curve is required");
  }

  auto crossing = [&](std::size_t w, const MetricCurve& curve) {
    const auto& its = curve.iterations;
    const auto& vals = curve.values;
    if (its.empty() || its.size() != vals.size()) {
      throw ConfigError("iteration_speedup: malformed curve for W=" +
                        std::to_string(w));
    }
    for (std::size_t i = 1; i < its.size(); ++i) {
      if (!(its[i] > its[i - 1])) {
        throw ConfigError(
            "iteration_speedup: iterations must be strictly increasing (W=" +
            std::to_string(w) + ")");
      }
    }
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (vals[i] <= target) {
        if (i == 0) return its[0];
        // First logged point at/below target: interpolate the crossing.
        const double frac = (vals[i - 1] - target) / (vals[i - 1] - vals[i]);
        return its[i - 1] + frac * (its[i] - its[i - 1]);
      }
    }
    throw TargetUnreachable("iteration_speedup: curve for W=" +
                            std::to_string(w) + " never reaches target " +
                            std::to_string(target));
  };

  SpeedupReport report;
  const double l1 = crossing(1, curves.at(1));
  for (const auto& [w, curve] : curves) {
    const double lw = crossing(w, curve);
    report.worker_counts.push_back(w);
    report.iterations_to_precision.push_back(lw);
    report.iteration_speedup.push_back(l1 / lw);
  }
  return report;
}

}  // namespace sgmcmc
