// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgmcmc/sampler.hpp"

#include <cmath>

#include "sgmcmc/errors.hpp"

namespace sgmcmc {

SamplerState make_initial_state(const Model& model, KernelKind kernel) {
  SamplerState s;
  s.theta = Vector::Zero(model.dim());
  if (kernel == KernelKind::kSghmc) s.momentum = Vector::Zero(model.dim());
  return s;
}

void ChainConfig::validate() const {
  if (!(step_size > 0.0)) {
    throw ConfigError("chain: step_size must be positive");
  }
  if (iterations == 0) throw ConfigError("chain: iterations must be >= 1");
  if (minibatch == 0) throw ConfigError("chain: minibatch must be >= 1");
  if (integrator_order != 1) {
    throw ConfigError(
        "chain: only the first-order (Euler) integrator is supported");
  }
  if (kernel == KernelKind::kSghmc && !(friction > 0.0)) {
    throw ConfigError("chain: SGHMC friction must be positive");
  }
  if (burn_in >= iterations) {
    throw ConfigError("chain: burn_in must be smaller than iterations");
  }
}

std::vector<std::string> ChainConfig::warnings() const {
  std::vector<std::string> out;
  if (kernel == KernelKind::kSghmc && friction * step_size >= 1.0) {
    out.push_back(
        "SGHMC discretization has friction*step_size >= 1; the momentum "
        "update is no longer a contraction");
  }
  return out;
}

namespace {

void fill_standard_normal(Vector& z, RngStream& noise) {
  for (Eigen::Index i = 0; i < z.size(); ++i) z[i] = noise.normal();
}

}  // namespace

SamplerState sgld_step(const SamplerState& state, const Vector& gradient,
                       double step_size, RngStream& noise) {
  if (!(step_size > 0.0)) throw ConfigError("sgld_step: step_size must be positive");
  if (gradient.size() != state.theta.size()) {
    throw ModelError("sgld_step: gradient dimension mismatch");
  }
  Vector zeta(state.theta.size());
  fill_standard_normal(zeta, noise);
  SamplerState next = state;
  next.theta = state.theta - step_size * gradient +
               std::sqrt(2.0 * step_size) * zeta;
  next.iteration = state.iteration + 1;
  return next;
}

StepResult sghmc_step(const SamplerState& state, const StaleGradient& gradient,
                      const ChainConfig& cfg, RngStream& noise) {
  if (gradient.value.size() != state.theta.size()) {
    throw ModelError("sghmc_step: gradient dimension mismatch");
  }
  if (!state.momentum) {
    throw ModelError("sghmc_step: state carries no momentum");
  }
  if (gradient.staleness > cfg.staleness_bound) {
    return {state, false};
  }
  const double h = cfg.step_size;
  const double b = cfg.friction;
  Vector zeta(state.theta.size());
  fill_standard_normal(zeta, noise);
  SamplerState next = state;
  Vector q = (1.0 - b * h) * (*state.momentum) - h * gradient.value +
             std::sqrt(2.0 * b * h) * zeta;
  next.theta = state.theta + h * q;
  next.momentum = std::move(q);
  next.iteration = state.iteration + 1;
  return {std::move(next), true};
}

StepResult apply_kernel(const SamplerState& state, const StaleGradient& gradient,
                        const ChainConfig& cfg, RngStream& noise) {
  switch (cfg.kernel) {
    case KernelKind::kSgld: {
      if (gradient.staleness > cfg.staleness_bound) return {state, false};
      return {sgld_step(state, gradient.value, cfg.step_size, noise), true};
    }
    case KernelKind::kSghmc:
      return sghmc_step(state, gradient, cfg, noise);
  }
  throw ConfigError("apply_kernel: unknown kernel kind");
}

StalenessSchedule zero_delay() {
  return [](std::uint64_t) -> std::uint64_t { return 0; };
}

StalenessSchedule fixed_delay(std::uint64_t tau) {
  return [tau](std::uint64_t) -> std::uint64_t { return tau; };
}

SimTrace run_chain(const Model& model, const TestFunction& phi,
                   const ChainConfig& cfg, const StalenessSchedule& schedule,
                   std::uint64_t chain_id) {
  cfg.validate();
  const std::size_t n = model.data_size();
  if (n > 0 && cfg.minibatch > n) {
    throw ConfigError("run_chain: minibatch exceeds dataset size");
  }

  const Eigen::Index dim = model.dim();
  RngStream noise(cfg.seed, StreamPurpose::kChainNoise, chain_id);
  RngStream batch_rng(cfg.seed, StreamPurpose::kMinibatch, chain_id << 32);

  SamplerState state = make_initial_state(model, cfg.kernel);

  // Parameters from the last tau+1 accepted updates; slot l % (tau+1)
  // holds theta after update l (slot 0 starts as theta_0).
  const std::size_t window = static_cast<std::size_t>(cfg.staleness_bound) + 1;
  std::vector<Vector> ring(window, state.theta);

  const std::uint64_t total = cfg.iterations;
  SimTrace trace;
  trace.iterations.reserve(total);
  trace.samples.reserve(total);
  trace.staleness_log.reserve(total);
  trace.phi_values.reserve(total);
  trace.sim_times.reserve(total);

  for (std::uint64_t l = 0; l < total; ++l) {
    const std::uint64_t wanted = schedule(l);
    if (wanted > cfg.staleness_bound) {
      throw PolicyViolation("run_chain: schedule produced staleness " +
                            std::to_string(wanted) + " > bound " +
                            std::to_string(cfg.staleness_bound));
    }
    const std::uint64_t tau_l = std::min(wanted, l);  // warm-up clamp
    const Vector& base = ring[static_cast<std::size_t>((l - tau_l) % window)];

    StaleGradient g;
    g.staleness = tau_l;
    if (n == 0) {
      g.value = full_gradient(model, base);
    } else {
      const Minibatch batch = sample_minibatch(n, cfg.minibatch, batch_rng);
      g.value = stochastic_gradient(model, base, batch);
    }

    // Address the noise for update l directly so that the stream contents
    // depend only on (seed, chain_id, l), never on scheduling history.
    noise.seek(2 * static_cast<std::uint64_t>(dim) * l);
    StepResult r = apply_kernel(state, g, cfg, noise);
    state = std::move(r.state);  // schedule <= bound, so always accepted

    ring[static_cast<std::size_t>((l + 1) % window)] = state.theta;
    trace.iterations.push_back(l + 1);
    trace.samples.push_back(state.theta);
    trace.staleness_log.push_back(tau_l);
    trace.phi_values.push_back(phi(state.theta));
    trace.sim_times.push_back(static_cast<double>(l + 1));
    trace.worker_log.push_back(0);
  }
  return trace;
}

}  // namespace sgmcmc
