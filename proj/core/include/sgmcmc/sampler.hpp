// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "sgmcmc/model.hpp"

namespace sgmcmc {

//! Transition kernel family.
enum class KernelKind { kSgld, kSghmc };

//! Chain position. momentum is engaged only for SGHMC.
struct SamplerState {
  Vector theta;
  std::optional<Vector> momentum;
  std::uint64_t iteration = 0;
};

//! Zero-initialized state of the right shape for the model/kernel.
SamplerState make_initial_state(const Model& model, KernelKind kernel);

//! Static settings for one chain.
struct ChainConfig {
  KernelKind kernel = KernelKind::kSgld;
  double step_size = 1e-3;           //!< h > 0
  double friction = 1.0;             //!< B > 0 (SGHMC only)
  std::size_t minibatch = 10;        //!< j, 1 <= j <= N
  std::uint64_t iterations = 1000;   //!< L, accepted updates to perform
  std::uint64_t burn_in = 0;         //!< samples dropped by sample_average
  std::uint64_t staleness_bound = 0; //!< tau, max accepted staleness
  int integrator_order = 1;          //!< only first-order supported
  std::uint64_t seed = 0;

  //! Throws ConfigError on hard violations (non-positive step size, zero
  //! iterations/minibatch, unsupported integrator order, burn_in >= L).
  void validate() const;

  //! Non-fatal advisories, e.g. an SGHMC discretization with B*h >= 1.
  std::vector<std::string> warnings() const;
};

//! A gradient together with the age (in accepted updates) of the
//! parameter it was evaluated at.
struct StaleGradient {
  Vector value;
  std::uint64_t staleness = 0;
};

//! Result of one kernel application. On rejection (staleness above the
//! bound) the state is returned unchanged, iteration included.
struct StepResult {
  SamplerState state;
  bool accepted = true;
};

//! One SGLD update theta' = theta - g*h + sqrt(2h)*zeta, zeta ~ N(0, I).
//! Pure in (state, gradient, draws from noise); increments iteration.
SamplerState sgld_step(const SamplerState& state, const Vector& gradient,
                       double step_size, RngStream& noise);

//! One guarded SGHMC update. If gradient.staleness <= cfg.staleness_bound:
//!   q' = (1 - B*h)*q - g*h + sqrt(2*B*h)*zeta,  theta' = theta + q'*h;
//! otherwise the state is returned unchanged and accepted = false. No
//! randomness is consumed on rejection.
StepResult sghmc_step(const SamplerState& state, const StaleGradient& gradient,
                      const ChainConfig& cfg, RngStream& noise);

//! Kernel dispatch with the same staleness guard applied to both
//! families; this is the single entry point the simulators use.
StepResult apply_kernel(const SamplerState& state, const StaleGradient& gradient,
                        const ChainConfig& cfg, RngStream& noise);

//! What a deterministic chain run (or one simulated server) produced.
//! All per-iteration arrays have length cfg.iterations.
struct SimTrace {
  std::vector<std::uint64_t> iterations;     //!< 1, 2, ..., L
  std::vector<Vector> samples;               //!< theta after each update
  std::vector<std::uint64_t> staleness_log;  //!< accepted staleness per update
  std::vector<double> phi_values;            //!< phi(theta) per update
  std::vector<double> sim_times;             //!< simulated clock per update
  std::vector<std::size_t> worker_log;       //!< worker that supplied each update
  std::uint64_t rejected_count = 0;

  std::size_t length() const { return samples.size(); }
};

//! Maps the update index l to the staleness the gradient should carry.
using StalenessSchedule = std::function<std::uint64_t(std::uint64_t)>;

StalenessSchedule zero_delay();
StalenessSchedule fixed_delay(std::uint64_t tau);

//! Run one chain for cfg.iterations accepted updates, feeding each update
//! the gradient evaluated at the parameter from schedule(l) updates ago
//! (clamped to the initial state during warm-up). A schedule value above
//! cfg.staleness_bound raises PolicyViolation. chain_id selects the noise
//! and minibatch streams; it matches the server id used by the simulators,
//! so run_chain(chain_id = s) reproduces a one-worker server s bit for bit.
SimTrace run_chain(const Model& model, const TestFunction& phi,
                   const ChainConfig& cfg, const StalenessSchedule& schedule,
                   std::uint64_t chain_id = 0);

}  // namespace sgmcmc
