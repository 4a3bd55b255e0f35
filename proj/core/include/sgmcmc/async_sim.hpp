// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <map>

#include "sgmcmc/sampler.hpp"

namespace sgmcmc {

//! How the simulated server orders gradient consumption.
enum class PolicyKind {
  kRoundRobin,   //!< equal unit compute times; fixed cyclic order
  kRandomReady,  //!< uniform choice among currently-ready messages
  kEventDriven,  //!< earliest ready_time first, per-worker durations
};

//! Scheduling policy for the discrete-event simulator.
struct SchedulePolicy {
  PolicyKind kind = PolicyKind::kRoundRobin;

  //! Mean gradient compute duration per worker; a single entry is
  //! broadcast to all workers. RoundRobin ignores this (always 1).
  std::vector<double> compute_times = {1.0};

  //! EventDriven only: draw each duration from Exponential(mean) instead
  //! of using the mean as a constant.
  bool exponential_durations = false;

  //! Seeds the duration and ready-selection streams (kept separate from
  //! the chain seed so schedules can vary with the noise held fixed).
  std::uint64_t seed = 0;

  void validate(std::size_t workers) const;
  double mean_compute_time(std::size_t worker) const;
};

//! One simulated worker, as in the worker loop of the asynchronous
//! architecture: it always holds the last parameter the server sent.
struct WorkerState {
  std::size_t worker_id = 0;
  Vector held_parameter;
  std::uint64_t held_issue_iteration = 0;  //!< server iteration at issue
  double busy_until = 0.0;                 //!< when its gradient is ready
};

//! A stochastic gradient in flight from worker to server.
struct GradientMessage {
  std::size_t worker_id = 0;
  Vector vector;
  std::uint64_t issue_iteration = 0;
  double ready_time = 0.0;
};

//! Simulate one server with W asynchronous workers until cfg.iterations
//! accepted updates have been applied.
//!
//! The server broadcasts theta_0 to all workers; each worker perpetually
//! computes a stochastic gradient of its held parameter (minibatch drawn
//! from its own stream) and reports ready after its compute duration. The
//! server consumes messages in policy order; a message whose emergent
//! staleness exceeds cfg.staleness_bound is rejected (counted, worker
//! re-issued the current parameter) unless the policy promised a bound,
//! in which case PolicyViolation is thrown. Staleness is never assumed:
//! it is measured as (current iteration - issue iteration).
//!
//! server_id selects the noise/minibatch stream family; a run with W = 1
//! is bitwise-identical to run_chain(..., zero_delay(), server_id).
SimTrace run_single_server(const Model& model, const TestFunction& phi,
                           const ChainConfig& cfg, std::size_t workers,
                           const SchedulePolicy& policy,
                           std::uint64_t server_id = 0);

//! One server of a multi-server ensemble.
struct ServerSpec {
  ChainConfig chain;
  std::size_t workers = 1;
  SchedulePolicy policy;
};

//! Independent servers s = 0, 1, ... each running its own chain (their
//! stream ids differ even under identical seeds). Traces are returned in
//! server order; aggregation is left to metrics::aggregate_chains.
std::vector<SimTrace> run_multi_server(const Model& model,
                                       const TestFunction& phi,
                                       const std::vector<ServerSpec>& servers);

//! Fraction of accepted updates per observed staleness value (sums to 1).
std::map<std::uint64_t, double> staleness_histogram(const SimTrace& trace);

//! Real concurrent workers (std::thread) feeding a serializing server.
//! Wall-clock nondeterminism makes this unsuitable for correctness
//! checks; it exists to measure time speedup. sim_times hold elapsed
//! wall-clock seconds.
SimTrace run_single_server_threaded(const Model& model,
                                    const TestFunction& phi,
                                    const ChainConfig& cfg,
                                    std::size_t workers);

}  // namespace sgmcmc
