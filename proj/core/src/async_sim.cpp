// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgmcmc/async_sim.hpp"

#include <algorithm>
#include <chrono>
#include <condition_variable>
#include <deque>
#include <mutex>
#include <thread>

#include "sgmcmc/errors.hpp"

namespace sgmcmc {

void SchedulePolicy::validate(std::size_t workers) const {
  if (compute_times.empty()) {
    throw ConfigError("schedule: compute_times must not be empty");
  }
  if (compute_times.size() != 1 && compute_times.size() != workers) {
    throw ConfigError("schedule: compute_times has " +
                      std::to_string(compute_times.size()) +
                      " entries for " + std::to_string(workers) + " workers");
  }
  for (double t : compute_times) {
    if (!(t > 0.0)) {
      throw ConfigError("schedule: compute durations must be positive");
    }
  }
}

double SchedulePolicy::mean_compute_time(std::size_t worker) const {
  return compute_times.size() == 1 ? compute_times[0] : compute_times[worker];
}

namespace {

// Combine server and worker indices into one stream id. Worker streams of
// server 0 coincide with the ids run_chain uses, which is what makes the
// W=1 reduction exact.
std::uint64_t stream_id(std::uint64_t server_id, std::size_t worker) {
  return (server_id << 32) | static_cast<std::uint64_t>(worker);
}

struct SimWorker {
  WorkerState state;
  GradientMessage pending;
  RngStream minibatch;
  RngStream durations;
};

}  // namespace

SimTrace run_single_server(const Model& model, const TestFunction& phi,
                           const ChainConfig& cfg, std::size_t workers,
                           const SchedulePolicy& policy,
                           std::uint64_t server_id) {
  cfg.validate();
  if (workers == 0) throw ConfigError("run_single_server: need at least one worker");
  policy.validate(workers);
  const std::size_t n = model.data_size();
  if (n > 0 && cfg.minibatch > n) {
    throw ConfigError("run_single_server: minibatch exceeds dataset size");
  }

  const Eigen::Index dim = model.dim();
  RngStream noise(cfg.seed, StreamPurpose::kChainNoise, server_id);
  RngStream selection(policy.seed, StreamPurpose::kSelection, server_id);

  SamplerState state = make_initial_state(model, cfg.kernel);
  std::uint64_t accepted = 0;
  double now = 0.0;

  std::vector<SimWorker> pool(workers);
  auto draw_duration = [&](SimWorker& w) {
    if (policy.kind == PolicyKind::kRoundRobin) return 1.0;
    const double mean = policy.mean_compute_time(w.state.worker_id);
    if (policy.kind == PolicyKind::kEventDriven && policy.exponential_durations) {
      return w.durations.exponential(mean);
    }
    return mean;
  };

  // Issue the server's current parameter to worker w at time `start`. The
  // worker's gradient is precomputed here; semantically it is produced
  // during [start, start + duration) and only becomes visible at
  // ready_time, which is all the server ever observes.
  auto issue = [&](SimWorker& w, double start) {
    w.state.held_parameter = state.theta;
    w.state.held_issue_iteration = accepted;
    GradientMessage msg;
    msg.worker_id = w.state.worker_id;
    msg.issue_iteration = accepted;
    if (n == 0) {
      msg.vector = full_gradient(model, w.state.held_parameter);
    } else {
      const Minibatch batch = sample_minibatch(n, cfg.minibatch, w.minibatch);
      msg.vector = stochastic_gradient(model, w.state.held_parameter, batch);
    }
    msg.ready_time = start + draw_duration(w);
    w.state.busy_until = msg.ready_time;
    w.pending = std::move(msg);
  };

  for (std::size_t i = 0; i < workers; ++i) {
    pool[i].state.worker_id = i;
    pool[i].minibatch = RngStream(cfg.seed, StreamPurpose::kMinibatch,
                                  stream_id(server_id, i));
    pool[i].durations = RngStream(policy.seed, StreamPurpose::kSchedule,
                                  stream_id(server_id, i));
    issue(pool[i], 0.0);  // initial broadcast of theta_0
  }

  auto earliest_ready = [&]() {
    std::size_t best = 0;
    for (std::size_t i = 1; i < pool.size(); ++i) {
      if (pool[i].pending.ready_time < pool[best].pending.ready_time) best = i;
    }
    return best;  // worker-id tie-break via scan order
  };

  auto choose_message = [&]() -> std::size_t {
    if (policy.kind != PolicyKind::kRandomReady) return earliest_ready();
    // Wait until something is ready, then pick uniformly among the ready.
    const double horizon =
        std::max(now, pool[earliest_ready()].pending.ready_time);
    std::vector<std::size_t> ready;
    for (std::size_t i = 0; i < pool.size(); ++i) {
      if (pool[i].pending.ready_time <= horizon) ready.push_back(i);
    }
    return ready[static_cast<std::size_t>(
        selection.uniform_below(ready.size()))];
  };

  SimTrace trace;
  trace.iterations.reserve(cfg.iterations);
  trace.samples.reserve(cfg.iterations);
  trace.staleness_log.reserve(cfg.iterations);
  trace.phi_values.reserve(cfg.iterations);
  trace.sim_times.reserve(cfg.iterations);

  while (accepted < cfg.iterations) {
    SimWorker& w = pool[choose_message()];
    now = std::max(now, w.pending.ready_time);
    const std::uint64_t staleness = accepted - w.pending.issue_iteration;

    if (staleness > cfg.staleness_bound) {
      if (policy.kind == PolicyKind::kRoundRobin) {
        // This policy promises max staleness W-1; exceeding the bound is a
        // configuration error, not a runtime event to silently absorb.
        throw PolicyViolation(
            "round-robin with " + std::to_string(workers) +
            " workers produced staleness " + std::to_string(staleness) +
            " > bound " + std::to_string(cfg.staleness_bound) +
            "; raise staleness_bound to at least W-1");
      }
      ++trace.rejected_count;
      issue(w, now);  // re-send current parameters, drop the stale gradient
      continue;
    }

    StaleGradient g;
    g.value = w.pending.vector;
    g.staleness = staleness;
    // Noise for update l lives at counter 2*dim*l regardless of which
    // worker supplied the gradient or how many rejections preceded it.
    noise.seek(2 * static_cast<std::uint64_t>(dim) * accepted);
    StepResult r = apply_kernel(state, g, cfg, noise);
    state = std::move(r.state);
    ++accepted;

    trace.iterations.push_back(accepted);
    trace.samples.push_back(state.theta);
    trace.staleness_log.push_back(staleness);
    trace.phi_values.push_back(phi(state.theta));
    trace.sim_times.push_back(now);
    trace.worker_log.push_back(w.state.worker_id);

    issue(w, now);
  }
  return trace;
}

std::vector<SimTrace> run_multi_server(const Model& model,
                                       const TestFunction& phi,
                                       const std::vector<ServerSpec>& servers) {
  if (servers.empty()) {
    throw ConfigError("run_multi_server: need at least one server");
  }
  std::vector<SimTrace> traces;
  traces.reserve(servers.size());
  for (std::size_t s = 0; s < servers.size(); ++s) {
    traces.push_back(run_single_server(model, phi, servers[s].chain,
                                       servers[s].workers, servers[s].policy,
                                       static_cast<std::uint64_t>(s)));
  }
  return traces;
}

std::map<std::uint64_t, double> staleness_histogram(const SimTrace& trace) {
  if (trace.staleness_log.empty()) {
    throw ConfigError("staleness_histogram: empty trace");
  }
  std::map<std::uint64_t, double> hist;
  for (std::uint64_t s : trace.staleness_log) hist[s] += 1.0;
  const double total = static_cast<double>(trace.staleness_log.size());
  for (auto& [_, v] : hist) v /= total;
  return hist;
}

// ---------------------------------------------------------------------------
// Real-threads mode

SimTrace run_single_server_threaded(const Model& model, const TestFunction& phi,
                                    const ChainConfig& cfg,
                                    std::size_t workers) {
  cfg.validate();
  if (workers == 0) {
    throw ConfigError("run_single_server_threaded: need at least one worker");
  }
  const std::size_t n = model.data_size();
  if (n > 0 && cfg.minibatch > n) {
    throw ConfigError("run_single_server_threaded: minibatch exceeds dataset size");
  }

  struct Shared {
    std::mutex mu;
    std::condition_variable worker_cv;   // parameter published / stop
    std::condition_variable server_cv;   // gradient available
    Vector current;                      // latest published parameter
    std::uint64_t current_iteration = 0;
    std::deque<GradientMessage> inbox;
    bool stop = false;
  } shared;

  const Eigen::Index dim = model.dim();
  SamplerState state = make_initial_state(model, cfg.kernel);
  shared.current = state.theta;

  RngStream noise(cfg.seed, StreamPurpose::kChainNoise, 0);
  const auto t0 = std::chrono::steady_clock::now();

  auto worker_loop = [&](std::size_t id) {
    RngStream batch_rng(cfg.seed, StreamPurpose::kMinibatch, stream_id(0, id));
    for (;;) {
      Vector theta;
      std::uint64_t issued;
      {
        std::unique_lock lock(shared.mu);
        // Natural backpressure: pause while the server is far behind, and
        // only read the parameter after waking so it is as fresh as possible.
        shared.worker_cv.wait(lock, [&] {
          return shared.stop || shared.inbox.size() < 2 * workers;
        });
        if (shared.stop) return;
        theta = shared.current;
        issued = shared.current_iteration;
      }
      GradientMessage msg;
      msg.worker_id = id;
      msg.issue_iteration = issued;
      if (n == 0) {
        msg.vector = full_gradient(model, theta);
      } else {
        const Minibatch batch = sample_minibatch(n, cfg.minibatch, batch_rng);
        msg.vector = stochastic_gradient(model, theta, batch);
      }
      {
        std::lock_guard lock(shared.mu);
        shared.inbox.push_back(std::move(msg));
      }
      shared.server_cv.notify_one();
    }
  };

  std::vector<std::thread> threads;
  threads.reserve(workers);
  for (std::size_t i = 0; i < workers; ++i) threads.emplace_back(worker_loop, i);

  SimTrace trace;
  std::uint64_t accepted = 0;
  while (accepted < cfg.iterations) {
    GradientMessage msg;
    {
      std::unique_lock lock(shared.mu);
      shared.server_cv.wait(lock, [&] { return !shared.inbox.empty(); });
      msg = std::move(shared.inbox.front());
      shared.inbox.pop_front();
    }
    const std::uint64_t staleness = accepted - msg.issue_iteration;
    if (staleness > cfg.staleness_bound) {
      ++trace.rejected_count;
      shared.worker_cv.notify_all();
      continue;
    }
    const std::size_t source_worker = msg.worker_id;
    StaleGradient g;
    g.value = std::move(msg.vector);
    g.staleness = staleness;
    noise.seek(2 * static_cast<std::uint64_t>(dim) * accepted);
    StepResult r = apply_kernel(state, g, cfg, noise);
    state = std::move(r.state);
    ++accepted;
    {
      std::lock_guard lock(shared.mu);
      shared.current = state.theta;
      shared.current_iteration = accepted;
    }
    shared.worker_cv.notify_all();

    const double elapsed =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - t0)
            .count();
    trace.iterations.push_back(accepted);
    trace.samples.push_back(state.theta);
    trace.staleness_log.push_back(staleness);
    trace.phi_values.push_back(phi(state.theta));
    trace.sim_times.push_back(elapsed);
    trace.worker_log.push_back(source_worker);
  }

  {
    std::lock_guard lock(shared.mu);
    shared.stop = true;
  }
  shared.worker_cv.notify_all();
  for (auto& t : threads) t.join();
  return trace;
}

}  // namespace sgmcmc
