// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <vector>

#include <sgmcmc/data.hpp>
#include <sgmcmc/errors.hpp>
#include <sgmcmc/model.hpp>
#include <sgmcmc/sampler.hpp>

using namespace sgmcmc;

namespace {

GaussianModel desk_model() {
  return GaussianModel(generate_gaussian_data(0.0, 10, 42));
}

ChainConfig desk_config(KernelKind kernel) {
  ChainConfig cfg;
  cfg.kernel = kernel;
  cfg.step_size = 0.05 / 11.0;
  cfg.friction = 1.0;
  cfg.minibatch = 5;
  cfg.iterations = 200;
  cfg.seed = 1;
  return cfg;
}

Vector scalar(double v) {
  Vector x(1);
  x[0] = v;
  return x;
}

}  // namespace

TEST_CASE("chain config validation") {
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  CHECK_NOTHROW(cfg.validate());

  ChainConfig bad = cfg;
  bad.step_size = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.step_size = -1.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.iterations = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.minibatch = 0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.integrator_order = 2;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.burn_in = bad.iterations;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
  bad = cfg;
  bad.kernel = KernelKind::kSghmc;
  bad.friction = 0.0;
  CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("chain config warnings flag a non-contractive SGHMC setup") {
  ChainConfig cfg = desk_config(KernelKind::kSghmc);
  CHECK(cfg.warnings().empty());
  cfg.friction = 3.0;
  cfg.step_size = 0.5;  // friction * step = 1.5
  auto warns = cfg.warnings();
  REQUIRE(warns.size() == 1);
  CHECK(warns[0].find("contraction") != std::string::npos);
}

TEST_CASE("initial state shape follows the kernel") {
  auto model = desk_model();
  auto sgld = make_initial_state(model, KernelKind::kSgld);
  CHECK(sgld.theta.size() == 1);
  CHECK(sgld.theta[0] == 0.0);
  CHECK_FALSE(sgld.momentum.has_value());
  CHECK(sgld.iteration == 0);

  auto sghmc = make_initial_state(model, KernelKind::kSghmc);
  REQUIRE(sghmc.momentum.has_value());
  CHECK((*sghmc.momentum)[0] == 0.0);
}

TEST_CASE("sgld_step reproduces the update rule exactly") {
  SamplerState state;
  state.theta = scalar(0.7);
  state.iteration = 4;
  const double h = 0.01;
  Vector g = scalar(-2.5);

  RngStream noise(9, StreamPurpose::kChainNoise, 0);
  RngStream twin(9, StreamPurpose::kChainNoise, 0);
  const double zeta = twin.normal();

  SamplerState next = sgld_step(state, g, h, noise);
  CHECK(next.theta[0] == 0.7 - h * (-2.5) + std::sqrt(2.0 * h) * zeta);
  CHECK(next.iteration == 5);
  CHECK(state.theta[0] == 0.7);  // input untouched

  CHECK_THROWS_AS((void)sgld_step(state, Vector::Zero(2), h, noise),
                  ModelError);
  CHECK_THROWS_AS((void)sgld_step(state, g, 0.0, noise), ConfigError);
}

TEST_CASE("sgld noise has variance 2h") {
  const double h = 0.05 / 11.0;
  RngStream noise(3, StreamPurpose::kChainNoise, 0);
  SamplerState zero;
  zero.theta = scalar(0.0);
  Vector g = scalar(0.0);

  const int n = 100000;
  double sum = 0.0, sum_sq = 0.0;
  for (int i = 0; i < n; ++i) {
    double t = sgld_step(zero, g, h, noise).theta[0];
    sum += t;
    sum_sq += t * t;
  }
  double mean = sum / n;
  double var = sum_sq / n - mean * mean;
  CHECK(std::abs(var - 2.0 * h) < 0.05 * (2.0 * h));
}

TEST_CASE("sghmc_step reproduces the update rule exactly") {
  SamplerState state;
  state.theta = scalar(0.5);
  state.momentum = scalar(1.2);
  state.iteration = 7;

  ChainConfig cfg = desk_config(KernelKind::kSghmc);
  cfg.step_size = 0.1;
  cfg.friction = 2.0;
  cfg.staleness_bound = 3;

  StaleGradient g;
  g.value = scalar(0.3);
  g.staleness = 3;  // exactly at the bound: accepted

  RngStream noise(11, StreamPurpose::kChainNoise, 0);
  RngStream twin(11, StreamPurpose::kChainNoise, 0);
  const double zeta = twin.normal();

  StepResult r = sghmc_step(state, g, cfg, noise);
  REQUIRE(r.accepted);
  const double q = (1.0 - 2.0 * 0.1) * 1.2 - 0.1 * 0.3 +
                   std::sqrt(2.0 * 2.0 * 0.1) * zeta;
  CHECK((*r.state.momentum)[0] == q);
  CHECK(r.state.theta[0] == 0.5 + 0.1 * q);
  CHECK(r.state.iteration == 8);
}

TEST_CASE("sghmc_step rejects over-stale gradients without consuming noise") {
  SamplerState state;
  state.theta = scalar(0.5);
  state.momentum = scalar(1.2);
  state.iteration = 7;

  ChainConfig cfg = desk_config(KernelKind::kSghmc);
  cfg.staleness_bound = 3;

  StaleGradient g;
  g.value = scalar(0.3);
  g.staleness = 5;  // above the bound

  RngStream noise(11, StreamPurpose::kChainNoise, 0);
  const auto counter_before = noise.counter();
  StepResult r = sghmc_step(state, g, cfg, noise);
  CHECK_FALSE(r.accepted);
  CHECK(r.state.theta[0] == 0.5);
  CHECK((*r.state.momentum)[0] == 1.2);
  CHECK(r.state.iteration == 7);
  CHECK(noise.counter() == counter_before);
}

TEST_CASE("sghmc_step validates its inputs") {
  ChainConfig cfg = desk_config(KernelKind::kSghmc);
  RngStream noise(1, StreamPurpose::kChainNoise, 0);

  SamplerState no_momentum;
  no_momentum.theta = scalar(0.0);
  StaleGradient g;
  g.value = scalar(0.0);
  CHECK_THROWS_AS((void)sghmc_step(no_momentum, g, cfg, noise), ModelError);

  SamplerState ok;
  ok.theta = scalar(0.0);
  ok.momentum = scalar(0.0);
  StaleGradient wrong_dim;
  wrong_dim.value = Vector::Zero(3);
  CHECK_THROWS_AS((void)sghmc_step(ok, wrong_dim, cfg, noise), ModelError);
}

TEST_CASE("apply_kernel guards SGLD by staleness too") {
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  cfg.staleness_bound = 1;
  SamplerState state;
  state.theta = scalar(2.0);
  StaleGradient g;
  g.value = scalar(1.0);
  g.staleness = 2;
  RngStream noise(1, StreamPurpose::kChainNoise, 0);
  StepResult r = apply_kernel(state, g, cfg, noise);
  CHECK_FALSE(r.accepted);
  CHECK(r.state.theta[0] == 2.0);
  CHECK(noise.counter() == 0);

  g.staleness = 1;
  r = apply_kernel(state, g, cfg, noise);
  CHECK(r.accepted);
  CHECK(r.state.theta[0] != 2.0);
}

TEST_CASE("sghmc momentum contracts in expectation with zero gradient") {
  // q_{l+1} = (1 - Bh) q_l + noise with 1 - Bh = 0.5: from q_0 = 10 the
  // replicate-average |q_l| must fall monotonically toward the stationary
  // scale (~1) before flattening out.
  ChainConfig cfg = desk_config(KernelKind::kSghmc);
  cfg.step_size = 0.5;
  cfg.friction = 1.0;
  cfg.staleness_bound = 0;

  const int reps = 2000, steps = 10;
  std::vector<double> mean_abs(steps + 1, 0.0);
  for (int r = 0; r < reps; ++r) {
    SamplerState s;
    s.theta = scalar(0.0);
    s.momentum = scalar(10.0);
    RngStream noise(100 + static_cast<std::uint64_t>(r),
                    StreamPurpose::kChainNoise, 0);
    mean_abs[0] += 10.0;
    for (int l = 1; l <= steps; ++l) {
      StaleGradient g;
      g.value = scalar(0.0);
      s = sghmc_step(s, g, cfg, noise).state;
      mean_abs[static_cast<std::size_t>(l)] += std::abs((*s.momentum)[0]);
    }
  }
  for (auto& v : mean_abs) v /= reps;
  // Strict decrease while far from stationarity (E|q| halves each step).
  for (int l = 1; l <= 4; ++l) {
    CHECK(mean_abs[static_cast<std::size_t>(l)] <
          mean_abs[static_cast<std::size_t>(l - 1)]);
  }
  CHECK(mean_abs[steps] < 1.5);
}

TEST_CASE("run_chain with zero delay matches a hand-rolled SGLD loop") {
  auto model = desk_model();
  auto phi = TestFunction::theta_squared();
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  auto trace = run_chain(model, phi, cfg, zero_delay());
  REQUIRE(trace.length() == cfg.iterations);

  RngStream noise(cfg.seed, StreamPurpose::kChainNoise, 0);
  RngStream batch_rng(cfg.seed, StreamPurpose::kMinibatch, 0);
  Vector theta = Vector::Zero(1);
  for (std::uint64_t l = 0; l < cfg.iterations; ++l) {
    auto batch = sample_minibatch(10, cfg.minibatch, batch_rng);
    Vector g = stochastic_gradient(model, theta, batch);
    noise.seek(2 * l);
    const double zeta = noise.normal();
    theta[0] = theta[0] - cfg.step_size * g[0] +
               std::sqrt(2.0 * cfg.step_size) * zeta;
    REQUIRE(trace.samples[l][0] == theta[0]);  // bitwise
    CHECK(trace.staleness_log[l] == 0);
    CHECK(trace.iterations[l] == l + 1);
    CHECK(trace.sim_times[l] == static_cast<double>(l + 1));
    CHECK(trace.phi_values[l] == theta[0] * theta[0]);
    CHECK(trace.worker_log[l] == 0);
  }
  CHECK(trace.rejected_count == 0);
}

TEST_CASE("run_chain with zero delay matches a hand-rolled SGHMC loop") {
  auto model = desk_model();
  auto phi = TestFunction::theta_squared();
  ChainConfig cfg = desk_config(KernelKind::kSghmc);
  auto trace = run_chain(model, phi, cfg, zero_delay());

  RngStream noise(cfg.seed, StreamPurpose::kChainNoise, 0);
  RngStream batch_rng(cfg.seed, StreamPurpose::kMinibatch, 0);
  const double h = cfg.step_size, b = cfg.friction;
  double theta = 0.0, q = 0.0;
  Vector th = Vector::Zero(1);
  for (std::uint64_t l = 0; l < cfg.iterations; ++l) {
    auto batch = sample_minibatch(10, cfg.minibatch, batch_rng);
    th[0] = theta;
    Vector g = stochastic_gradient(model, th, batch);
    noise.seek(2 * l);
    const double zeta = noise.normal();
    q = (1.0 - b * h) * q - h * g[0] + std::sqrt(2.0 * b * h) * zeta;
    theta += h * q;
    REQUIRE(trace.samples[l][0] == theta);
  }
}

TEST_CASE("run_chain honors a fixed staleness schedule") {
  auto model = desk_model();
  auto phi = TestFunction::theta_squared();
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  cfg.staleness_bound = 2;
  auto trace = run_chain(model, phi, cfg, fixed_delay(2));

  // Reference loop with full history: update l differentiates at
  // theta_{l - min(2, l)}.
  RngStream noise(cfg.seed, StreamPurpose::kChainNoise, 0);
  RngStream batch_rng(cfg.seed, StreamPurpose::kMinibatch, 0);
  std::vector<double> history = {0.0};
  for (std::uint64_t l = 0; l < cfg.iterations; ++l) {
    const std::uint64_t tau = std::min<std::uint64_t>(2, l);
    Vector base = scalar(history[static_cast<std::size_t>(l - tau)]);
    auto batch = sample_minibatch(10, cfg.minibatch, batch_rng);
    Vector g = stochastic_gradient(model, base, batch);
    noise.seek(2 * l);
    const double zeta = noise.normal();
    const double next = history.back() - cfg.step_size * g[0] +
                        std::sqrt(2.0 * cfg.step_size) * zeta;
    history.push_back(next);
    REQUIRE(trace.samples[l][0] == next);
    CHECK(trace.staleness_log[l] == tau);
  }
}

TEST_CASE("warm-up clamps the schedule to the available history") {
  auto model = desk_model();
  auto phi = TestFunction::theta_squared();
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  cfg.iterations = 3;
  cfg.staleness_bound = 5;
  auto trace = run_chain(model, phi, cfg, fixed_delay(5));
  REQUIRE(trace.length() == 3);
  CHECK(trace.staleness_log[0] == 0);
  CHECK(trace.staleness_log[1] == 1);
  CHECK(trace.staleness_log[2] == 2);
}

TEST_CASE("a schedule above the bound raises PolicyViolation") {
  auto model = desk_model();
  auto phi = TestFunction::theta_squared();
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  cfg.staleness_bound = 2;
  CHECK_THROWS_AS((void)run_chain(model, phi, cfg, fixed_delay(3)),
                  PolicyViolation);
}

TEST_CASE("ring buffer handles a bound as large as the run") {
  // With delay = L every update differentiates at theta_0; easy to verify
  // against an explicit loop, and it stresses the wrap-around logic.
  auto model = desk_model();
  auto phi = TestFunction::theta_squared();
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  cfg.iterations = 50;
  cfg.staleness_bound = 50;
  auto trace = run_chain(model, phi, cfg, fixed_delay(50));

  RngStream noise(cfg.seed, StreamPurpose::kChainNoise, 0);
  RngStream batch_rng(cfg.seed, StreamPurpose::kMinibatch, 0);
  // tau = min(50, l) = l, so every update differentiates at theta_0 = 0.
  const Vector base = Vector::Zero(1);
  double theta = 0.0;
  for (std::uint64_t l = 0; l < 50; ++l) {
    auto batch = sample_minibatch(10, cfg.minibatch, batch_rng);
    Vector g = stochastic_gradient(model, base, batch);
    noise.seek(2 * l);
    theta = theta - cfg.step_size * g[0] +
            std::sqrt(2.0 * cfg.step_size) * noise.normal();
    REQUIRE(trace.samples[l][0] == theta);
    CHECK(trace.staleness_log[l] == l);
  }
}

TEST_CASE("run_chain is deterministic and keyed by chain_id") {
  auto model = desk_model();
  auto phi = TestFunction::theta_squared();
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  auto a = run_chain(model, phi, cfg, zero_delay());
  auto b = run_chain(model, phi, cfg, zero_delay());
  REQUIRE(a.length() == b.length());
  for (std::size_t l = 0; l < a.length(); ++l) {
    REQUIRE(a.samples[l][0] == b.samples[l][0]);
  }
  auto c = run_chain(model, phi, cfg, zero_delay(), 1);
  bool differs = false;
  for (std::size_t l = 0; l < a.length(); ++l) {
    differs |= (a.samples[l][0] != c.samples[l][0]);
  }
  CHECK(differs);
}

TEST_CASE("run_chain rejects a minibatch larger than the dataset") {
  auto model = desk_model();
  auto phi = TestFunction::theta_squared();
  ChainConfig cfg = desk_config(KernelKind::kSgld);
  cfg.minibatch = 11;
  CHECK_THROWS_AS((void)run_chain(model, phi, cfg, zero_delay()), ConfigError);
}
