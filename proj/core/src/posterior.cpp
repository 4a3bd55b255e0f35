// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgmcmc/posterior.hpp"

#include <cmath>

#include "sgmcmc/errors.hpp"

namespace sgmcmc {

PosteriorSummary gaussian_posterior_summary(const ScalarDataset& data,
                                            const TestFunction& phi) {
  if (phi.kind() != TestFunction::Kind::kThetaSquared) {
    throw ModelError(
        "gaussian_posterior_summary: closed form available only for the "
        "theta^2 statistic");
  }
  const double precision = static_cast<double>(data.size()) + 1.0;
  PosteriorSummary s;
  s.mean = data.sum() / precision;
  s.variance = 1.0 / precision;
  // E[theta^2] = Var + mean^2
  s.phi_bar = s.variance + s.mean * s.mean;
  return s;
}

namespace {

// Golden-section maximization of f on [lo, hi].
double maximize(const std::function<double(double)>& f, double lo, double hi) {
  constexpr double kInvPhi = 0.6180339887498949;
  double a = lo, b = hi;
  double c = b - kInvPhi * (b - a);
  double d = a + kInvPhi * (b - a);
  double fc = f(c), fd = f(d);
  for (int it = 0; it < 200 && (b - a) > 1e-13 * (1.0 + std::abs(a)); ++it) {
    if (fc > fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - kInvPhi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + kInvPhi * (b - a);
      fd = f(d);
    }
  }
  return 0.5 * (a + b);
}

}  // namespace

double quadrature_posterior_average(const Model& model,
                                    const std::function<double(double)>& phi,
                                    const QuadratureSpec& spec) {
  if (model.dim() != 1) {
    throw ModelError("quadrature_posterior_average: model must be scalar");
  }
  if (spec.intervals < 2 || !(spec.half_width_sigmas > 0.0)) {
    throw ConfigError("quadrature_posterior_average: bad grid spec");
  }

  const auto logp = [&model](double t) {
    Vector v(1);
    v[0] = t;
    return model.log_unnormalized_posterior(v);
  };

  // Locate the mode: coarse bracket scan, then golden-section refinement.
  double best_t = 0.0, best_lp = logp(0.0);
  constexpr double kBracket = 64.0;
  constexpr int kScan = 4096;
  for (int i = 0; i <= kScan; ++i) {
    const double t = -kBracket + 2.0 * kBracket * i / kScan;
    const double lp = logp(t);
    if (lp > best_lp) {
      best_lp = lp;
      best_t = t;
    }
  }
  const double step = 2.0 * kBracket / kScan;
  const double mode = maximize(logp, best_t - step, best_t + step);

  // Local scale from the curvature at the mode (central differences).
  const double eps = 1e-4 * (1.0 + std::abs(mode));
  const double second =
      (logp(mode + eps) - 2.0 * logp(mode) + logp(mode - eps)) / (eps * eps);
  if (!(second < 0.0)) {
    throw ModelError(
        "quadrature_posterior_average: posterior is not locally concave at "
        "the mode");
  }
  const double sd = 1.0 / std::sqrt(-second);

  // Composite Simpson on [mode - w, mode + w] with density normalized by
  // its value at the mode to avoid under/overflow.
  std::size_t n = spec.intervals;
  if (n % 2 == 1) ++n;
  const double w = spec.half_width_sigmas * sd;
  const double lp0 = logp(mode);
  const double h = 2.0 * w / static_cast<double>(n);
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i <= n; ++i) {
    const double t = mode - w + h * static_cast<double>(i);
    const double weight = (i == 0 || i == n) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
    const double density = std::exp(logp(t) - lp0);
    num += weight * density * phi(t);
    den += weight * density;
  }
  return num / den;
}

double quadrature_posterior_average(const Model& model,
                                    const TestFunction& phi,
                                    const QuadratureSpec& spec) {
  return quadrature_posterior_average(
      model,
      [&phi](double t) {
        Vector v(1);
        v[0] = t;
        return phi(v);
      },
      spec);
}

}  // namespace sgmcmc
