// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <functional>

#include "sgmcmc/model.hpp"

namespace sgmcmc {

//! Closed-form posterior facts for the conjugate Gaussian model, plus the
//! exact posterior average phi_bar of the requested statistic.
struct PosteriorSummary {
  double mean = 0.0;      //!< E[theta | D] = sum(d) / (N + 1)
  double variance = 0.0;  //!< Var[theta | D] = 1 / (N + 1)
  double phi_bar = 0.0;   //!< E[phi(theta) | D]
};

//! Conjugate N(sum/(N+1), 1/(N+1)) summary. Only the theta^2 statistic has
//! a closed form here; other statistics throw ModelError.
PosteriorSummary gaussian_posterior_summary(const ScalarDataset& data,
                                            const TestFunction& phi);

//! Grid controls for the quadrature fallback.
struct QuadratureSpec {
  double half_width_sigmas = 10.0;  //!< grid spans mode +/- this many sd
  std::size_t intervals = 16384;    //!< Simpson subintervals (forced even)
};

//! Posterior average E[phi(theta) | D] for a one-dimensional model by
//! composite-Simpson quadrature of exp(log posterior). The mode and local
//! scale are located numerically from log_unnormalized_posterior alone, so
//! the result is independent of any conjugate shortcut.
double quadrature_posterior_average(const Model& model,
                                    const std::function<double(double)>& phi,
                                    const QuadratureSpec& spec = {});

//! Convenience overload for the statistics used by the experiments.
double quadrature_posterior_average(const Model& model,
                                    const TestFunction& phi,
                                    const QuadratureSpec& spec = {});

}  // namespace sgmcmc
