// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <memory>
#include <span>

#include "sgmcmc/data.hpp"

namespace sgmcmc {

//! A Bayesian model exposing the pieces needed to form stochastic
//! gradients of the negative log posterior.
//!
//! The posterior over N items is p(theta | D) ~ p(theta) * prod_i p(d_i |
//! theta); samplers only ever see gradients assembled by
//! stochastic_gradient() / full_gradient() below.
class Model {
 public:
  virtual ~Model() = default;

  virtual Eigen::Index dim() const = 0;
  virtual std::size_t data_size() const = 0;

  //! log p(theta) + sum_i log p(d_i | theta), up to an additive constant.
  virtual double log_unnormalized_posterior(const Vector& theta) const = 0;

  //! grad_theta log p(theta).
  virtual Vector grad_log_prior(const Vector& theta) const = 0;

  //! Accumulate grad_theta log p(d_item | theta) into acc.
  virtual void add_grad_log_likelihood(const Vector& theta, std::size_t item,
                                       Vector& acc) const = 0;

 protected:
  void check_dim(const Vector& theta) const;
};

//! Unbiased stochastic gradient of the negative log posterior from a
//! minibatch of j indices:
//!   g = -grad log p(theta) - (N/j) * sum_{i in batch} grad log p(d_i|theta).
//! Throws ModelError on dimension mismatch, ConfigError on an empty batch
//! when the model has data.
Vector stochastic_gradient(const Model& model, const Vector& theta,
                           std::span<const std::size_t> batch);

//! Exact gradient of the negative log posterior (all N items; with an
//! empty dataset this is just the negative prior gradient).
Vector full_gradient(const Model& model, const Vector& theta);

//! Conjugate setup: d_i ~ N(theta, 1) with prior theta ~ N(0, 1).
class GaussianModel : public Model {
 public:
  explicit GaussianModel(ScalarDataset data);

  Eigen::Index dim() const override { return 1; }
  std::size_t data_size() const override { return data_.size(); }
  double log_unnormalized_posterior(const Vector& theta) const override;
  Vector grad_log_prior(const Vector& theta) const override;
  void add_grad_log_likelihood(const Vector& theta, std::size_t item,
                               Vector& acc) const override;

  const ScalarDataset& data() const { return data_; }

 private:
  ScalarDataset data_;
};

//! Bayesian logistic regression: y_i ~ Bernoulli(sigmoid(theta . x_i)),
//! prior theta ~ N(0, I).
class LogisticRegressionModel : public Model {
 public:
  explicit LogisticRegressionModel(std::shared_ptr<const SparseDataset> data);

  Eigen::Index dim() const override;
  std::size_t data_size() const override { return data_->size(); }
  double log_unnormalized_posterior(const Vector& theta) const override;
  Vector grad_log_prior(const Vector& theta) const override;
  void add_grad_log_likelihood(const Vector& theta, std::size_t item,
                               Vector& acc) const override;

  const SparseDataset& data() const { return *data_; }

 private:
  std::shared_ptr<const SparseDataset> data_;
};

//! Numerically safe sigmoid.
double sigmoid(double z);

//! Total logistic loss of theta on a held-out set:
//!   sum_i [log(1 + exp(z_i)) - y_i * z_i],  z_i = theta . x_i
//! (so theta = 0 scores M*log 2 on M items). Evaluated via log1p in a
//! form stable for large |z|.
double logistic_test_loss(const Vector& theta, const SparseDataset& test);

//! Scalar statistic phi(theta) whose posterior average the experiments
//! estimate.
class TestFunction {
 public:
  enum class Kind { kThetaSquared, kLogisticLoss };

  //! phi(theta) = theta^2 (scalar models only).
  static TestFunction theta_squared();
  //! phi(theta) = total logistic loss on a held-out set.
  static TestFunction logistic_loss(std::shared_ptr<const SparseDataset> test);

  double operator()(const Vector& theta) const;
  Kind kind() const { return kind_; }

 private:
  explicit TestFunction(Kind kind) : kind_(kind) {}
  Kind kind_;
  std::shared_ptr<const SparseDataset> heldout_;
};

}  // namespace sgmcmc
