// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgmcmc/model.hpp"

#include <cmath>

#include "sgmcmc/errors.hpp"

namespace sgmcmc {

void Model::check_dim(const Vector& theta) const {
  if (theta.size() != dim()) {
    throw ModelError("parameter dimension " + std::to_string(theta.size()) +
                     " does not match model dimension " +
                     std::to_string(dim()));
  }
}

Vector stochastic_gradient(const Model& model, const Vector& theta,
                           std::span<const std::size_t> batch) {
  if (theta.size() != model.dim()) {
    throw ModelError("stochastic_gradient: parameter dimension " +
                     std::to_string(theta.size()) + " != model dimension " +
                     std::to_string(model.dim()));
  }
  const std::size_t n = model.data_size();
  Vector g = -model.grad_log_prior(theta);
  if (n == 0) return g;  // prior-only model
  if (batch.empty()) {
    throw ConfigError("stochastic_gradient: empty minibatch");
  }
  Vector acc = Vector::Zero(model.dim());
  for (std::size_t i : batch) {
    if (i >= n) {
      throw ConfigError("stochastic_gradient: index " + std::to_string(i) +
                        " out of range for " + std::to_string(n) + " items");
    }
    model.add_grad_log_likelihood(theta, i, acc);
  }
  const double scale = static_cast<double>(n) / static_cast<double>(batch.size());
  g -= scale * acc;
  return g;
}

Vector full_gradient(const Model& model, const Vector& theta) {
  if (theta.size() != model.dim()) {
    throw ModelError("full_gradient: parameter dimension " +
                     std::to_string(theta.size()) + " != model dimension " +
                     std::to_string(model.dim()));
  }
  Vector g = -model.grad_log_prior(theta);
  Vector acc = Vector::Zero(model.dim());
  for (std::size_t i = 0; i < model.data_size(); ++i) {
    model.add_grad_log_likelihood(theta, i, acc);
  }
  g -= acc;
  return g;
}

// ---------------------------------------------------------------------------
// GaussianModel

GaussianModel::GaussianModel(ScalarDataset data) : data_(std::move(data)) {}

double GaussianModel::log_unnormalized_posterior(const Vector& theta) const {
  check_dim(theta);
  const double t = theta[0];
  double lp = -0.5 * t * t;
  for (double d : data_.values) {
    const double r = d - t;
    lp -= 0.5 * r * r;
  }
  return lp;
}

Vector GaussianModel::grad_log_prior(const Vector& theta) const {
  check_dim(theta);
  return -theta;
}

void GaussianModel::add_grad_log_likelihood(const Vector& theta,
                                            std::size_t item,
                                            Vector& acc) const {
  acc[0] += data_.values[item] - theta[0];
}

// ---------------------------------------------------------------------------
// LogisticRegressionModel

LogisticRegressionModel::LogisticRegressionModel(
    std::shared_ptr<const SparseDataset> data)
    : data_(std::move(data)) {
  if (!data_) throw ConfigError("LogisticRegressionModel: null dataset");
  if (data_->n_features == 0) {
    throw ConfigError("LogisticRegressionModel: dataset has no features");
  }
}

Eigen::Index LogisticRegressionModel::dim() const {
  return static_cast<Eigen::Index>(data_->n_features);
}

namespace {

double sparse_dot(const Vector& theta, const SparseExample& ex) {
  double z = 0.0;
  for (std::size_t k = 0; k < ex.indices.size(); ++k) {
    z += theta[static_cast<Eigen::Index>(ex.indices[k])] * ex.values[k];
  }
  return z;
}

// log(1 + exp(z)) without overflow.
double log1p_exp(double z) {
  return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

}  // namespace

double LogisticRegressionModel::log_unnormalized_posterior(
    const Vector& theta) const {
  check_dim(theta);
  double lp = -0.5 * theta.squaredNorm();
  for (const auto& ex : data_->items) {
    const double z = sparse_dot(theta, ex);
    lp += static_cast<double>(ex.label) * z - log1p_exp(z);
  }
  return lp;
}

Vector LogisticRegressionModel::grad_log_prior(const Vector& theta) const {
  check_dim(theta);
  return -theta;
}

void LogisticRegressionModel::add_grad_log_likelihood(const Vector& theta,
                                                      std::size_t item,
                                                      Vector& acc) const {
  const SparseExample& ex = data_->items[item];
  const double coef = static_cast<double>(ex.label) - sigmoid(sparse_dot(theta, ex));
  for (std::size_t k = 0; k < ex.indices.size(); ++k) {
    acc[static_cast<Eigen::Index>(ex.indices[k])] += coef * ex.values[k];
  }
}

// ---------------------------------------------------------------------------

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

double logistic_test_loss(const Vector& theta, const SparseDataset& test) {
  if (theta.size() != static_cast<Eigen::Index>(test.n_features)) {
    throw ModelError("logistic_test_loss: parameter dimension " +
                     std::to_string(theta.size()) + " != feature count " +
                     std::to_string(test.n_features));
  }
  double total = 0.0;
  for (const auto& ex : test.items) {
    const double z = sparse_dot(theta, ex);
    total += log1p_exp(z) - static_cast<double>(ex.label) * z;
  }
  return total;
}

TestFunction TestFunction::theta_squared() {
  return TestFunction(Kind::kThetaSquared);
}

TestFunction TestFunction::logistic_loss(
    std::shared_ptr<const SparseDataset> test) {
  if (!test) throw ConfigError("TestFunction::logistic_loss: null test set");
  TestFunction f(Kind::kLogisticLoss);
  f.heldout_ = std::move(test);
  return f;
}

double TestFunction::operator()(const Vector& theta) const {
  switch (kind_) {
    case Kind::kThetaSquared:
      if (theta.size() != 1) {
        throw ModelError("theta_squared statistic requires a scalar model");
      }
      return theta[0] * theta[0];
    case Kind::kLogisticLoss:
      return logistic_test_loss(theta, *heldout_);
  }
  throw ModelError("unknown test function kind");
}

}  // namespace sgmcmc
