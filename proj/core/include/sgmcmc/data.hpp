// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "sgmcmc/rng.hpp"

namespace sgmcmc {

using Vector = Eigen::VectorXd;

//! Scalar observations for the conjugate Gaussian model.
struct ScalarDataset {
  std::vector<double> values;

  std::size_t size() const { return values.size(); }
  double sum() const;
};

//! Draw n observations d_i ~ N(theta_true, 1), deterministically in
//! (theta_true, n, seed).
ScalarDataset generate_gaussian_data(double theta_true, std::size_t n,
                                     std::uint64_t seed);

//! One sparse example: parallel index/value arrays plus a binary label.
struct SparseExample {
  std::vector<std::uint32_t> indices;  //!< 0-based feature indices, ascending
  std::vector<double> values;
  int label = 0;  //!< 0 or 1 (LIBSVM -1 maps to 0)
};

//! Sparse binary-classification dataset (LIBSVM-shaped).
struct SparseDataset {
  std::vector<SparseExample> items;
  std::uint32_t n_features = 0;

  std::size_t size() const { return items.size(); }
};

//! Parse a LIBSVM text file: one "label idx:val idx:val ..." line per
//! example, 1-based indices, labels in {-1, +1} or {0, 1}. Blank lines and
//! '#' comments are skipped. n_features defaults to the max index seen;
//! an explicit override must be at least that. Throws ParseError with the
//! line number on malformed input.
SparseDataset parse_libsvm(const std::string& path,
                           std::optional<std::uint32_t> n_features = {});

//! Write a dataset back out in LIBSVM text format (labels -1/+1).
void write_libsvm(const SparseDataset& data, const std::string& path);

//! Deterministic subsample of k items (original order preserved).
SparseDataset subsample(const SparseDataset& data, std::size_t k,
                        std::uint64_t seed);

//! Synthetic sparse logistic-regression data: train and test share one
//! ground-truth coefficient vector drawn from the seed.
struct BlrSyntheticData {
  SparseDataset train;
  SparseDataset test;
  Vector coefficients;
};

//! Each example activates nnz distinct features with value 1; the label is
//! Bernoulli(sigmoid(theta* . x)) with theta* ~ N(0, coef_scale^2 I).
BlrSyntheticData generate_blr_data(std::size_t n_train, std::size_t n_test,
                                   std::uint32_t n_features, std::uint32_t nnz,
                                   double coef_scale, std::uint64_t seed);

//! Indices into a dataset forming one minibatch.
using Minibatch = std::vector<std::size_t>;

//! Uniform minibatch of j distinct indices from {0, ..., n-1}.
Minibatch sample_minibatch(std::size_t n, std::size_t j, RngStream& rng);

}  // namespace sgmcmc
