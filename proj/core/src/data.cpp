// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgmcmc/data.hpp"

#include <algorithm>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "sgmcmc/errors.hpp"

namespace sgmcmc {

double ScalarDataset::sum() const {
  double s = 0.0;
  for (double v : values) s += v;
  return s;
}

ScalarDataset generate_gaussian_data(double theta_true, std::size_t n,
                                     std::uint64_t seed) {
  RngStream rng(seed, StreamPurpose::kDataGen, 0);
  ScalarDataset out;
  out.values.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    out.values.push_back(theta_true + rng.normal());
  }
  return out;
}

namespace {

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& what) {
  throw ParseError(path + ":" + std::to_string(line_no) + ": " + what);
}

}  // namespace

SparseDataset parse_libsvm(const std::string& path,
                           std::optional<std::uint32_t> n_features) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open LIBSVM file: " + path);

  SparseDataset data;
  std::uint32_t max_index = 0;  // 1-based max seen
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    // Strip comments and surrounding whitespace.
    if (auto pos = line.find('#'); pos != std::string::npos) {
      line.erase(pos);
    }
    std::istringstream ss(line);
    std::string tok;
    if (!(ss >> tok)) continue;  // blank line

    SparseExample ex;
    char* end = nullptr;
    errno = 0;
    const double label = std::strtod(tok.c_str(), &end);
    if (end != tok.c_str() + tok.size() || errno != 0) {
      parse_fail(path, line_no, "bad label '" + tok + "'");
    }
    if (label == 1.0) {
      ex.label = 1;
    } else if (label == -1.0 || label == 0.0) {
      ex.label = 0;
    } else {
      parse_fail(path, line_no, "label must be -1, 0 or +1, got '" + tok + "'");
    }

    std::uint32_t prev_index = 0;
    while (ss >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 ||
          colon + 1 == tok.size()) {
        parse_fail(path, line_no, "bad feature token '" + tok + "'");
      }
      errno = 0;
      const char* istr = tok.c_str();
      const unsigned long idx = std::strtoul(istr, &end, 10);
      if (end != istr + colon || errno != 0 || idx == 0) {
        parse_fail(path, line_no, "bad feature index in '" + tok + "'");
      }
      const char* vstr = tok.c_str() + colon + 1;
      errno = 0;
      const double val = std::strtod(vstr, &end);
      if (end != tok.c_str() + tok.size() || errno != 0) {
        parse_fail(path, line_no, "bad feature value in '" + tok + "'");
      }
      const auto index32 = static_cast<std::uint32_t>(idx);
      if (index32 <= prev_index) {
        parse_fail(path, line_no, "feature indices must be ascending");
      }
      prev_index = index32;
      max_index = std::max(max_index, index32);
      ex.indices.push_back(index32 - 1);  // store 0-based
      ex.values.push_back(val);
    }
    data.items.push_back(std::move(ex));
  }

  if (n_features) {
    if (*n_features < max_index) {
      throw ParseError(path + ": n_features override " +
                       std::to_string(*n_features) +
                       " is below max feature index " +
                       std::to_string(max_index));
    }
    data.n_features = *n_features;
  } else {
    data.n_features = max_index;
  }
  return data;
}

void write_libsvm(const SparseDataset& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ConfigError("cannot open for writing: " + path);
  for (const auto& ex : data.items) {
    out << (ex.label == 1 ? "+1" : "-1");
    char buf[64];
    for (std::size_t k = 0; k < ex.indices.size(); ++k) {
      std::snprintf(buf, sizeof(buf), " %u:%.17g", ex.indices[k] + 1,
                    ex.values[k]);
      out << buf;
    }
    out << '\n';
  }
  if (!out) throw ConfigError("write failed: " + path);
}

SparseDataset subsample(const SparseDataset& data, std::size_t k,
                        std::uint64_t seed) {
  if (k == 0 || k > data.size()) {
    throw ConfigError("subsample: size " + std::to_string(k) +
                      " not in [1, " + std::to_string(data.size()) + "]");
  }
  RngStream rng(seed, StreamPurpose::kDataGen, 1);
  auto picks = sample_distinct(data.size(), k, rng);
  std::sort(picks.begin(), picks.end());
  SparseDataset out;
  out.n_features = data.n_features;
  out.items.reserve(k);
  for (std::size_t i : picks) out.items.push_back(data.items[i]);
  return out;
}

BlrSyntheticData generate_blr_data(std::size_t n_train, std::size_t n_test,
                                   std::uint32_t n_features, std::uint32_t nnz,
                                   double coef_scale, std::uint64_t seed) {
  if (n_features == 0 || nnz == 0 || nnz > n_features) {
    throw ConfigError("generate_blr_data: need 1 <= nnz <= n_features");
  }
  RngStream coef_rng(seed, StreamPurpose::kDataGen, 2);
  Vector theta_star(n_features);
  for (std::uint32_t f = 0; f < n_features; ++f) {
    theta_star[f] = coef_scale * coef_rng.normal();
  }

  auto make_split = [&](std::size_t n, std::uint64_t stream_id) {
    RngStream rng(seed, StreamPurpose::kDataGen, stream_id);
    SparseDataset split;
    split.n_features = n_features;
    split.items.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      SparseExample ex;
      auto active = sample_distinct(n_features, nnz, rng);
      std::sort(active.begin(), active.end());
      double z = 0.0;
      for (std::size_t f : active) {
        ex.indices.push_back(static_cast<std::uint32_t>(f));
        ex.values.push_back(1.0);
        z += theta_star[static_cast<Eigen::Index>(f)];
      }
      const double p = 1.0 / (1.0 + std::exp(-z));
      ex.label = rng.uniform() < p ? 1 : 0;
      split.items.push_back(std::move(ex));
    }
    return split;
  };

  BlrSyntheticData out;
  out.train = make_split(n_train, 3);
  out.test = make_split(n_test, 4);
  out.coefficients = std::move(theta_star);
  return out;
}

Minibatch sample_minibatch(std::size_t n, std::size_t j, RngStream& rng) {
  return sample_distinct(n, j, rng);
}

}  // namespace sgmcmc
