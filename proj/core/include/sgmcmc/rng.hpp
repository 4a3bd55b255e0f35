// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <vector>

namespace sgmcmc {

//! Logical role of a derived random stream. Streams with different
//! purposes never collide even when they share a seed and id, which is
//! what keeps e.g. minibatch indices independent of injected noise.
enum class StreamPurpose : std::uint64_t {
  kDataGen = 1,    //!< synthetic dataset generation
  kChainNoise = 2, //!< Gaussian noise injected by the transition kernels
  kMinibatch = 3,  //!< minibatch index sampling (one stream per worker)
  kSchedule = 4,   //!< simulated gradient compute durations
  kSelection = 5,  //!< scheduler tie-breaking / random-ready choices
};

//! Counter-addressable random stream.
//!
//! The i-th output is a pure function of (key, i): a 64-bit mix of
//! key + (i+1)*golden_gamma. This gives every (seed, purpose, id) triple
//! an independent stream whose position can be set in O(1) with seek(),
//! so a consumer can jump straight to "the noise for iteration l" without
//! replaying the draws in between. No state beyond (key, counter) exists;
//! in particular normal() never caches a spare variate.
class RngStream {
 public:
  RngStream() = default;
  RngStream(std::uint64_t seed, StreamPurpose purpose, std::uint64_t id = 0);

  //! Next raw 64-bit output; advances the counter by one.
  std::uint64_t next_u64();

  //! Uniform double in [0, 1). One counter.
  double uniform();

  //! Uniform integer in [0, bound). Unbiased (rejection from the top);
  //! consumes one counter per attempt, almost always exactly one.
  std::uint64_t uniform_below(std::uint64_t bound);

  //! Standard normal via Box-Muller (cosine branch only). Always consumes
  //! exactly two counters, so dim normals occupy a fixed counter span.
  double normal();

  //! Exponential with the given mean (> 0). One counter.
  double exponential(double mean);

  //! Reposition the stream at an absolute counter value.
  void seek(std::uint64_t counter) { counter_ = counter; }
  std::uint64_t counter() const { return counter_; }
  std::uint64_t key() const { return key_; }

 private:
  std::uint64_t key_ = 0;
  std::uint64_t counter_ = 0;
};

//! Sample j distinct indices from {0, ..., n-1} (Floyd's algorithm).
//! Result order is the insertion order of the algorithm, deterministic
//! given the stream state. Throws ConfigError if j == 0 or j > n.
std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t j,
                                         RngStream& rng);

}  // namespace sgmcmc
