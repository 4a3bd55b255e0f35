// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#include "sgmcmc/rng.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <unordered_set>

#include "sgmcmc/errors.hpp"

namespace sgmcmc {

namespace {

constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ull;

// 64-bit finalizer from splitmix64: bijective, strong avalanche.
std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

// [0, 1) with 53 random bits.
double to_unit(std::uint64_t x) {
  return static_cast<double>(x >> 11) * 0x1.0p-53;
}

// (0, 1]; safe as a log() argument.
double to_unit_positive(std::uint64_t x) {
  return static_cast<double>((x >> 11) + 1) * 0x1.0p-53;
}

}  // namespace

RngStream::RngStream(std::uint64_t seed, StreamPurpose purpose,
                     std::uint64_t id) {
  // Three rounds of mixing keep (seed, purpose, id) triples well separated
  // even for small consecutive values, the common case.
  std::uint64_t k = mix64(seed + kGolden);
  k = mix64(k ^ (static_cast<std::uint64_t>(purpose) * kGolden));
  k = mix64(k ^ (id + kGolden));
  key_ = k;
}

std::uint64_t RngStream::next_u64() {
  ++counter_;
  return mix64(key_ + counter_ * kGolden);
}

double RngStream::uniform() { return to_unit(next_u64()); }

std::uint64_t RngStream::uniform_below(std::uint64_t bound) {
  if (bound == 0) throw ConfigError("uniform_below: bound must be positive");
  // Reject the top sliver so that r % bound is exactly uniform.
  const std::uint64_t threshold = (0 - bound) % bound;
  for (;;) {
    const std::uint64_t r = next_u64();
    if (r >= threshold) return r % bound;
  }
}

double RngStream::normal() {
  const double u1 = to_unit_positive(next_u64());
  const double u2 = to_unit(next_u64());
  return std::sqrt(-2.0 * std::log(u1)) *
         std::cos(2.0 * std::numbers::pi * u2);
}

double RngStream::exponential(double mean) {
  if (!(mean > 0.0)) throw ConfigError("exponential: mean must be positive");
  return -mean * std::log(to_unit_positive(next_u64()));
}

std::vector<std::size_t> sample_distinct(std::size_t n, std::size_t j,
                                         RngStream& rng) {
  if (j == 0) throw ConfigError("sample_distinct: sample size must be >= 1");
  if (j > n) {
    throw ConfigError("sample_distinct: sample size " + std::to_string(j) +
                      " exceeds population " + std::to_string(n));
  }
  std::vector<std::size_t> out;
  out.reserve(j);
  std::unordered_set<std::size_t> seen;
  seen.reserve(j * 2);
  for (std::size_t t = n - j; t < n; ++t) {
    const std::size_t r =
        static_cast<std::size_t>(rng.uniform_below(static_cast<std::uint64_t>(t) + 1));
    if (seen.insert(r).second) {
      out.push_back(r);
    } else {
      seen.insert(t);
      out.push_back(t);
    }
  }
  return out;
}

}  // namespace sgmcmc
