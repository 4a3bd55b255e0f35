// Copyright (c) 2026 The sgmcmc Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sgmcmc {

//! Base class for all errors raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

//! Invalid or inconsistent configuration (bad step size, empty replicate
//! count, mismatched list lengths, missing files, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

//! Malformed input that could not be parsed (config files, LIBSVM data,
//! CSV round-trips). Messages identify the offending line or key.
class ParseError : public Error {
 public:
  using Error::Error;
};

//! Dimension mismatches and other model-level contract violations.
class ModelError : public Error {
 public:
  using Error::Error;
};

//! A scheduling policy produced (or was asked to accept) a staleness
//! larger than the configured bound.
class PolicyViolation : public Error {
 public:
  using Error::Error;
};

//! A metric curve never reaches the requested target value.
class TargetUnreachable : public Error {
 public:
  using Error::Error;
};

}  // namespace sgmcmc
