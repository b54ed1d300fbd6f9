// Copyright 2026 The neurobolt Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace neurobolt {

/// Base class of every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Caller supplied an argument or configuration that violates a precondition.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// On-disk data (scan bundles, checkpoints, configs) is malformed or inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A numerical computation could not produce a meaningful result.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace neurobolt
