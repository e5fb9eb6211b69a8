// Copyright 2026 The CocoAAN Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace cocoaan {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration: bad NetScale, bad SynthConfig, unknown config key.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Tensor shape or contract violation (mismatched dims, non-scalar loss, ...).
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Problems with the glyph data: ingestion failures, exhausted samplers,
/// missing store entries.
class DataError : public Error {
 public:
  using Error::Error;
};

/// A store lookup for a key the store does not cover.
class StoreMissError : public DataError {
 public:
  using DataError::DataError;
};

/// NaN/Inf, degenerate normalizers, diverged training.
class NumericError : public Error {
 public:
  using Error::Error;
};

/// Checkpoint archive cannot be read or written.
class CheckpointError : public Error {
 public:
  using Error::Error;
};

}  // namespace cocoaan
