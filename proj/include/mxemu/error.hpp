// Copyright 2026 The mxemu Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mxemu {

/// Error categories. The numeric values double as CLI exit codes.
enum class ErrorKind : int {
  kData = 1,
  kIo = 2,
  kConfig = 3,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

/// Bad values in the data itself (NaN, malformed payload, empty summary).
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::kData, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorKind::kIo, what) {}
};

/// Invalid names, group sizes, axes and other parameter problems.
class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorKind::kConfig, what) {}
};

/// Operand shapes that do not fit together.
class ShapeError : public ConfigError {
 public:
  explicit ShapeError(const std::string& what) : ConfigError(what) {}
};

/// A request outside what the emulator implements (format, dimension, path).
class UnsupportedError : public ConfigError {
 public:
  explicit UnsupportedError(const std::string& what) : ConfigError(what) {}
};

}  // namespace mxemu
