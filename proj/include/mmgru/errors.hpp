// Copyright 2026 The mmgru Authors.
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace mmgru {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Operand shapes are incompatible.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// An argument violates a documented precondition.
class ParameterError : public Error {
 public:
  using Error::Error;
};

class IndexError : public Error {
 public:
  using Error::Error;
};

/// Structural configuration problem (e.g. wrong layer count for a stack kind).
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// Binary file is not what it claims to be (magic, version, checksum).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but semantically inconsistent.
class DataError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Text input could not be parsed; message carries the line number.
class ParseError : public Error {
 public:
  using Error::Error;
};

/// A computation produced NaN or Inf.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace mmgru
