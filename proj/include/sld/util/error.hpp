// Copyright 2026 The sld Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <stdexcept>
#include <string>

namespace sld {

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Operand shapes do not conform to an operation.
class ShapeError : public Error {
public:
    using Error::Error;
};

/// A file does not follow the expected binary or text layout.
class FormatError : public Error {
public:
    using Error::Error;
};

/// Invalid or inconsistent configuration values.
class ConfigError : public Error {
public:
    using Error::Error;
};

/// NaN/Inf encountered, divergence, or another numerical failure.
class NumericError : public Error {
public:
    using Error::Error;
};

/// A dataset or label set violates a precondition (class coverage, empty rows, ...).
class DataError : public Error {
public:
    using Error::Error;
};

}  // namespace sld
