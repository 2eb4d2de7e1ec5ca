// wsed/errors.hpp

// Copyright 2026  The wsed authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef WSED_ERRORS_HPP_
#define WSED_ERRORS_HPP_

#include <stdexcept>
#include <string>

namespace wsed {

// Base class for every error raised by this library.  The CLI maps the
// subtree rooted at NumericError to exit code 2 and everything else to 1.
class Error : public std::runtime_error {
 public:
  explicit Error(const std::string &msg) : std::runtime_error(msg) {}
};

// Tensor shape mismatches.  Messages name both offending shapes.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// Invalid call arguments (bad axis, bad window, negative delta, ...).
class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Invalid static configuration (filter budget violation, empty class, ...).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Well-formed input that violates a data invariant (probability outside
// [0, 1], onset >= offset, event outside clip duration, ...).
class ValidationError : public Error {
 public:
  using Error::Error;
};

// Malformed file content.  Messages carry the line number where known.
class ParseError : public Error {
 public:
  using Error::Error;
};

// Class name not present in the active class registry.
class RegistryError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// Training diverged.  Message names the failing step.
class TrainingError : public NumericError {
 public:
  using NumericError::NumericError;
};

// Threshold optimization hit a non-finite objective.
class OptimizationError : public NumericError {
 public:
  using NumericError::NumericError;
};

// A requested metric is undefined on the given data.
class ObjectiveError : public Error {
 public:
  using Error::Error;
};

// All attention weight columns for some class sum to zero.
class DegenerateWeightsError : public ValidationError {
 public:
  using ValidationError::ValidationError;
};

}  // namespace wsed

#endif  // WSED_ERRORS_HPP_
