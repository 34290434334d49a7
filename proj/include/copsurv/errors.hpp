// Copyright 2026 The copsurv Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef COPSURV_ERRORS_HPP
#define COPSURV_ERRORS_HPP

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace copsurv {

/// Broad failure classes. The CLI maps each to an exit code.
enum class ErrorCategory { config, data, degeneracy };

inline const char* category_name(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::config: return "config";
    case ErrorCategory::data: return "data";
    case ErrorCategory::degeneracy: return "degeneracy";
  }
  return "unknown";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}
  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

/// Inconsistent configuration, e.g. a covariate handed to a fit without covariates.
class ConfigurationError : public Error {
 public:
  explicit ConfigurationError(const std::string& what)
      : Error(ErrorCategory::config, what) {}
};

/// Mismatched dimensions between covariate vectors or matrices.
class ShapeError : public ConfigurationError {
 public:
  explicit ShapeError(const std::string& what) : ConfigurationError(what) {}
};

/// Malformed or unusable input data.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorCategory::data, what) {}
};

/// CSV parse failure tied to a 1-based data row (header excluded).
class ParseError : public DataError {
 public:
  ParseError(std::size_t row, const std::string& what)
      : DataError("row " + std::to_string(row) + ": " + what), row_(row) {}
  std::size_t row() const noexcept { return row_; }

 private:
  std::size_t row_;
};

/// A grid row never reaches the requested probability level.
class CoverageError : public DataError {
 public:
  explicit CoverageError(const std::string& what) : DataError(what) {}
};

/// One row of the sequential imputation trace.
struct DiagnosticRow {
  std::size_t step;
  double ess;
  std::size_t unique_particles;
  bool resampled;
};

/// Every particle weight collapsed to zero. Carries the trace up to the failure.
class DegeneracyError : public Error {
 public:
  DegeneracyError(const std::string& what, std::vector<DiagnosticRow> trace)
      : Error(ErrorCategory::degeneracy, what), trace_(std::move(trace)) {}
  const std::vector<DiagnosticRow>& trace() const noexcept { return trace_; }

 private:
  std::vector<DiagnosticRow> trace_;
};

}  // namespace copsurv

#endif  // COPSURV_ERRORS_HPP
