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

#ifndef COPSURV_TUNE_HPP
#define COPSURV_TUNE_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "copsurv/copulas.hpp"
#include "copsurv/dataset.hpp"
#include "copsurv/errors.hpp"
#include "copsurv/predictive.hpp"

namespace copsurv {

struct TuneGrid {
  std::vector<double> bandwidths;   // Clayton a or Gaussian rho
  std::vector<double> rho_x_values; // empty without covariates
  std::size_t B_tune = 500;
  std::uint64_t seed = 0;
  double ess_frac = 0.5;
  unsigned threads = 1;
};

/// 0.5, 0.6, ..., 1.5 for Clayton; 0.1, ..., 0.9 for Gaussian.
std::vector<double> default_bandwidths(CopulaKind kind);
/// 0.1, ..., 0.9.
std::vector<double> default_rho_x_values();

struct TuneCell {
  double bandwidth;
  std::optional<double> rho_x;
  double log_marginal;  // -inf when the imputation degenerated
  double final_ess;
};

struct TuneResult {
  TuneCell best;
  std::vector<TuneCell> table;  // bandwidth-major, rho_x-minor
};

/// Thrown when every cell degenerates; carries the table.
class TuningError : public Error {
 public:
  TuningError(const std::string& what, std::vector<TuneCell> table)
      : Error(ErrorCategory::degeneracy, what), table_(std::move(table)) {}
  const std::vector<TuneCell>& table() const noexcept { return table_; }

 private:
  std::vector<TuneCell> table_;
};

/// Empty prior fit for one grid cell.
PredictiveFit make_prior(CopulaKind kind, double bandwidth, std::optional<double> rho_x, std::size_t dim);

/// Scores every cell by the SMC log marginal likelihood (the prequential
/// log-likelihood when nothing is censored) using the same seed for every
/// cell. Ties go to the smallest bandwidth, then the smallest rho_x.
TuneResult grid_search(const SurvivalDataset& data, CopulaKind kind, const TuneGrid& grid);

/// Columns bandwidth, rho_x, log_marginal, final_ess (rho_x empty without covariates).
std::string tune_table_csv(const std::vector<TuneCell>& table);

}  // namespace copsurv

#endif  // COPSURV_TUNE_HPP
