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

#ifndef COPSURV_DATASET_HPP
#define COPSURV_DATASET_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace copsurv {

using CovariateMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

/// Per-column covariate standardization. Columns with zero spread are dropped
/// from the working covariate matrix and flagged here.
struct CovariateScaling {
  double mean = 0.0;
  double sd = 1.0;
  bool dropped = false;
};

/// Right-censored survival records in processing order.
///
/// `times` holds the event time for observed records and the censoring time
/// otherwise. `order[i]` is the row of the source file that ended up at
/// position i, so the original ordering can always be reconstructed.
struct SurvivalDataset {
  Eigen::VectorXd times;
  Eigen::VectorXi status;  // 1 observed, 0 right-censored
  CovariateMatrix covariates;  // n x d, d == 0 without covariates
  std::vector<std::string> covariate_names;

  double scale_factor = 1.0;  // working times = source times * scale_factor
  std::vector<CovariateScaling> covariate_scaling;  // one per source column once standardized
  std::vector<std::size_t> order;

  std::size_t size() const { return static_cast<std::size_t>(times.size()); }
  std::size_t dim() const { return static_cast<std::size_t>(covariates.cols()); }
  bool has_covariates() const { return covariates.cols() > 0; }
  bool observed(std::size_t i) const { return status[static_cast<Eigen::Index>(i)] == 1; }
  std::size_t observed_count() const;
  double censored_fraction() const;

  std::span<const double> covariate(std::size_t i) const {
    if (!has_covariates()) return {};
    return {covariates.row(static_cast<Eigen::Index>(i)).data(), dim()};
  }
};

/// Builds a dataset in the given order (order = identity) and validates it.
SurvivalDataset make_dataset(const Eigen::VectorXd& times, const Eigen::VectorXi& status,
                             const CovariateMatrix& covariates = CovariateMatrix(),
                             std::vector<std::string> covariate_names = {});

/// Throws DataError when the invariants (positive times, binary status,
/// matching covariate rows) are violated.
void validate(const SurvivalDataset& data);

struct CsvSchema {
  std::string time_column = "time";
  std::string status_column = "status";
  std::vector<std::string> covariate_columns;
  /// Keep only rows whose `filter_column` equals `filter_value` (e.g. a trial arm).
  std::optional<std::string> filter_column;
  std::string filter_value;
};

/// Reads a comma-separated file with a header row. Rows keep file order.
SurvivalDataset load_csv(const std::string& path, const CsvSchema& schema = {});
SurvivalDataset parse_csv(const std::string& text, const CsvSchema& schema = {});

/// Writes the ingestion schema (time, status, covariates...).
std::string to_csv(const SurvivalDataset& data);

struct StandardizeOptions {
  bool zscore_covariates = true;
};

/// Multiplies times by the exponential rate MLE sum(status)/sum(times) so the
/// working rate MLE is 1, and z-scores covariate columns.
SurvivalDataset standardize(const SurvivalDataset& data, const StandardizeOptions& options = {});

/// Applies the scaling recorded on `reference` (a standardized training set)
/// to another dataset with the same source columns.
SurvivalDataset apply_standardization(const SurvivalDataset& data, const SurvivalDataset& reference);

/// Maps a covariate vector in source units onto the working scale of `reference`.
std::vector<double> transform_covariates(std::span<const double> x, const SurvivalDataset& reference);

/// Uniformly random reordering, reproducible from the seed.
SurvivalDataset permute(const SurvivalDataset& data, std::uint64_t seed);

/// Observed records first (in current order) followed by the censored ones.
SurvivalDataset observed_first(const SurvivalDataset& data);

/// Records at the given positions, in that order.
SurvivalDataset subset(const SurvivalDataset& data, std::span<const std::size_t> positions);

/// Returns the dataset in source-file order.
SurvivalDataset restore_order(const SurvivalDataset& data);

/// Y ~ Exp(rate_y), C ~ Exp(rate_c); records min(Y, C) with status 1 iff Y < C.
SurvivalDataset simulate_exponential(std::size_t n, double rate_y, double rate_c, std::uint64_t seed);

/// Random split into (train, test) position lists with round(fraction * n) test records.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> train_test_split(
    std::size_t n, double test_fraction, std::uint64_t seed);

}  // namespace copsurv

#endif  // COPSURV_DATASET_HPP
