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

#include "copsurv/tune.hpp"

#include <cmath>
#include <limits>

#include "copsurv/censoring.hpp"
#include "copsurv/csv.hpp"

namespace copsurv {

namespace {

std::vector<double> steps(int lo, int hi) {
  std::vector<double> out;
  for (int i = lo; i <= hi; ++i) out.push_back(i / 10.0);
  return out;
}

}  // namespace

std::vector<double> default_bandwidths(CopulaKind kind) {
  return kind == CopulaKind::clayton ? steps(5, 15) : steps(1, 9);
}

std::vector<double> default_rho_x_values() { return steps(1, 9); }

PredictiveFit make_prior(CopulaKind kind, double bandwidth, std::optional<double> rho_x, std::size_t dim) {
  PredictiveFit fit = kind == CopulaKind::clayton ? PredictiveFit::clayton(bandwidth) : PredictiveFit::gaussian(bandwidth);
  return rho_x ? fit.with_covariates(dim, *rho_x) : fit;
}

TuneResult grid_search(const SurvivalDataset& data, CopulaKind kind, const TuneGrid& grid) {
  if (grid.bandwidths.empty()) throw ConfigurationError("tuning grid has no bandwidths");
  if (data.has_covariates() && grid.rho_x_values.empty())
    throw ConfigurationError("covariate data needs rho_x values in the tuning grid");
  if (!data.has_covariates() && !grid.rho_x_values.empty())
    throw ConfigurationError("rho_x values given but the data has no covariates");
  std::vector<std::optional<double>> rhos;
  if (data.has_covariates())
    rhos.assign(grid.rho_x_values.begin(), grid.rho_x_values.end());
  else
    rhos.push_back(std::nullopt);

  TuneResult result{{}, {}};
  const ImputeOptions options{grid.B_tune, grid.ess_frac, grid.seed, grid.threads};
  const bool censored = data.observed_count() < data.size();
  for (const double a : grid.bandwidths) {
    for (const auto& r : rhos) {
      const PredictiveFit prior = make_prior(kind, a, r, data.dim());
      TuneCell cell{a, r, -std::numeric_limits<double>::infinity(), 0.0};
      if (!censored) {
        cell.log_marginal = prequential_log_lik(data, prior);
        cell.final_ess = static_cast<double>(grid.B_tune);
      } else {
        try {
          const auto ens = impute_smc(data, prior, options);
          cell.log_marginal = log_marginal_likelihood(ens);
          cell.final_ess = ens.final_ess();
        } catch (const DegeneracyError&) {
        }
      }
      result.table.push_back(cell);
    }
  }
  const TuneCell* best = nullptr;
  for (const auto& c : result.table) {
    if (!std::isfinite(c.log_marginal)) continue;
    const bool better = best == nullptr || c.log_marginal > best->log_marginal ||
                        (c.log_marginal == best->log_marginal &&
                         (c.bandwidth < best->bandwidth ||
                          (c.bandwidth == best->bandwidth && c.rho_x.value_or(0) < best->rho_x.value_or(0))));
    if (better) best = &c;
  }
  if (best == nullptr) throw TuningError("every tuning cell degenerated", result.table);
  result.best = *best;
  return result;
}

std::string tune_table_csv(const std::vector<TuneCell>& table) {
  CsvWriter out({"bandwidth", "rho_x", "log_marginal", "final_ess"});
  for (const auto& c : table)
    out.row({format_number(c.bandwidth), c.rho_x ? format_number(*c.rho_x) : std::string(),
             format_number(c.log_marginal), format_number(c.final_ess)});
  return out.str();
}

}  // namespace copsurv
