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

#include "copsurv/censoring.hpp"

#include <numeric>

#include "copsurv/csv.hpp"

namespace copsurv {

namespace detail {

std::vector<DiagnosticRow> make_diagnostics(std::span<const double> ess,
                                            std::span<const std::size_t> unique,
                                            std::span<const std::size_t> resample_steps) {
  std::vector<DiagnosticRow> rows(ess.size());
  for (std::size_t i = 0; i < ess.size(); ++i) {
    rows[i] = {i + 1, ess[i], i < unique.size() ? unique[i] : 0, false};
  }
  for (const auto s : resample_steps)
    if (s < rows.size()) rows[s].resampled = true;
  return rows;
}

std::size_t count_unique(std::span<const std::size_t> ids) {
  std::vector<std::size_t> sorted(ids.begin(), ids.end());
  std::sort(sorted.begin(), sorted.end());
  return static_cast<std::size_t>(std::unique(sorted.begin(), sorted.end()) - sorted.begin());
}

}  // namespace detail

double ess(std::span<const double> weights) {
  double s = 0.0;
  for (double w : weights) {
    if (!(w >= 0) || !std::isfinite(w)) throw std::invalid_argument("ess: weights must be finite and nonnegative");
    s += w;
  }
  if (!(s > 0)) throw DegeneracyError("ess: every weight is zero", {});
  double s2 = 0.0;
  for (double w : weights) s2 += w * w;
  return s * s / s2;
}

std::vector<std::size_t> systematic_resample(std::span<const double> weights, double uniform) {
  const std::size_t B = weights.size();
  if (B == 0) return {};
  if (!(uniform >= 0) || !(uniform < 1)) throw std::invalid_argument("systematic_resample: offset must lie in [0, 1)");
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  if (!(total > 0)) throw DegeneracyError("systematic_resample: every weight is zero", {});
  std::vector<std::size_t> idx(B);
  double cum = weights[0] / total;
  std::size_t j = 0;
  const double step = 1.0 / static_cast<double>(B);
  for (std::size_t k = 0; k < B; ++k) {
    const double pos = (uniform + static_cast<double>(k)) * step;
    while (pos >= cum && j + 1 < B) cum += weights[++j] / total;
    // Rounding in the running sum can leave trailing zero-weight entries selectable.
    std::size_t pick = j;
    while (weights[pick] == 0.0 && pick > 0) --pick;
    idx[k] = pick;
  }
  return idx;
}

ParticleEnsemble<PredictiveFit> impute_smc(const SurvivalDataset& data, const PredictiveFit& prior,
                                           const ImputeOptions& options) {
  if (data.has_covariates() != prior.has_covariates())
    throw ConfigurationError("covariates must be present in both the data and the fit, or neither");
  if (prior.has_covariates() && prior.dim() != data.dim())
    throw ShapeError("data has " + std::to_string(data.dim()) + " covariates, fit expects " +
                     std::to_string(prior.dim()));
  auto ens = impute_smc<PredictiveFit>(data, prior, options);
  for (auto& p : ens.particles) p.fit.set_permutation(data.order);
  return ens;
}

HeldoutScore heldout_log_likelihood(const ParticleEnsemble<PredictiveFit>& ensemble,
                                    const SurvivalDataset& test, unsigned threads) {
  if (test.size() == 0) throw DataError("held-out evaluation needs at least one record");
  const auto w = ensemble.normalized_weights();
  HeldoutScore score{0.0, 0.0, std::vector<double>(test.size())};
  parallel_for(test.size(), threads, [&](std::size_t r) {
    const double t = test.times[static_cast<Eigen::Index>(r)];
    const auto x = test.covariate(r);
    double mix = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) {
      if (w[j] == 0.0) continue;
      const EvalPoint at = ensemble.particles[j].fit.evaluate(t, x);
      mix += w[j] * (test.observed(r) ? at.density : 1.0 - at.cdf);
    }
    score.per_record[r] = std::log(mix);
  });
  const double m = static_cast<double>(test.size());
  score.mean = std::accumulate(score.per_record.begin(), score.per_record.end(), 0.0) / m;
  if (test.size() > 1) {
    double ss = 0.0;
    for (double v : score.per_record) ss += (v - score.mean) * (v - score.mean);
    score.standard_error = std::sqrt(ss / (m - 1.0) / m);
  }
  return score;
}

std::string diagnostics_csv(std::span<const DiagnosticRow> rows) {
  CsvWriter out({"step", "ess", "unique_particles", "resampled"});
  for (const auto& r : rows)
    out.row({static_cast<double>(r.step), r.ess, static_cast<double>(r.unique_particles),
             r.resampled ? 1.0 : 0.0});
  return out.str();
}

}  // namespace copsurv
