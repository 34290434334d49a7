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

#include "copsurv/resampling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "copsurv/csv.hpp"
#include "copsurv/errors.hpp"
#include "copsurv/parallel.hpp"

namespace copsurv {

GridSpec::GridSpec(Eigen::ArrayXd points) : points_(std::move(points)) {
  if (points_.size() < 2) throw ConfigurationError("grid needs at least two points");
  if (!(points_[0] >= 0)) throw ConfigurationError("grid points must be nonnegative");
  for (Eigen::Index g = 1; g < points_.size(); ++g)
    if (!(points_[g] > points_[g - 1]) || !std::isfinite(points_[g]))
      throw ConfigurationError("grid points must be finite and strictly increasing");
}

GridSpec default_grid(const SurvivalDataset& data, Eigen::Index points) {
  if (data.size() == 0) throw DataError("default grid needs data");
  if (points < 3) throw ConfigurationError("default grid needs at least three points");
  const double top = 1.5 * data.times.maxCoeff();
  Eigen::ArrayXd p(points);
  p[0] = 0.0;
  p.tail(points - 1) = Eigen::ArrayXd::LinSpaced(points - 1, std::log(1e-3 * top), std::log(top)).exp();
  p[points - 1] = top;
  return GridSpec(std::move(p));
}

GridSpec linear_grid(double lo, double hi, Eigen::Index points) {
  return GridSpec(Eigen::ArrayXd::LinSpaced(points, lo, hi));
}

double wasserstein1(const Eigen::ArrayXd& cdf_a, const Eigen::ArrayXd& cdf_b, const GridSpec& grid) {
  const auto& t = grid.points();
  if (cdf_a.size() != t.size() || cdf_b.size() != t.size())
    throw ShapeError("wasserstein1: rows must match the grid");
  const Eigen::ArrayXd d = (cdf_a - cdf_b).abs();
  const Eigen::Index n = t.size();
  const Eigen::ArrayXd dt = t.tail(n - 1) - t.head(n - 1);
  return (0.5 * dt * (d.head(n - 1) + d.tail(n - 1))).sum();
}

double median_from_cdf(const Eigen::ArrayXd& cdf, const GridSpec& grid) {
  const auto& t = grid.points();
  if (cdf.size() != t.size()) throw ShapeError("median_from_cdf: row must match the grid");
  for (Eigen::Index g = 0; g < t.size(); ++g) {
    if (cdf[g] < 0.5) continue;
    if (g == 0 || cdf[g] == 0.5) return t[g];
    const double f = (0.5 - cdf[g - 1]) / (cdf[g] - cdf[g - 1]);
    return t[g - 1] + f * (t[g] - t[g - 1]);
  }
  throw CoverageError("cdf never reaches 0.5 on the grid; extend the grid to larger times");
}

CovariateResampler::CovariateResampler(CovariateMatrix pool) : pool_(std::move(pool)) {
  if (pool_.rows() == 0) throw ConfigurationError("covariate resampler needs a nonempty pool");
}

std::vector<double> CovariateResampler::new_chain(StreamRng& rng) const {
  std::vector<double> cum(size());
  double s = 0.0;
  for (auto& c : cum) c = (s += -std::log(rng.uniform()));
  for (auto& c : cum) c /= s;
  cum.back() = 1.0;
  return cum;
}

std::span<const double> CovariateResampler::bootstrap_covariate(std::span<const double> chain_cumulative,
                                                                StreamRng& rng) const {
  if (chain_cumulative.size() != size()) throw ShapeError("chain weights do not match the pool");
  const double u = rng.uniform();
  const auto it = std::lower_bound(chain_cumulative.begin(), chain_cumulative.end(), u);
  const auto r = std::min<std::size_t>(static_cast<std::size_t>(it - chain_cumulative.begin()), size() - 1);
  return {pool_.row(static_cast<Eigen::Index>(r)).data(), dim()};
}

ResampleResult predictive_resample(const PredictiveFit& fit, std::size_t n_extra, const GridSpec& grid,
                                   std::span<const double> x_target, StreamRng& rng,
                                   const CovariateResampler* resampler, StreamRng* bootstrap_rng) {
  if (fit.has_covariates() && (resampler == nullptr || bootstrap_rng == nullptr))
    throw ConfigurationError("predictive resampling with covariates needs a covariate resampler");
  if (fit.has_covariates() && resampler->dim() != fit.dim())
    throw ShapeError("covariate pool dimension does not match the fit");
  auto rows = evaluate_grid(fit, grid.points(), x_target);
  ResampleResult out{rows.cdf, rows.density, {}};
  out.w1.reserve(n_extra + 1);
  out.w1.push_back(0.0);
  std::vector<double> chain;
  if (fit.has_covariates()) chain = resampler->new_chain(*bootstrap_rng);

  const auto& family = fit.family();
  const Eigen::Index G = grid.size();
  for (std::size_t k = 0; k < n_extra; ++k) {
    const double alpha0 = alpha_schedule(fit.size() + k + 1);
    double alpha = alpha0;
    if (fit.has_covariates()) {
      const auto x_new = resampler->bootstrap_covariate(chain, *bootstrap_rng);
      alpha = alpha_regression(alpha0, x_target, x_new, *fit.rho_x());
    }
    const double prepared = family.prepare(rng.uniform());
    for (Eigen::Index g = 0; g < G; ++g) {
      const auto kv = family.apply(out.cdf[g], prepared);
      out.density[g] *= (1.0 - alpha) + alpha * kv.density;
      out.cdf[g] = (1.0 - alpha) * out.cdf[g] + alpha * kv.partial;
    }
    out.w1.push_back(wasserstein1(out.cdf, rows.cdf, grid));
  }
  return out;
}

PosteriorDraws martingale_posterior(const ParticleEnsemble<PredictiveFit>& ensemble, const GridSpec& grid,
                                    std::span<const double> x_target, const PosteriorOptions& options,
                                    const CovariateResampler* resampler) {
  const std::size_t B = ensemble.size();
  const Eigen::Index G = grid.size();
  const std::size_t stride = std::max<std::size_t>(1, options.w1_stride);
  const std::size_t T = options.n_extra / stride + 1;
  const auto w = ensemble.normalized_weights();
  PosteriorDraws draws{grid,
                       Eigen::MatrixXd(B, G),
                       Eigen::MatrixXd(B, G),
                       Eigen::VectorXd(B),
                       Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(B)),
                       Eigen::MatrixXd(B, static_cast<Eigen::Index>(T)),
                       stride};
  parallel_for(B, options.threads, [&](std::size_t j) {
    StreamRng rng(options.seed, StreamTag::forward, j);
    StreamRng boot(options.seed, StreamTag::bootstrap, j);
    const auto r = predictive_resample(ensemble.particles[j].fit, options.n_extra, grid, x_target, rng, resampler,
                                       &boot);
    const auto jj = static_cast<Eigen::Index>(j);
    draws.cdf_draws.row(jj) = r.cdf.matrix().transpose();
    draws.density_draws.row(jj) = r.density.matrix().transpose();
    for (std::size_t t = 0; t < T; ++t) draws.w1_trace(jj, static_cast<Eigen::Index>(t)) = r.w1[t * stride];
    try {
      draws.medians[jj] = median_from_cdf(r.cdf, grid);
    } catch (const CoverageError&) {
      draws.medians[jj] = std::numeric_limits<double>::quiet_NaN();
    }
  });
  return draws;
}

double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q) {
  if (values.size() != weights.size() || values.empty())
    throw ShapeError("weighted_quantile: values and weights must be nonempty and aligned");
  std::vector<std::size_t> idx(values.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cum = 0.0;
  for (const auto i : idx) {
    cum += weights[i] / total;
    if (cum >= q) return values[i];
  }
  return values[idx.back()];
}

BandSummary summarize(const Eigen::MatrixXd& draws, const Eigen::VectorXd& weights, double lower_q,
                      double upper_q) {
  const Eigen::Index G = draws.cols();
  BandSummary band{Eigen::ArrayXd(G), Eigen::ArrayXd(G), Eigen::ArrayXd(G)};
  const double total = weights.sum();
  std::vector<double> col(static_cast<std::size_t>(draws.rows()));
  const std::span<const double> w(weights.data(), static_cast<std::size_t>(weights.size()));
  for (Eigen::Index g = 0; g < G; ++g) {
    band.mean[g] = draws.col(g).dot(weights) / total;
    for (Eigen::Index j = 0; j < draws.rows(); ++j) col[static_cast<std::size_t>(j)] = draws(j, g);
    band.lower[g] = weighted_quantile(col, w, lower_q);
    band.upper[g] = weighted_quantile(col, w, upper_q);
  }
  return band;
}

std::string band_csv(const Eigen::ArrayXd& times, const BandSummary& band) {
  CsvWriter out({"time", "mean", "q2.5", "q97.5"});
  for (Eigen::Index g = 0; g < times.size(); ++g) out.row({times[g], band.mean[g], band.lower[g], band.upper[g]});
  return out.str();
}

std::string draws_csv(const Eigen::ArrayXd& times, const Eigen::MatrixXd& draws, const Eigen::VectorXd& weights) {
  std::string text = "weight";
  for (Eigen::Index g = 0; g < times.size(); ++g) text += ',' + format_number(times[g]);
  text += '\n';
  for (Eigen::Index j = 0; j < draws.rows(); ++j) {
    text += format_number(weights[j]);
    for (Eigen::Index g = 0; g < draws.cols(); ++g) text += ',' + format_number(draws(j, g));
    text += '\n';
  }
  return text;
}

}  // namespace copsurv
