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

#ifndef COPSURV_RESAMPLING_HPP
#define COPSURV_RESAMPLING_HPP

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "copsurv/censoring.hpp"
#include "copsurv/dataset.hpp"
#include "copsurv/predictive.hpp"
#include "copsurv/random.hpp"

namespace copsurv {

/// Strictly increasing evaluation points, first >= 0, at least two of them.
class GridSpec {
 public:
  explicit GridSpec(Eigen::ArrayXd points);
  const Eigen::ArrayXd& points() const { return points_; }
  Eigen::Index size() const { return points_.size(); }
  double span() const { return points_[points_.size() - 1] - points_[0]; }

 private:
  Eigen::ArrayXd points_;
};

/// 0 followed by points - 1 log-spaced values from 1e-3 * top to top, where
/// top = 1.5 * max(times).
GridSpec default_grid(const SurvivalDataset& data, Eigen::Index points = 100);

/// Evenly spaced grid on [lo, hi].
GridSpec linear_grid(double lo, double hi, Eigen::Index points);

/// Trapezoidal integral of |a - b| over the grid.
double wasserstein1(const Eigen::ArrayXd& cdf_a, const Eigen::ArrayXd& cdf_b, const GridSpec& grid);

/// Time at which a monotone cdf row first reaches 0.5, linearly interpolated.
/// Throws CoverageError when the row stays below 0.5.
double median_from_cdf(const Eigen::ArrayXd& cdf, const GridSpec& grid);

/// Bayesian bootstrap over a pool of covariate vectors.
class CovariateResampler {
 public:
  explicit CovariateResampler(CovariateMatrix pool);

  /// Cumulative Dirichlet(1, ..., 1) weights over the pool, drawn once per chain.
  std::vector<double> new_chain(StreamRng& rng) const;

  /// One covariate vector drawn with the chain's weights.
  std::span<const double> bootstrap_covariate(std::span<const double> chain_cumulative,
                                              StreamRng& rng) const;

  std::size_t size() const { return static_cast<std::size_t>(pool_.rows()); }
  std::size_t dim() const { return static_cast<std::size_t>(pool_.cols()); }

 private:
  CovariateMatrix pool_;
};

struct ResampleResult {
  Eigen::ArrayXd cdf;
  Eigen::ArrayXd density;
  std::vector<double> w1;  // w1[k] after k forward steps; w1[0] = 0
};

/// Forward-simulates N_extra future values from the running predictive,
/// drawing v ~ Uniform(0, 1) directly and updating the grid rows in place.
/// With covariates, each future value gets a Bayesian-bootstrap covariate
/// from `resampler` and the rows are those conditional on `x_target`.
ResampleResult predictive_resample(const PredictiveFit& fit, std::size_t n_extra, const GridSpec& grid,
                                   std::span<const double> x_target, StreamRng& rng,
                                   const CovariateResampler* resampler = nullptr,
                                   StreamRng* bootstrap_rng = nullptr);

struct PosteriorOptions {
  std::size_t n_extra = 2000;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t w1_stride = 10;  // keep every w1_stride-th trajectory value
};

/// Weighted martingale-posterior draws, one per particle.
struct PosteriorDraws {
  GridSpec grid;
  Eigen::MatrixXd cdf_draws;      // B x |grid|
  Eigen::MatrixXd density_draws;  // B x |grid|
  Eigen::VectorXd medians;        // NaN where a draw never reaches 0.5
  Eigen::VectorXd weights;        // normalized
  Eigen::MatrixXd w1_trace;       // B x (n_extra / w1_stride + 1)
  std::size_t w1_stride = 1;
};

/// Runs predictive_resample from every particle's fit; chain j uses the
/// streams (seed, forward, j) and (seed, bootstrap, j).
PosteriorDraws martingale_posterior(const ParticleEnsemble<PredictiveFit>& ensemble, const GridSpec& grid,
                                    std::span<const double> x_target, const PosteriorOptions& options,
                                    const CovariateResampler* resampler = nullptr);

/// Weighted q-quantile: smallest value whose cumulative weight reaches q.
double weighted_quantile(std::span<const double> values, std::span<const double> weights, double q);

struct BandSummary {
  Eigen::ArrayXd mean;
  Eigen::ArrayXd lower;
  Eigen::ArrayXd upper;
};

/// Column-wise weighted mean and [lower_q, upper_q] quantiles of a draw matrix.
BandSummary summarize(const Eigen::MatrixXd& draws, const Eigen::VectorXd& weights, double lower_q = 0.025,
                      double upper_q = 0.975);

/// CSV with columns time, mean, q2.5, q97.5.
std::string band_csv(const Eigen::ArrayXd& times, const BandSummary& band);

/// Raw draw matrix with a leading weight column; header lists the times.
std::string draws_csv(const Eigen::ArrayXd& times, const Eigen::MatrixXd& draws, const Eigen::VectorXd& weights);

}  // namespace copsurv

#endif  // COPSURV_RESAMPLING_HPP
