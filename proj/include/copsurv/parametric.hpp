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

#ifndef COPSURV_PARAMETRIC_HPP
#define COPSURV_PARAMETRIC_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "copsurv/censoring.hpp"
#include "copsurv/dataset.hpp"
#include "copsurv/distributions.hpp"
#include "copsurv/predictive.hpp"

namespace copsurv {

/// Exponential likelihood with an inverse-gamma IG(a0, b0) prior on the mean.
struct ConjugateModel {
  double a0 = 1.0;
  double b0 = 1.0;
};

struct ConjugateState {
  double a = 1.0;
  double b = 1.0;
  double posterior_mean() const;  // b / (a - 1), requires a > 1
};

void validate(const ConjugateModel& model);

/// a_n = a0 + k, b_n = b0 + sum of all times (observed and censored).
ConjugateState posterior_update(const ConjugateModel& model, const SurvivalDataset& data);

/// Lomax(a_n, b_n).
LomaxParams<double> posterior_predictive(const ConjugateState& state);

/// log Gamma(k + a0) - log Gamma(a0) + a0 log b0 - (k + a0) log(b0 + sum t).
double exact_log_marginal(const ConjugateModel& model, const SurvivalDataset& data);

/// Golden-section maximizer of exact_log_marginal over a0 in [lo, hi].
double tune_a0(const SurvivalDataset& data, double b0 = 1.0, double lo = 0.1, double hi = 100.0, double tol = 1e-4);

/// Sequential Lomax predictive, driven by the same imputation engine as the
/// copula fits. Imputed uniforms are mapped to times by the running inverse CDF.
class ConjugatePredictive {
 public:
  explicit ConjugatePredictive(ConjugateState state) : state_(state) {}
  explicit ConjugatePredictive(const ConjugateModel& model) : state_{model.a0, model.b0} {}

  const ConjugateState& state() const { return state_; }
  const std::vector<double>& imputed_times() const { return imputed_; }

  EvalPoint evaluate(double y, std::span<const double> = {}) const {
    const auto p = posterior_predictive(state_);
    return {lomax_pdf(y, p), lomax_cdf(y, p)};
  }
  void absorb_observed(double y, const EvalPoint&, std::span<const double> = {}) { add(y); }
  void absorb_imputed(double u, std::span<const double> = {}) {
    const double y = lomax_inv_cdf(u, posterior_predictive(state_));
    imputed_.push_back(y);
    add(y);
  }

 private:
  void add(double y) {
    state_.a += 1.0;
    state_.b += y;
  }

  ConjugateState state_;
  std::vector<double> imputed_;
};

struct DoobOptions {
  std::size_t particles = 2000;
  std::size_t n_extra = 2000;
  double ess_frac = 0.5;
  std::uint64_t seed = 0;
  unsigned threads = 1;
  std::size_t trajectory_stride = 0;  // 0 disables trajectory recording
};

struct DoobResult {
  Eigen::VectorXd theta_bar;    // b_N / (a_N - 1) per particle
  Eigen::VectorXd weights;      // normalized importance weights
  ConjugateState exact;         // exact posterior IG(a_n, b_n)
  Eigen::MatrixXd trajectories; // B x (n_extra / stride + 1) when requested
  ParticleEnsemble<ConjugatePredictive> ensemble;
};

/// Imputes the censored values, then draws n_extra future values per particle
/// from the running Lomax predictive and records the posterior mean b/(a-1).
DoobResult doob_demo(const ConjugateModel& model, const SurvivalDataset& data, const DoobOptions& options);

/// P(theta <= t) for theta ~ IG(a, b).
double inverse_gamma_cdf(double t, double a, double b);
double inverse_gamma_quantile(double q, double a, double b);

/// sup_t |F_w(t) - F(t)| between a weighted sample and the IG(a, b) cdf.
double weighted_ks_inverse_gamma(std::span<const double> samples, std::span<const double> weights, double a,
                                 double b);

/// (theta_bar, weight) rows.
std::string doob_samples_csv(const DoobResult& result);

/// Exact posterior quantiles at levels 0.01, ..., 0.99.
std::string inverse_gamma_quantile_csv(double a, double b);

}  // namespace copsurv

#endif  // COPSURV_PARAMETRIC_HPP
