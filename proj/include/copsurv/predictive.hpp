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

#ifndef COPSURV_PREDICTIVE_HPP
#define COPSURV_PREDICTIVE_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "copsurv/copulas.hpp"
#include "copsurv/dataset.hpp"
#include "copsurv/distributions.hpp"

namespace copsurv {

/// Predictive density and CDF at one point.
struct EvalPoint {
  double density;
  double cdf;
};

using BaseMeasure = std::variant<LomaxParams<double>, LogNormalBaseParams<double>>;

/// Sequential copula predictive p_n, P_n.
///
/// The state is the ordered list of propagation values v_i = P_{i-1}(y_i)
/// (plus the covariates of each datum in the conditional variant). Raw times
/// are never stored: every update depends on its datum only through v_i, which
/// lets imputed and forward-simulated values be absorbed as uniforms directly.
class PredictiveFit {
 public:
  PredictiveFit(CopulaFamily family, BaseMeasure base);

  /// Clayton kernel with Lomax(a, 1) base measure.
  static PredictiveFit clayton(double a);
  /// Gaussian kernel with Log-normal(0, 1/(1 - rho)) base measure.
  static PredictiveFit gaussian(double rho);

  /// Conditional variant: each update is weighted by alpha_regression with
  /// covariate correlation rho_x. Only valid on an empty fit.
  PredictiveFit with_covariates(std::size_t dim, double rho_x) const;

  const CopulaFamily& family() const { return family_; }
  const BaseMeasure& base() const { return base_; }
  std::size_t size() const { return v_.size(); }
  bool has_covariates() const { return rho_x_.has_value(); }
  std::size_t dim() const { return dim_; }
  std::optional<double> rho_x() const { return rho_x_; }

  std::span<const double> propagation_values() const { return v_; }
  std::span<const double> covariate(std::size_t i) const { return {x_.data() + i * dim_, dim_}; }

  /// Source positions of the absorbed data, when fitted from a dataset.
  const std::vector<std::size_t>& permutation() const { return perm_; }
  void set_permutation(std::vector<std::size_t> perm) { perm_ = std::move(perm); }

  EvalPoint base_point(double y) const;

  /// Propagates (p_0(y), P_0(y)) through every absorbed update. O(size()).
  EvalPoint evaluate(double y, std::span<const double> x = {}) const;

  /// Mixing weight applied by the i-th absorbed update (0-based) when
  /// evaluating at covariate x.
  double update_weight(std::size_t i, std::span<const double> x = {}) const;

  /// Appends one update with propagation value u (in place).
  void push(double u, std::span<const double> x = {});

  // Interface used by the sequential imputation engine.
  void absorb_observed(double /*y*/, const EvalPoint& at_y, std::span<const double> x) {
    push(at_y.cdf, x);
  }
  void absorb_imputed(double u, std::span<const double> x) { push(u, x); }

 private:
  void check_covariate(std::span<const double> x) const;

  CopulaFamily family_;
  BaseMeasure base_;
  std::optional<double> rho_x_;
  std::size_t dim_ = 0;
  std::vector<double> v_;
  std::vector<double> prepared_;  // family_.prepare(v_i)
  std::vector<double> x_;         // row-major, size() x dim_
  std::vector<std::size_t> perm_;
};

/// Copy of `fit` extended by one update.
PredictiveFit absorb(const PredictiveFit& fit, double u, std::span<const double> x = {});

inline EvalPoint evaluate(const PredictiveFit& fit, double y, std::span<const double> x = {}) {
  return fit.evaluate(y, x);
}

/// Density and CDF rows over a grid.
struct GridRows {
  Eigen::ArrayXd density;
  Eigen::ArrayXd cdf;
};

GridRows evaluate_grid(const PredictiveFit& fit, const Eigen::ArrayXd& grid,
                       std::span<const double> x = {});

/// Absorbs every record of fully observed data in dataset order, computing
/// v_i = P_{i-1}(y_i) on the way. `prior` must be empty. O(n^2).
PredictiveFit fit_uncensored(const SurvivalDataset& data, const PredictiveFit& prior);

/// sum_i log p_{i-1}(y_i) in dataset order.
double prequential_log_lik(const SurvivalDataset& data, const PredictiveFit& prior);

}  // namespace copsurv

#endif  // COPSURV_PREDICTIVE_HPP
