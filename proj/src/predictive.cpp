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

#include "copsurv/predictive.hpp"

#include <cmath>
#include <stdexcept>

#include "copsurv/errors.hpp"

namespace copsurv {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void check_family_base(const CopulaFamily& family, const BaseMeasure& base) {
  const bool lomax = std::holds_alternative<LomaxParams<double>>(base);
  if ((family.kind == CopulaKind::clayton) != lomax)
    throw ConfigurationError("Clayton kernels pair with a Lomax base, Gaussian with log-normal");
  std::visit([](const auto& p) { validate(p); }, base);
}

std::pair<PredictiveFit, double> absorb_observed_data(const SurvivalDataset& data,
                                                      const PredictiveFit& prior) {
  if (prior.size() != 0) throw ConfigurationError("fit_uncensored expects an empty prior fit");
  if (data.has_covariates() != prior.has_covariates())
    throw ConfigurationError("covariates must be present in both the data and the fit, or neither");
  PredictiveFit fit = prior;
  double log_lik = 0.0;
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!data.observed(i))
      throw ConfigurationError("fit_uncensored: record " + std::to_string(i + 1) +
                               " is censored; use impute_smc");
    const auto x = data.covariate(i);
    const EvalPoint at = fit.evaluate(data.times[static_cast<Eigen::Index>(i)], x);
    log_lik += std::log(at.density);
    fit.push(at.cdf, x);
  }
  fit.set_permutation(data.order);
  return {std::move(fit), log_lik};
}

}  // namespace

PredictiveFit::PredictiveFit(CopulaFamily family, BaseMeasure base)
    : family_(family), base_(base) {
  if (family_.kind == CopulaKind::clayton)
    family_ = CopulaFamily::clayton(family.parameter);
  else
    family_ = CopulaFamily::gaussian(family.parameter);
  check_family_base(family_, base_);
}

PredictiveFit PredictiveFit::clayton(double a) {
  return {CopulaFamily::clayton(a), LomaxParams<double>{a, 1.0}};
}

PredictiveFit PredictiveFit::gaussian(double rho) {
  return {CopulaFamily::gaussian(rho), LogNormalBaseParams<double>{rho}};
}

PredictiveFit PredictiveFit::with_covariates(std::size_t dim, double rho_x) const {
  if (size() != 0) throw ConfigurationError("covariates must be configured before any update");
  validate_gaussian_rho(rho_x);
  PredictiveFit out = *this;
  out.rho_x_ = rho_x;
  out.dim_ = dim;
  return out;
}

EvalPoint PredictiveFit::base_point(double y) const {
  if (!(y >= 0)) throw std::domain_error("predictive evaluation requires y >= 0");
  return std::visit(overloaded{
                        [y](const LomaxParams<double>& p) {
                          return EvalPoint{lomax_pdf(y, p), lomax_cdf(y, p)};
                        },
                        [y](const LogNormalBaseParams<double>& p) {
                          if (y == 0 || std::isinf(y)) return EvalPoint{0.0, y == 0 ? 0.0 : 1.0};
                          return EvalPoint{lognormal_base_pdf(y, p), lognormal_base_cdf(y, p)};
                        },
                    },
                    base_);
}

void PredictiveFit::check_covariate(std::span<const double> x) const {
  if (!has_covariates()) {
    if (!x.empty()) throw ConfigurationError("covariate supplied to a fit without covariates");
    return;
  }
  if (x.size() != dim_)
    throw ShapeError("covariate has dimension " + std::to_string(x.size()) + ", fit expects " +
                     std::to_string(dim_));
}

double PredictiveFit::update_weight(std::size_t i, std::span<const double> x) const {
  const double alpha = alpha_schedule(i + 1);
  if (!has_covariates()) return alpha;
  return alpha_regression(alpha, x, covariate(i), *rho_x_);
}

EvalPoint PredictiveFit::evaluate(double y, std::span<const double> x) const {
  check_covariate(x);
  EvalPoint pt = base_point(y);
  for (std::size_t i = 0; i < v_.size(); ++i) {
    const double alpha = update_weight(i, x);
    const auto k = family_.apply(pt.cdf, prepared_[i]);
    pt.density *= (1.0 - alpha) + alpha * k.density;
    pt.cdf = (1.0 - alpha) * pt.cdf + alpha * k.partial;
  }
  return pt;
}

void PredictiveFit::push(double u, std::span<const double> x) {
  check_covariate(x);
  if (!(u >= 0) || !(u <= 1)) throw std::domain_error("propagation value must lie in [0, 1]");
  v_.push_back(u);
  prepared_.push_back(family_.prepare(u));
  x_.insert(x_.end(), x.begin(), x.end());
}

PredictiveFit absorb(const PredictiveFit& fit, double u, std::span<const double> x) {
  PredictiveFit out = fit;
  out.push(u, x);
  return out;
}

GridRows evaluate_grid(const PredictiveFit& fit, const Eigen::ArrayXd& grid, std::span<const double> x) {
  GridRows rows{Eigen::ArrayXd(grid.size()), Eigen::ArrayXd(grid.size())};
  for (Eigen::Index g = 0; g < grid.size(); ++g) {
    const EvalPoint pt = fit.evaluate(grid[g], x);
    rows.density[g] = pt.density;
    rows.cdf[g] = pt.cdf;
  }
  return rows;
}

PredictiveFit fit_uncensored(const SurvivalDataset& data, const PredictiveFit& prior) {
  return absorb_observed_data(data, prior).first;
}

double prequential_log_lik(const SurvivalDataset& data, const PredictiveFit& prior) {
  return absorb_observed_data(data, prior).second;
}

}  // namespace copsurv
