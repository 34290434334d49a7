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

#ifndef COPSURV_DISTRIBUTIONS_HPP
#define COPSURV_DISTRIBUTIONS_HPP

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>
#include <type_traits>

#include <Eigen/Core>

namespace copsurv {

/// Probabilities handed to copula kernels are clamped to [eps, 1 - eps].
inline constexpr double kProbClamp = 1e-10;

template <typename Scalar>
Scalar clamp_prob(Scalar u) {
  const Scalar lo = Scalar(kProbClamp);
  const Scalar hi = Scalar(1) - Scalar(kProbClamp);
  return u < lo ? lo : (u > hi ? hi : u);
}

//! Lomax (Pareto type II) with density (a/b)(1 + y/b)^-(a+1).
template <typename Scalar = double>
struct LomaxParams {
  Scalar shape;  // a
  Scalar scale;  // b
};

//! Log-normal base measure with log-scale mean 0 and variance 1/(1 - rho).
template <typename Scalar = double>
struct LogNormalBaseParams {
  Scalar rho;
};

template <typename Scalar>
void validate(const LomaxParams<Scalar>& p) {
  if (!(p.shape > 0) || !(p.scale > 0) || !std::isfinite(p.shape) || !std::isfinite(p.scale))
    throw std::invalid_argument("Lomax parameters must be positive and finite");
}

template <typename Scalar>
void validate(const LogNormalBaseParams<Scalar>& p) {
  if (!(p.rho > 0) || !(p.rho < 1))
    throw std::invalid_argument("log-normal base correlation must lie in (0, 1)");
}

// ---------------------------------------------------------------------------
// Standard normal

template <typename Scalar>
Scalar std_normal_pdf(Scalar z) {
  using std::exp;
  const Scalar inv_sqrt_2pi = Scalar(0.3989422804014326779399460599343819L);
  return inv_sqrt_2pi * exp(-Scalar(0.5) * z * z);
}

template <typename Scalar>
  requires(!std::is_base_of_v<Eigen::ArrayBase<Scalar>, Scalar>)
Scalar std_normal_cdf(Scalar z) {
  using std::erfc;
  return Scalar(0.5) * erfc(-z / Scalar(std::numbers::sqrt2_v<long double>));
}

/// Inverse of the standard normal CDF (Wichura's AS241, PPND16).
template <typename Scalar>
Scalar std_normal_quantile(Scalar u) {
  using std::log;
  using std::sqrt;
  if (!(u > 0) || !(u < 1))
    throw std::domain_error("std_normal_quantile: probability must lie in (0, 1)");
  const Scalar q = u - Scalar(0.5);
  if (std::abs(q) <= Scalar(0.425)) {
    const Scalar r = Scalar(0.180625) - q * q;
    const Scalar num =
        ((((((((r * Scalar(2509.0809287301226727) + Scalar(33430.575583588128105)) * r +
               Scalar(67265.770927008700853)) * r + Scalar(45921.953931549871457)) * r +
             Scalar(13731.693765509461125)) * r + Scalar(1971.5909503065514427)) * r +
           Scalar(133.14166789178437745)) * r + Scalar(3.387132872796366608)));
    const Scalar den =
        ((((((r * Scalar(5226.495278852545925) + Scalar(28729.085735721942674)) * r +
             Scalar(39307.89580009271061)) * r + Scalar(21213.794301586595867)) * r +
           Scalar(5394.1960214247511077)) * r + Scalar(687.1870074920579083)) * r +
         Scalar(42.313330701600911252)) * r + Scalar(1);
    return q * num / den;
  }
  Scalar r = q < 0 ? u : Scalar(1) - u;
  r = sqrt(-log(r));
  Scalar val;
  if (r <= Scalar(5)) {
    r -= Scalar(1.6);
    val = (((((((r * Scalar(7.7454501427834140764e-4) + Scalar(0.0227238449892691845833)) * r +
                Scalar(0.24178072517745061177)) * r + Scalar(1.27045825245236838258)) * r +
              Scalar(3.64784832476320460504)) * r + Scalar(5.7694972214606914055)) * r +
            Scalar(4.6303378461565452959)) * r + Scalar(1.42343711074968357734)) /
          (((((((r * Scalar(1.05075007164441684324e-9) + Scalar(5.475938084995344946e-4)) * r +
                Scalar(0.0151986665636164571966)) * r + Scalar(0.14810397642748007459)) * r +
              Scalar(0.68976733498510000455)) * r + Scalar(1.6763848301838038494)) * r +
            Scalar(2.05319162663775882187)) * r + Scalar(1));
  } else {
    r -= Scalar(5);
    val = (((((((r * Scalar(2.01033439929228813265e-7) + Scalar(2.71155556874348757815e-5)) * r +
                Scalar(0.0012426609473880784386)) * r + Scalar(0.026532189526576123093)) * r +
              Scalar(0.29656057182850489123)) * r + Scalar(1.7848265399172913358)) * r +
            Scalar(5.4637849111641143699)) * r + Scalar(6.6579046435011037772)) /
          (((((((r * Scalar(2.04426310338993978564e-15) + Scalar(1.4215117583164458887e-7)) * r +
                Scalar(1.8463183175100546818e-5)) * r + Scalar(7.868691311456132591e-4)) * r +
              Scalar(0.0148753612908506148525)) * r + Scalar(0.13692988092273580531)) * r +
            Scalar(0.59983220655588793769)) * r + Scalar(1));
  }
  return q < 0 ? -val : val;
}

// ---------------------------------------------------------------------------
// Lomax

template <typename Scalar>
Scalar lomax_pdf(Scalar y, const LomaxParams<Scalar>& p) {
  using std::exp;
  using std::log1p;
  if (!(y >= 0)) throw std::domain_error("lomax_pdf: y must be nonnegative");
  if (std::isinf(y)) return Scalar(0);
  return p.shape / p.scale * exp(-(p.shape + 1) * log1p(y / p.scale));
}

template <typename Scalar>
Scalar lomax_cdf(Scalar y, const LomaxParams<Scalar>& p) {
  using std::expm1;
  using std::log1p;
  if (!(y >= 0)) throw std::domain_error("lomax_cdf: y must be nonnegative");
  if (std::isinf(y)) return Scalar(1);
  return -expm1(-p.shape * log1p(y / p.scale));
}

/// Survival function 1 - F(y), computed without cancellation.
template <typename Scalar>
Scalar lomax_survival(Scalar y, const LomaxParams<Scalar>& p) {
  using std::exp;
  using std::log1p;
  if (!(y >= 0)) throw std::domain_error("lomax_survival: y must be nonnegative");
  if (std::isinf(y)) return Scalar(0);
  return exp(-p.shape * log1p(y / p.scale));
}

template <typename Scalar>
Scalar lomax_inv_cdf(Scalar u, const LomaxParams<Scalar>& p) {
  using std::expm1;
  using std::log1p;
  if (!(u >= 0)) throw std::domain_error("lomax_inv_cdf: probability must be nonnegative");
  if (!(u < 1)) throw std::out_of_range("lomax_inv_cdf: u = 1 maps to +infinity");
  return p.scale * expm1(-log1p(-u) / p.shape);
}

// ---------------------------------------------------------------------------
// Log-normal base measure, Log-normal(0, 1/(1 - rho))

template <typename Scalar>
Scalar lognormal_base_sigma(const LogNormalBaseParams<Scalar>& p) {
  using std::sqrt;
  return Scalar(1) / sqrt(Scalar(1) - p.rho);
}

template <typename Scalar>
Scalar lognormal_base_pdf(Scalar y, const LogNormalBaseParams<Scalar>& p) {
  using std::log;
  if (!(y > 0)) throw std::domain_error("lognormal_base_pdf: y must be positive");
  if (std::isinf(y)) return Scalar(0);
  const Scalar sigma = lognormal_base_sigma(p);
  return std_normal_pdf(log(y) / sigma) / (y * sigma);
}

template <typename Scalar>
Scalar lognormal_base_cdf(Scalar y, const LogNormalBaseParams<Scalar>& p) {
  using std::log;
  if (!(y >= 0)) throw std::domain_error("lognormal_base_cdf: y must be nonnegative");
  if (y == 0) return Scalar(0);
  if (std::isinf(y)) return Scalar(1);
  return std_normal_cdf(log(y) / lognormal_base_sigma(p));
}

template <typename Scalar>
Scalar lognormal_base_inv_cdf(Scalar u, const LogNormalBaseParams<Scalar>& p) {
  using std::exp;
  return exp(lognormal_base_sigma(p) * std_normal_quantile(u));
}

// ---------------------------------------------------------------------------
// Exponential with rate lambda

template <typename Scalar>
Scalar exponential_pdf(Scalar y, Scalar rate) {
  using std::exp;
  if (!(y >= 0)) throw std::domain_error("exponential_pdf: y must be nonnegative");
  return rate * exp(-rate * y);
}

template <typename Scalar>
Scalar exponential_cdf(Scalar y, Scalar rate) {
  using std::expm1;
  if (!(y >= 0)) throw std::domain_error("exponential_cdf: y must be nonnegative");
  return -expm1(-rate * y);
}

template <typename Scalar>
Scalar exponential_inv_cdf(Scalar u, Scalar rate) {
  using std::log1p;
  if (!(u >= 0) || !(u < 1)) throw std::domain_error("exponential_inv_cdf: u must lie in [0, 1)");
  return -log1p(-u) / rate;
}

// ---------------------------------------------------------------------------
// Coefficient-wise overloads for Eigen arrays.

template <typename Derived>
auto lomax_pdf(const Eigen::ArrayBase<Derived>& y,
               const LomaxParams<typename Derived::Scalar>& p) {
  using Scalar = typename Derived::Scalar;
  return y.unaryExpr([p](Scalar v) { return lomax_pdf(v, p); });
}

template <typename Derived>
auto lomax_cdf(const Eigen::ArrayBase<Derived>& y,
               const LomaxParams<typename Derived::Scalar>& p) {
  using Scalar = typename Derived::Scalar;
  return y.unaryExpr([p](Scalar v) { return lomax_cdf(v, p); });
}

template <typename Derived>
auto std_normal_cdf(const Eigen::ArrayBase<Derived>& z) {
  using Scalar = typename Derived::Scalar;
  return z.unaryExpr([](Scalar v) { return std_normal_cdf(v); });
}

}  // namespace copsurv

#endif  // COPSURV_DISTRIBUTIONS_HPP
