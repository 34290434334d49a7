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

#ifndef COPSURV_COPULAS_HPP
#define COPSURV_COPULAS_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>

#include <Eigen/Core>

#include "copsurv/distributions.hpp"
#include "copsurv/errors.hpp"

namespace copsurv {

/// Copula density c(u, v) together with its partial integral \int_0^u c(s, v) ds.
template <typename Scalar>
struct KernelValue {
  Scalar density;
  Scalar partial;
};

// ---------------------------------------------------------------------------
// Clayton-derived kernel (mixture partner of the independence copula on R+).
//
// With t = -log(1 - u)/a, i.e. (1 - u)^(-1/a) = exp(t), the kernel is
//   d_a(u, v) = (a+1)/a * exp((a+1)(t_u + t_v) - (a+2) log B),
//   I_a(u, v) = 1 - exp((a+1)(t_v - log B)),
// where B = exp(t_u) + exp(t_v) - 1. Everything is kept in log space so that
// small bandwidths do not overflow. Only the upper end is clamped: the kernel
// is regular at u = 0.

namespace detail {

template <typename Scalar>
Scalar clayton_exponent(Scalar u, Scalar a) {
  using std::log1p;
  const Scalar hi = Scalar(1) - Scalar(kProbClamp);
  u = u > hi ? hi : (u > 0 ? u : Scalar(0));
  return -log1p(-u) / a;
}

// log(exp(s) + exp(t) - 1) for s, t >= 0.
template <typename Scalar>
Scalar clayton_log_bracket(Scalar s, Scalar t) {
  using std::expm1;
  using std::log1p;
  const Scalar m = s > t ? s : t;
  const Scalar lo = s > t ? t : s;
  return m + log1p(expm1(lo - m) - expm1(-m));
}

}  // namespace detail

/// Kernel with the v-side exponent t_v = -log(1 - v)/a already computed.
template <typename Scalar>
KernelValue<Scalar> clayton_kernel_prepared(Scalar u, Scalar tv, Scalar a) {
  using std::exp;
  using std::expm1;
  const Scalar tu = detail::clayton_exponent(u, a);
  const Scalar log_b = detail::clayton_log_bracket(tu, tv);
  const Scalar density = (a + 1) / a * exp((a + 1) * (tu + tv) - (a + 2) * log_b);
  Scalar partial;
  if (u <= 0)
    partial = Scalar(0);
  else if (u >= 1)
    partial = Scalar(1);
  else
    partial = -expm1((a + 1) * (tv - log_b));
  return {density, partial};
}

template <typename Scalar>
KernelValue<Scalar> clayton_kernel(Scalar u, Scalar v, Scalar a) {
  return clayton_kernel_prepared(u, detail::clayton_exponent(v, a), a);
}

template <typename Scalar>
Scalar clayton_density(Scalar u, Scalar v, Scalar a) {
  return clayton_kernel(u, v, a).density;
}

template <typename Scalar>
Scalar clayton_partial(Scalar u, Scalar v, Scalar a) {
  return clayton_kernel(u, v, a).partial;
}

// ---------------------------------------------------------------------------
// Gaussian copula.

template <typename Scalar>
void validate_gaussian_rho(Scalar rho) {
  if (!(rho >= 0) || !(rho < 1))
    throw std::invalid_argument("Gaussian copula correlation must lie in [0, 1)");
}

/// log c_rho evaluated directly on normal scores x = Phi^-1(u), y = Phi^-1(v).
template <typename Scalar>
Scalar gaussian_copula_log_density_scores(Scalar x, Scalar y, Scalar rho) {
  using std::log1p;
  if (rho == 0) return Scalar(0);
  const Scalar one_minus_r2 = Scalar(1) - rho * rho;
  return -Scalar(0.5) * log1p(-rho * rho) -
         (rho * rho * (x * x + y * y) - 2 * rho * x * y) / (2 * one_minus_r2);
}

/// Kernel with the v-side normal score y = Phi^-1(v) already computed.
template <typename Scalar>
KernelValue<Scalar> gaussian_kernel_prepared(Scalar u, Scalar y, Scalar rho) {
  using std::exp;
  using std::sqrt;
  if (rho == 0) {
    const Scalar partial = u <= 0 ? Scalar(0) : (u >= 1 ? Scalar(1) : u);
    return {Scalar(1), partial};
  }
  const Scalar x = std_normal_quantile(clamp_prob(u));
  const Scalar density = exp(gaussian_copula_log_density_scores(x, y, rho));
  Scalar partial;
  if (u <= 0)
    partial = Scalar(0);
  else if (u >= 1)
    partial = Scalar(1);
  else
    partial = std_normal_cdf((x - rho * y) / sqrt(Scalar(1) - rho * rho));
  return {density, partial};
}

template <typename Scalar>
KernelValue<Scalar> gaussian_kernel(Scalar u, Scalar v, Scalar rho) {
  validate_gaussian_rho(rho);
  return gaussian_kernel_prepared(u, std_normal_quantile(clamp_prob(v)), rho);
}

template <typename Scalar>
Scalar gaussian_density(Scalar u, Scalar v, Scalar rho) {
  return gaussian_kernel(u, v, rho).density;
}

template <typename Scalar>
Scalar gaussian_partial(Scalar u, Scalar v, Scalar rho) {
  return gaussian_kernel(u, v, rho).partial;
}

// ---------------------------------------------------------------------------
// Families

enum class CopulaKind { clayton, gaussian };

/// A copula kernel with its concentration parameter (Clayton bandwidth a or
/// Gaussian correlation rho).
struct CopulaFamily {
  CopulaKind kind = CopulaKind::clayton;
  double parameter = 1.0;

  static CopulaFamily clayton(double a) {
    if (!(a > 0) || !std::isfinite(a))
      throw std::invalid_argument("Clayton bandwidth must be positive");
    return {CopulaKind::clayton, a};
  }
  static CopulaFamily gaussian(double rho) {
    if (!(rho > 0) || !(rho < 1))
      throw std::invalid_argument("Gaussian copula family requires rho in (0, 1)");
    return {CopulaKind::gaussian, rho};
  }

  KernelValue<double> operator()(double u, double v) const { return apply(u, prepare(v)); }

  /// The part of the kernel that depends on v alone; reused across many u.
  double prepare(double v) const {
    return kind == CopulaKind::clayton ? detail::clayton_exponent(v, parameter)
                                       : std_normal_quantile(clamp_prob(v));
  }

  KernelValue<double> apply(double u, double prepared_v) const {
    return kind == CopulaKind::clayton ? clayton_kernel_prepared(u, prepared_v, parameter)
                                       : gaussian_kernel_prepared(u, prepared_v, parameter);
  }
};

// ---------------------------------------------------------------------------
// Weight schedules

/// alpha_i = (2 - 1/i) / (i + 1), the mixing weight of the i-th update.
template <typename Scalar = double>
Scalar alpha_schedule(std::size_t i) {
  if (i == 0) throw std::domain_error("alpha_schedule: index starts at 1");
  const Scalar n = static_cast<Scalar>(i);
  return (Scalar(2) - Scalar(1) / n) / (n + Scalar(1));
}

/// Covariate-dependent weight alpha_i K / (1 - alpha_i + alpha_i K) with
/// K = prod_j c_{rho_x}(Phi(x_j), Phi(x'_j)). The copula factors are evaluated
/// on the normal scores x_j, x'_j directly, which is the same quantity.
inline double alpha_regression(double alpha, std::span<const double> x,
                               std::span<const double> x_prime, double rho_x) {
  using Scalar = double;
  using std::exp;
  if (x.size() != x_prime.size())
    throw ShapeError("alpha_regression: covariate dimensions differ");
  validate_gaussian_rho(rho_x);
  Scalar log_k = 0;
  for (std::size_t j = 0; j < x.size(); ++j)
    log_k += gaussian_copula_log_density_scores(x[j], x_prime[j], rho_x);
  if (log_k == 0) return alpha;
  return Scalar(1) / (Scalar(1) + (Scalar(1) - alpha) / alpha * exp(-log_k));
}

// Coefficient-wise kernels over a grid of u values with a shared v.

template <typename Derived>
auto clayton_density(const Eigen::ArrayBase<Derived>& u, typename Derived::Scalar v,
                     typename Derived::Scalar a) {
  using Scalar = typename Derived::Scalar;
  return u.unaryExpr([v, a](Scalar s) { return clayton_density(s, v, a); });
}

template <typename Derived>
auto clayton_partial(const Eigen::ArrayBase<Derived>& u, typename Derived::Scalar v,
                     typename Derived::Scalar a) {
  using Scalar = typename Derived::Scalar;
  return u.unaryExpr([v, a](Scalar s) { return clayton_partial(s, v, a); });
}

template <typename Derived>
auto gaussian_density(const Eigen::ArrayBase<Derived>& u, typename Derived::Scalar v,
                      typename Derived::Scalar rho) {
  using Scalar = typename Derived::Scalar;
  return u.unaryExpr([v, rho](Scalar s) { return gaussian_density(s, v, rho); });
}

template <typename Derived>
auto gaussian_partial(const Eigen::ArrayBase<Derived>& u, typename Derived::Scalar v,
                      typename Derived::Scalar rho) {
  using Scalar = typename Derived::Scalar;
  return u.unaryExpr([v, rho](Scalar s) { return gaussian_partial(s, v, rho); });
}

}  // namespace copsurv

#endif  // COPSURV_COPULAS_HPP
