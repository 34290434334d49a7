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

#include "copsurv/parametric.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include <unsupported/Eigen/SpecialFunctions>

#include "copsurv/csv.hpp"
#include "copsurv/errors.hpp"
#include "copsurv/parallel.hpp"
#include "copsurv/random.hpp"

namespace copsurv {

double ConjugateState::posterior_mean() const {
  if (!(a > 1)) throw std::domain_error("posterior mean requires a > 1");
  return b / (a - 1.0);
}

void validate(const ConjugateModel& model) {
  if (!(model.a0 > 0) || !(model.b0 > 0)) throw ConfigurationError("a0 and b0 must be positive");
}

ConjugateState posterior_update(const ConjugateModel& model, const SurvivalDataset& data) {
  validate(model);
  return {model.a0 + static_cast<double>(data.observed_count()), model.b0 + data.times.sum()};
}

LomaxParams<double> posterior_predictive(const ConjugateState& state) { return {state.a, state.b}; }

double exact_log_marginal(const ConjugateModel& model, const SurvivalDataset& data) {
  validate(model);
  const double k = static_cast<double>(data.observed_count());
  return std::lgamma(k + model.a0) - std::lgamma(model.a0) + model.a0 * std::log(model.b0) -
         (k + model.a0) * std::log(model.b0 + data.times.sum());
}

double tune_a0(const SurvivalDataset& data, double b0, double lo, double hi, double tol) {
  if (data.size() == 0) throw DataError("tune_a0: empty dataset");
  if (!(lo > 0) || !(hi > lo)) throw ConfigurationError("tune_a0: invalid bracket");
  const auto f = [&](double a0) { return exact_log_marginal({a0, b0}, data); };
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double c = b - inv_phi * (b - a), d = a + inv_phi * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc >= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - inv_phi * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + inv_phi * (b - a);
      fd = f(d);
    }
  }
  const double mid = 0.5 * (a + b);
  // The objective can be monotone on the bracket; fall back to the better endpoint.
  double best = mid, fbest = f(mid);
  for (double e : {lo, hi})
    if (f(e) > fbest) best = e, fbest = f(e);
  return best;
}

DoobResult doob_demo(const ConjugateModel& model, const SurvivalDataset& data, const DoobOptions& options) {
  validate(model);
  ImputeOptions io{options.particles, options.ess_frac, options.seed, options.threads};
  auto ens = impute_smc(data, ConjugatePredictive(model), io);
  const auto B = static_cast<Eigen::Index>(ens.size());
  const auto w = ens.normalized_weights();
  const std::size_t stride = options.trajectory_stride;
  const Eigen::Index T = stride ? static_cast<Eigen::Index>(options.n_extra / stride + 1) : 0;

  DoobResult out{Eigen::VectorXd(B), Eigen::Map<const Eigen::VectorXd>(w.data(), B), posterior_update(model, data),
                 Eigen::MatrixXd(stride ? B : 0, T), std::move(ens)};
  parallel_for(static_cast<std::size_t>(B), options.threads, [&](std::size_t j) {
    const auto jj = static_cast<Eigen::Index>(j);
    ConjugateState s = out.ensemble.particles[j].fit.state();
    StreamRng rng(options.seed, StreamTag::forward, j);
    if (stride) out.trajectories(jj, 0) = s.a > 1 ? s.posterior_mean() : std::nan("");
    for (std::size_t k = 1; k <= options.n_extra; ++k) {
      const double y = lomax_inv_cdf(rng.uniform(), posterior_predictive(s));
      s.a += 1.0;
      s.b += y;
      if (stride && k % stride == 0) out.trajectories(jj, static_cast<Eigen::Index>(k / stride)) = s.posterior_mean();
    }
    out.theta_bar[jj] = s.posterior_mean();
  });
  return out;
}

double inverse_gamma_cdf(double t, double a, double b) {
  if (!(t > 0)) return 0.0;
  if (std::isinf(t)) return 1.0;
  return Eigen::numext::igammac(a, b / t);
}

double inverse_gamma_quantile(double q, double a, double b) {
  if (!(q > 0) || !(q < 1)) throw std::domain_error("inverse_gamma_quantile: q must lie in (0, 1)");
  double lo = std::log(b / (a + 1.0)), hi = lo;
  while (inverse_gamma_cdf(std::exp(lo), a, b) > q) lo -= 1.0;
  while (inverse_gamma_cdf(std::exp(hi), a, b) < q) hi += 1.0;
  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    (inverse_gamma_cdf(std::exp(mid), a, b) < q ? lo : hi) = mid;
  }
  return std::exp(0.5 * (lo + hi));
}

double weighted_ks_inverse_gamma(std::span<const double> samples, std::span<const double> weights, double a,
                                 double b) {
  if (samples.size() != weights.size() || samples.empty()) throw ShapeError("weighted KS: misaligned inputs");
  std::vector<std::size_t> idx(samples.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t i, std::size_t j) { return samples[i] < samples[j]; });
  const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
  double cum = 0.0, d = 0.0;
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double x = samples[idx[r]];
    const double before = cum;
    cum += weights[idx[r]] / total;
    // Tied samples form one jump.
    if (r + 1 < idx.size() && samples[idx[r + 1]] == x) continue;
    const double f = inverse_gamma_cdf(x, a, b);
    d = std::max({d, std::abs(cum - f), std::abs(before - f)});
  }
  return d;
}

std::string doob_samples_csv(const DoobResult& result) {
  CsvWriter out({"theta_bar", "weight"});
  for (Eigen::Index j = 0; j < result.theta_bar.size(); ++j) out.row({result.theta_bar[j], result.weights[j]});
  return out.str();
}

std::string inverse_gamma_quantile_csv(double a, double b) {
  CsvWriter out({"q", "theta"});
  for (int i = 1; i <= 99; ++i) {
    const double q = i / 100.0;
    out.row({q, inverse_gamma_quantile(q, a, b)});
  }
  return out.str();
}

}  // namespace copsurv
