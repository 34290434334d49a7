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

#ifndef COPSURV_CENSORING_HPP
#define COPSURV_CENSORING_HPP

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "copsurv/dataset.hpp"
#include "copsurv/distributions.hpp"
#include "copsurv/errors.hpp"
#include "copsurv/parallel.hpp"
#include "copsurv/predictive.hpp"
#include "copsurv/random.hpp"

namespace copsurv {

/// A sequential predictive that the imputation engine can drive.
template <typename M>
concept SequentialModel = std::copy_constructible<M> &&
    requires(M m, const M cm, double y, const EvalPoint& at, std::span<const double> x) {
      { cm.evaluate(y, x) } -> std::same_as<EvalPoint>;
      m.absorb_observed(y, at, x);
      m.absorb_imputed(y, x);
    };

struct ImputeOptions {
  std::size_t particles = 1000;
  double ess_frac = 0.5;  // resample when ESS < ess_frac * particles; 0 disables
  std::uint64_t seed = 0;
  unsigned threads = 1;
};

template <SequentialModel Model>
struct Particle {
  Model fit;
  double log_weight = 0.0;           // unnormalized, since the last resample
  std::map<std::size_t, double> imputed_u;  // dataset position -> drawn u
  std::size_t ancestor = 0;           // slot holding the first censored draw
};

template <SequentialModel Model>
struct ParticleEnsemble {
  std::vector<Particle<Model>> particles;
  std::vector<double> ess_trace;            // per record, before resampling
  std::vector<std::size_t> unique_trace;    // per record, after resampling
  std::vector<std::size_t> resample_steps;  // dataset positions
  double log_Z = 0.0;

  std::size_t size() const { return particles.size(); }
  double final_ess() const { return ess_trace.empty() ? static_cast<double>(size()) : ess_trace.back(); }
  std::vector<double> normalized_weights() const;
  std::vector<DiagnosticRow> diagnostics() const;
};

namespace detail {

/// log(mean(exp(lw))) with a max shift; -inf if every entry is -inf.
inline double log_mean_exp(std::span<const double> lw) {
  const double m = *std::max_element(lw.begin(), lw.end());
  if (m == -std::numeric_limits<double>::infinity()) return m;
  double s = 0.0;
  for (double w : lw) s += std::exp(w - m);
  return m + std::log(s / static_cast<double>(lw.size()));
}

inline std::vector<double> normalize_log_weights(std::span<const double> lw) {
  std::vector<double> w(lw.size());
  const double m = *std::max_element(lw.begin(), lw.end());
  if (m == -std::numeric_limits<double>::infinity()) return std::vector<double>(lw.size(), 0.0);
  double s = 0.0;
  for (std::size_t j = 0; j < lw.size(); ++j) s += (w[j] = std::exp(lw[j] - m));
  for (double& x : w) x /= s;
  return w;
}

std::vector<DiagnosticRow> make_diagnostics(std::span<const double> ess,
                                            std::span<const std::size_t> unique,
                                            std::span<const std::size_t> resample_steps);

std::size_t count_unique(std::span<const std::size_t> ids);

}  // namespace detail

/// (sum w)^2 / sum(w^2), invariant to the scale of the weights. Throws
/// DegeneracyError when every weight is zero.
double ess(std::span<const double> weights);

/// Systematic resampling with offset `uniform` in [0, 1): offspring k is the
/// particle whose cumulative weight interval contains (uniform + k) / B.
std::vector<std::size_t> systematic_resample(std::span<const double> weights, double uniform);

template <SequentialModel Model>
std::vector<double> ParticleEnsemble<Model>::normalized_weights() const {
  std::vector<double> lw(particles.size());
  for (std::size_t j = 0; j < lw.size(); ++j) lw[j] = particles[j].log_weight;
  return detail::normalize_log_weights(lw);
}

template <SequentialModel Model>
std::vector<DiagnosticRow> ParticleEnsemble<Model>::diagnostics() const {
  return detail::make_diagnostics(ess_trace, unique_trace, resample_steps);
}

/// Replaces the ensemble by B offspring drawn systematically from its
/// normalized weights; weights reset to uniform.
template <SequentialModel Model>
void systematic_resample(ParticleEnsemble<Model>& ensemble, StreamRng& rng) {
  const auto idx = systematic_resample(ensemble.normalized_weights(), rng.uniform());
  std::vector<Particle<Model>> next;
  next.reserve(idx.size());
  for (const auto k : idx) {
    next.push_back(ensemble.particles[k]);
    next.back().log_weight = 0.0;
  }
  ensemble.particles = std::move(next);
}

/// Sequential importance sampling of the censored values, in dataset order.
///
/// Observed records multiply each particle weight by p(y_i) and absorb
/// v_i = P(y_i). Censored records draw U ~ Uniform(P(c_i), 1), multiply the
/// weight by 1 - P(c_i) and absorb U. After every record the ensemble is
/// resampled when ESS < ess_frac * B. Particle j at record i draws from the
/// stream (seed, impute, j, i), so results do not depend on the thread count.
template <SequentialModel Model>
ParticleEnsemble<Model> impute_smc(const SurvivalDataset& data, const Model& prior,
                                   const ImputeOptions& options) {
  constexpr double neg_inf = -std::numeric_limits<double>::infinity();
  const std::size_t B = options.particles;
  if (B < 2) throw ConfigurationError("impute_smc needs at least 2 particles");
  if (!(options.ess_frac >= 0) || !(options.ess_frac <= 1))
    throw ConfigurationError("ess_frac must lie in [0, 1]");
  if (data.size() == 0) throw DataError("impute_smc: empty dataset");

  ParticleEnsemble<Model> ens;
  ens.particles.assign(B, Particle<Model>{prior, 0.0, {}, 0});
  for (std::size_t j = 0; j < B; ++j) ens.particles[j].ancestor = j;
  bool ancestry_started = false;

  std::vector<double> lw(B);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const double t = data.times[static_cast<Eigen::Index>(i)];
    const bool observed = data.observed(i);
    const auto x = data.covariate(i);

    parallel_for(B, options.threads, [&](std::size_t j) {
      auto& p = ens.particles[j];
      if (p.log_weight == neg_inf) return;
      const EvalPoint at = p.fit.evaluate(t, x);
      if (observed) {
        if (!(at.density > 0) || !std::isfinite(at.density)) {
          p.log_weight = neg_inf;
          return;
        }
        p.log_weight += std::log(at.density);
        p.fit.absorb_observed(t, at, x);
        return;
      }
      const double pc = at.cdf;
      if (!(pc < 1.0 - kProbClamp)) {
        p.log_weight = neg_inf;
        return;
      }
      StreamRng rng(options.seed, StreamTag::impute, j, i);
      double u = pc + (1.0 - pc) * rng.uniform();
      if (u <= pc) u = std::nextafter(pc, 1.0);
      if (u >= 1.0) u = std::nextafter(1.0, 0.0);
      p.log_weight += std::log1p(-pc);
      p.imputed_u[i] = u;
      p.fit.absorb_imputed(u, x);
    });

    if (!observed && !ancestry_started) {
      ancestry_started = true;
      for (std::size_t j = 0; j < B; ++j) ens.particles[j].ancestor = j;
    }

    for (std::size_t j = 0; j < B; ++j) lw[j] = ens.particles[j].log_weight;
    const double top = *std::max_element(lw.begin(), lw.end());
    if (top == -std::numeric_limits<double>::infinity()) {
      ens.ess_trace.push_back(0.0);
      ens.unique_trace.push_back(0);
      throw DegeneracyError("every particle weight vanished at dataset position " + std::to_string(i),
                            ens.diagnostics());
    }
    std::vector<double> w(B);
    for (std::size_t j = 0; j < B; ++j) w[j] = std::exp(lw[j] - top);
    const double e = ess(w);
    ens.ess_trace.push_back(e);
    if (e < options.ess_frac * static_cast<double>(B)) {
      ens.log_Z += detail::log_mean_exp(lw);
      StreamRng rng(options.seed, StreamTag::resample, i);
      systematic_resample(ens, rng);
      ens.resample_steps.push_back(i);
    }
    if (ancestry_started) {
      std::vector<std::size_t> ids(B);
      for (std::size_t j = 0; j < B; ++j) ids[j] = ens.particles[j].ancestor;
      ens.unique_trace.push_back(detail::count_unique(ids));
    } else {
      ens.unique_trace.push_back(B);
    }
  }
  for (std::size_t j = 0; j < B; ++j) lw[j] = ens.particles[j].log_weight;
  ens.log_Z += detail::log_mean_exp(lw);
  return ens;
}

/// Copula imputation. The prior must carry covariates iff the data does.
ParticleEnsemble<PredictiveFit> impute_smc(const SurvivalDataset& data, const PredictiveFit& prior,
                                           const ImputeOptions& options);

/// Estimate of log p(D_n) accumulated over resampling segments.
template <SequentialModel Model>
double log_marginal_likelihood(const ParticleEnsemble<Model>& ensemble) {
  return ensemble.log_Z;
}

/// Held-out score: per record log sum_j w_j [p_j(y|x) if observed, 1 - P_j(c|x) if censored].
struct HeldoutScore {
  double mean;
  double standard_error;
  std::vector<double> per_record;
};

HeldoutScore heldout_log_likelihood(const ParticleEnsemble<PredictiveFit>& ensemble,
                                    const SurvivalDataset& test, unsigned threads = 1);

/// Rows (step, ess, unique_particles, resampled) with 1-based steps.
std::string diagnostics_csv(std::span<const DiagnosticRow> rows);

}  // namespace copsurv

#endif  // COPSURV_CENSORING_HPP
