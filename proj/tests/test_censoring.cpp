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

#include <cmath>
#include <vector>

#include <gtest/gtest.h>

#include "copsurv/censoring.hpp"
#include "copsurv/parametric.hpp"
#include "oracles.hpp"

using namespace copsurv;

namespace {

SurvivalDataset records(std::initializer_list<double> t, std::initializer_list<int> s) {
  Eigen::VectorXd times(static_cast<Eigen::Index>(t.size()));
  Eigen::VectorXi status(static_cast<Eigen::Index>(s.size()));
  Eigen::Index i = 0;
  for (double v : t) times[i++] = v;
  i = 0;
  for (int v : s) status[i++] = v;
  return make_dataset(times, status);
}

// Two observed records followed by one censored record.
SurvivalDataset micro() { return records({1.0, 2.0, 3.0}, {1, 1, 0}); }

}  // namespace

TEST(ImputeSmc, FullyObservedCollapses) {
  const auto data = permute(simulate_exponential(40, 1.0, 1e-9, 3), 5);
  ASSERT_EQ(data.observed_count(), data.size());
  const auto prior = PredictiveFit::clayton(1.1);
  const auto ens = impute_smc(data, prior, {64, 0.5, 9, 1});
  EXPECT_TRUE(ens.resample_steps.empty());
  for (double e : ens.ess_trace) EXPECT_EQ(e, 64.0);
  for (const auto& p : ens.particles) {
    EXPECT_EQ(p.log_weight, ens.particles[0].log_weight);
    EXPECT_TRUE(std::equal(p.fit.propagation_values().begin(), p.fit.propagation_values().end(),
                           ens.particles[0].fit.propagation_values().begin()));
  }
  EXPECT_NEAR(log_marginal_likelihood(ens), prequential_log_lik(data, prior), 1e-12);
}

TEST(ImputeSmc, SingleCensoredRecord) {
  const auto data = records({1.3}, {0});
  const auto prior = PredictiveFit::clayton(0.9);
  const double p0 = lomax_cdf(1.3, LomaxParams<double>{0.9, 1.0});
  const auto ens = impute_smc(data, prior, {200, 0.5, 1, 1});
  EXPECT_NEAR(ens.ess_trace.at(0), 200.0, 1e-9);
  EXPECT_NEAR(log_marginal_likelihood(ens), std::log(1.0 - p0), 1e-15);
  for (const auto& p : ens.particles) {
    EXPECT_EQ(p.log_weight, std::log1p(-p0));
    const double u = p.imputed_u.at(0);
    EXPECT_GT(u, p0);
    EXPECT_LT(u, 1.0);
  }
  EXPECT_EQ(ens.unique_trace.at(0), 200u);
}

TEST(ImputeSmc, ImputedTimesFollowTruncatedPredictive) {
  const ConjugateModel model{1.2, 1.0};
  const auto ens = impute_smc(micro(), ConjugatePredictive(model), {10000, 0.5, 17, 1});
  // After the observed pair the predictive is Lomax(3.2, 4); the imputation is its tail beyond 3.
  const LomaxParams<double> pred{3.2, 4.0};
  const double s3 = lomax_survival(3.0, pred);
  std::vector<double> y, w = ens.normalized_weights();
  for (const auto& p : ens.particles) y.push_back(p.fit.imputed_times().at(0));
  for (double v : y) EXPECT_GT(v, 3.0);
  const double ks = oracle::weighted_ks(y, w, [&](double t) { return 1.0 - lomax_survival(t, pred) / s3; });
  EXPECT_LE(ks, 0.05);
}

TEST(ImputeSmc, MarginalLikelihoodMatchesConjugate) {
  const ConjugateModel model{1.2, 1.0};
  const auto ens = impute_smc(micro(), ConjugatePredictive(model), {100000, 0.5, 23, 1});
  EXPECT_LT(std::abs(std::expm1(log_marginal_likelihood(ens) - exact_log_marginal(model, micro()))), 0.01);
}

TEST(ImputeSmc, MarginalLikelihoodIgnoresResamplingThreshold) {
  const ConjugateModel model{1.5, 1.0};
  const auto data = records({0.5, 2.0, 1.0, 0.3, 1.7}, {0, 1, 0, 1, 0});
  const double exact = exact_log_marginal(model, data);
  const auto never = impute_smc(data, ConjugatePredictive(model), {20000, 0.0, 5, 1});
  const auto often = impute_smc(data, ConjugatePredictive(model), {20000, 0.99, 5, 1});
  EXPECT_TRUE(never.resample_steps.empty());
  EXPECT_FALSE(often.resample_steps.empty());
  EXPECT_NEAR(log_marginal_likelihood(never), exact, 0.02);
  EXPECT_NEAR(log_marginal_likelihood(often), exact, 0.02);
}

TEST(ImputeSmc, ResamplesExactlyBelowThreshold) {
  const auto data = permute(simulate_exponential(40, 1.0, 2.0, 4), 4);
  for (double frac : {0.3, 0.5, 0.8}) {
    const auto ens = impute_smc(data, PredictiveFit::clayton(1.0), {300, frac, 12, 1});
    const auto rows = ens.diagnostics();
    ASSERT_EQ(rows.size(), data.size());
    for (const auto& r : rows) EXPECT_EQ(r.resampled, r.ess < frac * 300.0) << r.step;
    const auto again = impute_smc(data, PredictiveFit::clayton(1.0), {300, frac, 12, 1});
    EXPECT_EQ(ens.resample_steps, again.resample_steps);
    EXPECT_EQ(ens.ess_trace, again.ess_trace);
  }
}

TEST(ImputeSmc, NeverResamplesWithZeroFraction) {
  const auto data = observed_first(simulate_exponential(50, 1.0, 2.0, 8));
  const auto ens = impute_smc(data, PredictiveFit::clayton(1.0), {300, 0.0, 12, 1});
  EXPECT_TRUE(ens.resample_steps.empty());
  for (double e : ens.ess_trace) {
    EXPECT_GE(e, 1.0 - 1e-9);
    EXPECT_LE(e, 300.0 + 1e-9);
  }
}

TEST(ImputeSmc, ImputedValuesExceedCensoringCdf) {
  const auto data = permute(simulate_exponential(25, 1.0, 2.0, 6), 6);
  const auto ens = impute_smc(data, PredictiveFit::clayton(0.8), {50, 0.0, 2, 1});
  for (std::size_t j = 0; j < ens.size(); j += 7) {
    const auto& fit = ens.particles[j].fit;
    PredictiveFit prefix = PredictiveFit::clayton(0.8);
    for (std::size_t i = 0; i < data.size(); ++i) {
      const double v = fit.propagation_values()[i];
      if (!data.observed(i)) {
        EXPECT_GT(v, prefix.evaluate(data.times[static_cast<Eigen::Index>(i)]).cdf);
        EXPECT_EQ(v, ens.particles[j].imputed_u.at(i));
      }
      prefix.push(v);
    }
  }
}

TEST(ImputeSmc, UniqueParticlesTrackFirstCensoredAncestry) {
  const auto data = records({0.4, 0.8, 1.2, 0.2, 0.9, 2.5}, {1, 0, 1, 0, 0, 1});
  const auto ens = impute_smc(data, PredictiveFit::clayton(1.0), {100, 0.9, 31, 1});
  EXPECT_EQ(ens.unique_trace[0], 100u);
  for (std::size_t i = 1; i < data.size(); ++i) {
    EXPECT_LE(ens.unique_trace[i], ens.unique_trace[i - 1]);
    if (ens.diagnostics()[i].resampled) continue;
    if (i > 1) EXPECT_EQ(ens.unique_trace[i], ens.unique_trace[i - 1]);
  }
  std::vector<double> first;
  for (const auto& p : ens.particles) first.push_back(p.imputed_u.at(1));
  std::sort(first.begin(), first.end());
  const auto distinct = static_cast<std::size_t>(std::unique(first.begin(), first.end()) - first.begin());
  EXPECT_EQ(distinct, ens.unique_trace.back());
}

TEST(ImputeSmc, ThreadCountInvariant) {
  const auto data = permute(simulate_exponential(30, 1.0, 2.0, 10), 10);
  const auto a = impute_smc(data, PredictiveFit::gaussian(0.5), {120, 0.5, 77, 1});
  const auto b = impute_smc(data, PredictiveFit::gaussian(0.5), {120, 0.5, 77, 3});
  EXPECT_EQ(a.log_Z, b.log_Z);
  EXPECT_EQ(a.ess_trace, b.ess_trace);
  EXPECT_EQ(a.resample_steps, b.resample_steps);
  for (std::size_t j = 0; j < a.size(); ++j) {
    EXPECT_EQ(a.particles[j].log_weight, b.particles[j].log_weight);
    EXPECT_EQ(a.particles[j].imputed_u, b.particles[j].imputed_u);
  }
}

TEST(ImputeSmc, Degeneracy) {
  const auto data = records({1e12, 1.0}, {0, 1});
  try {
    impute_smc(data, PredictiveFit::clayton(1.5), {10, 0.5, 1, 1});
    FAIL() << "expected DegeneracyError";
  } catch (const DegeneracyError& e) {
    ASSERT_EQ(e.trace().size(), 1u);
    EXPECT_EQ(e.trace()[0].step, 1u);
    EXPECT_EQ(e.category(), ErrorCategory::degeneracy);
  }
}

TEST(ImputeSmc, Validation) {
  const auto data = micro();
  EXPECT_THROW(impute_smc(data, PredictiveFit::clayton(1.0), {1, 0.5, 1, 1}), ConfigurationError);
  EXPECT_THROW(impute_smc(data, PredictiveFit::clayton(1.0), {10, 1.5, 1, 1}), ConfigurationError);
  EXPECT_THROW(impute_smc(data, PredictiveFit::clayton(1.0).with_covariates(1, 0.5), {10, 0.5, 1, 1}),
               ConfigurationError);
}

TEST(Ess, Examples) {
  EXPECT_NEAR(ess(std::vector<double>(2000, 0.3)), 2000.0, 1e-9);
  EXPECT_EQ(ess(std::vector<double>(500, 1.0)), 500.0);
  std::vector<double> one(50, 0.0);
  one[7] = 2.0;
  EXPECT_EQ(ess(one), 1.0);
  EXPECT_NEAR(ess(std::vector<double>{0.5, 0.25, 0.25}), 1.0 / (0.25 + 0.0625 + 0.0625), 1e-12);
  EXPECT_THROW(ess(std::vector<double>(4, 0.0)), DegeneracyError);
}

TEST(SystematicResample, UniformWeightsIsIdentity) {
  const std::vector<double> w(17, 1.0 / 17);
  // u = 0 puts every pointer on a cell boundary, where rounding decides.
  for (double u : {1e-9, 0.3, 0.999}) {
    const auto idx = systematic_resample(w, u);
    for (std::size_t k = 0; k < idx.size(); ++k) EXPECT_EQ(idx[k], k);
  }
}

TEST(SystematicResample, PointMass) {
  std::vector<double> w(9, 0.0);
  w[0] = 1.0;
  for (double u : {0.0, 0.5, 0.9999}) {
    const auto idx = systematic_resample(w, u);
    for (auto k : idx) EXPECT_EQ(k, 0u);
  }
}

TEST(SystematicResample, ZeroWeightsNeverChosen) {
  const std::vector<double> w{0.2, 0.0, 0.3, 0.0, 0.5, 0.0};
  for (double u = 0.0; u < 1.0; u += 0.013)
    for (auto k : systematic_resample(w, u)) EXPECT_GT(w[k], 0.0);
}

TEST(SystematicResample, UnbiasedOffspringCounts) {
  const std::size_t B = 10;
  StreamRng wr(5, StreamTag::simulate);
  std::vector<double> w(B);
  double s = 0.0;
  for (auto& v : w) s += (v = 0.5 + wr.uniform());
  for (auto& v : w) v /= s;
  std::vector<double> counts(B, 0.0);
  StreamRng rng(6, StreamTag::resample);
  const int reps = 100000;
  for (int r = 0; r < reps; ++r)
    for (auto k : systematic_resample(w, rng.uniform())) counts[k] += 1.0;
  for (std::size_t j = 0; j < B; ++j) EXPECT_LT(oracle::relative_error(counts[j] / reps, B * w[j]), 0.01) << j;
}

TEST(SystematicResample, EnsembleResetsWeights) {
  const auto data = records({0.5, 1.0}, {0, 0});
  auto ens = impute_smc(data, PredictiveFit::clayton(1.0), {20, 0.0, 3, 1});
  StreamRng rng(1, StreamTag::resample);
  systematic_resample(ens, rng);
  for (const auto& p : ens.particles) EXPECT_EQ(p.log_weight, 0.0);
}

TEST(HeldOut, MatchesPredictiveForObservedEnsemble) {
  const auto train = records({0.5, 1.5, 0.9}, {1, 1, 1});
  const auto ens = impute_smc(train, PredictiveFit::clayton(1.0), {8, 0.5, 1, 1});
  const auto fit = fit_uncensored(train, PredictiveFit::clayton(1.0));
  const auto test = records({0.7, 2.0}, {1, 0});
  const auto score = heldout_log_likelihood(ens, test);
  EXPECT_NEAR(score.per_record[0], std::log(fit.evaluate(0.7).density), 1e-12);
  EXPECT_NEAR(score.per_record[1], std::log(1.0 - fit.evaluate(2.0).cdf), 1e-12);
  EXPECT_NEAR(score.mean, 0.5 * (score.per_record[0] + score.per_record[1]), 1e-15);
  EXPECT_GT(score.standard_error, 0.0);
}

TEST(Diagnostics, CsvLayout) {
  const std::vector<DiagnosticRow> rows{{1, 10.0, 10, false}, {2, 4.5, 7, true}};
  EXPECT_EQ(diagnostics_csv(rows), "step,ess,unique_particles,resampled\n1,10,10,0\n2,4.5,7,1\n");
}
