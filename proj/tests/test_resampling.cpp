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
#include <limits>
#include <vector>

#include <gtest/gtest.h>

#include "copsurv/resampling.hpp"
#include "oracles.hpp"

using namespace copsurv;

namespace {

Eigen::ArrayXd row(std::initializer_list<double> v) {
  Eigen::ArrayXd a(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) a[i++] = x;
  return a;
}

PredictiveFit fitted(std::size_t n, std::uint64_t seed, double a = 1.0) {
  return fit_uncensored(simulate_exponential(n, 1.0, 1e-9, seed), PredictiveFit::clayton(a));
}

}  // namespace

TEST(Grid, Validation) {
  EXPECT_THROW(GridSpec(row({1.0})), ConfigurationError);
  EXPECT_THROW(GridSpec(row({-0.1, 1.0})), ConfigurationError);
  EXPECT_THROW(GridSpec(row({0.0, 1.0, 1.0})), ConfigurationError);
  EXPECT_NO_THROW(GridSpec(row({0.0, 1.0})));
  EXPECT_EQ(GridSpec(row({0.5, 1.0, 3.0})).span(), 2.5);
}

TEST(Grid, Default) {
  const auto data = make_dataset((Eigen::VectorXd(3) << 0.5, 2.0, 4.0).finished(), Eigen::VectorXi::Ones(3));
  const auto g = default_grid(data);
  ASSERT_EQ(g.size(), 100);
  EXPECT_EQ(g.points()[0], 0.0);
  EXPECT_NEAR(g.points()[99], 6.0, 1e-12);
  EXPECT_NEAR(g.points()[1], 6e-3, 1e-15);
  for (Eigen::Index i = 2; i < 100; ++i)
    EXPECT_NEAR(g.points()[i] / g.points()[i - 1], g.points()[2] / g.points()[1], 1e-9);
}

TEST(Wasserstein, Examples) {
  const auto g = linear_grid(0.0, 3.0, 301);
  Eigen::ArrayXd a(301), b(301);
  for (Eigen::Index i = 0; i < 301; ++i) {
    a[i] = g.points()[i] >= 1.0 - 1e-12 ? 1.0 : 0.0;
    b[i] = g.points()[i] >= 1.5 - 1e-12 ? 1.0 : 0.0;
  }
  EXPECT_EQ(wasserstein1(a, a, g), 0.0);
  EXPECT_NEAR(wasserstein1(a, b, g), 0.5, 0.01);
  EXPECT_EQ(wasserstein1(a, b, g), wasserstein1(b, a, g));
}

TEST(Median, Examples) {
  EXPECT_EQ(median_from_cdf(row({0.0, 0.5, 1.0}), GridSpec(row({0.0, 1.0, 2.0}))), 1.0);
  EXPECT_EQ(median_from_cdf(row({0.0, 0.25, 0.75, 1.0}), GridSpec(row({0.0, 1.0, 2.0, 3.0}))), 1.5);
  EXPECT_THROW(median_from_cdf(row({0.0, 0.2, 0.4}), GridSpec(row({0.0, 1.0, 2.0}))), CoverageError);
}

TEST(Median, RefinementOracle) {
  const LomaxParams<double> p{1.3, 2.0};
  const auto coarse = linear_grid(0.0, 5.0, 21);
  const auto fine = linear_grid(0.0, 5.0, 201);
  const auto cdf_on = [&](const GridSpec& g) {
    return g.points().unaryExpr([&](double y) { return lomax_cdf(y, p); }).eval();
  };
  const double mc = median_from_cdf(cdf_on(coarse), coarse);
  const double mf = median_from_cdf(cdf_on(fine), fine);
  EXPECT_LT(std::abs(mc - mf), 0.25);
  EXPECT_NEAR(mf, lomax_inv_cdf(0.5, p), 0.025);
}

TEST(Bootstrap, SinglePool) {
  CovariateMatrix pool(1, 2);
  pool << 0.3, -1.0;
  const CovariateResampler r(pool);
  StreamRng rng(3, StreamTag::bootstrap);
  const auto chain = r.new_chain(rng);
  for (int k = 0; k < 20; ++k) {
    const auto x = r.bootstrap_covariate(chain, rng);
    ASSERT_EQ(x.size(), 2u);
    EXPECT_EQ(x[0], 0.3);
    EXPECT_EQ(x[1], -1.0);
  }
}

TEST(Bootstrap, ChainWeightsSumToOne) {
  const CovariateResampler r(CovariateMatrix::Random(6, 1));
  for (std::uint64_t c = 0; c < 10; ++c) {
    StreamRng rng(1, StreamTag::bootstrap, c);
    const auto cum = r.new_chain(rng);
    ASSERT_EQ(cum.size(), 6u);
    EXPECT_NEAR(cum.back(), 1.0, 1e-12);
    for (std::size_t k = 1; k < cum.size(); ++k) EXPECT_GE(cum[k], cum[k - 1]);
  }
}

TEST(Bootstrap, MarginalFrequenciesUniform) {
  CovariateMatrix pool(4, 1);
  pool << 0.0, 1.0, 2.0, 3.0;
  const CovariateResampler r(pool);
  std::vector<double> freq(4, 0.0);
  const int chains = 100000;
  for (int c = 0; c < chains; ++c) {
    StreamRng rng(8, StreamTag::bootstrap, static_cast<std::uint64_t>(c));
    const auto cum = r.new_chain(rng);
    freq[static_cast<std::size_t>(r.bootstrap_covariate(cum, rng)[0])] += 1.0 / chains;
  }
  for (double f : freq) EXPECT_LT(oracle::relative_error(f, 0.25), 0.02);
}

TEST(Bootstrap, EmptyPool) { EXPECT_THROW(CovariateResampler(CovariateMatrix(0, 1)), ConfigurationError); }

TEST(PredictiveResample, ZeroStepsReturnsFit) {
  const auto fit = fitted(15, 2);
  const auto grid = linear_grid(0.0, 4.0, 30);
  StreamRng rng(1, StreamTag::forward);
  const auto r = predictive_resample(fit, 0, grid, {}, rng);
  const auto rows = evaluate_grid(fit, grid.points());
  EXPECT_TRUE((r.cdf == rows.cdf).all());
  EXPECT_TRUE((r.density == rows.density).all());
  ASSERT_EQ(r.w1.size(), 1u);
  EXPECT_EQ(r.w1[0], 0.0);
}

TEST(PredictiveResample, RowsStayValid) {
  const auto fit = fitted(20, 3);
  const auto grid = default_grid(simulate_exponential(20, 1.0, 1e-9, 3));
  for (std::uint64_t s = 0; s < 5; ++s) {
    StreamRng rng(s, StreamTag::forward);
    const auto r = predictive_resample(fit, 2000, grid, {}, rng);
    EXPECT_GE(r.cdf.minCoeff(), 0.0);
    EXPECT_LE(r.cdf.maxCoeff(), 1.0);
    EXPECT_GE(r.density.minCoeff(), 0.0);
    for (Eigen::Index i = 1; i < r.cdf.size(); ++i) EXPECT_GE(r.cdf[i], r.cdf[i - 1]);
    ASSERT_EQ(r.w1.size(), 2001u);
    for (std::size_t k = r.w1.size() - 100; k < r.w1.size(); ++k)
      EXPECT_LT(std::abs(r.w1[k] - r.w1[k - 1]), 1e-3 * grid.span()) << k;
  }
}

TEST(PredictiveResample, MatchesFullRecursion) {
  const auto fit = fitted(10, 4);
  const auto grid = linear_grid(0.0, 3.0, 12);
  StreamRng rng(9, StreamTag::forward);
  const auto r = predictive_resample(fit, 25, grid, {}, rng);
  // Replaying the same uniforms through the physical absorb gives the same rows.
  StreamRng replay(9, StreamTag::forward);
  PredictiveFit f = fit;
  for (int k = 0; k < 25; ++k) f.push(replay.uniform());
  const auto rows = evaluate_grid(f, grid.points());
  for (Eigen::Index i = 0; i < grid.size(); ++i) {
    EXPECT_NEAR(r.cdf[i], rows.cdf[i], 1e-12);
    EXPECT_NEAR(r.density[i], rows.density[i], 1e-12 * std::max(1.0, rows.density[i]));
  }
}

TEST(PredictiveResample, Martingale) {
  const auto fit = fitted(12, 5);
  const auto grid = GridSpec(row({0.0, 0.2, 0.6, 1.0, 1.8, 3.0}));
  const auto start = evaluate_grid(fit, grid.points());
  const int chains = 2000;
  Eigen::ArrayXd sum = Eigen::ArrayXd::Zero(grid.size()), sq = sum;
  for (int c = 0; c < chains; ++c) {
    StreamRng rng(21, StreamTag::forward, static_cast<std::uint64_t>(c));
    const auto r = predictive_resample(fit, 300, grid, {}, rng);
    sum += r.cdf;
    sq += r.cdf.square();
  }
  const Eigen::ArrayXd mean = sum / chains;
  const Eigen::ArrayXd se = ((sq / chains - mean.square()) / chains).sqrt();
  for (Eigen::Index i = 1; i < grid.size(); ++i)
    EXPECT_LT(std::abs(mean[i] - start.cdf[i]), 3.0 * se[i]) << grid.points()[i];
}

TEST(PredictiveResample, ConditionalRowsUseBootstrap) {
  CovariateMatrix x(8, 1);
  x << -1.5, -1.0, -0.5, 0.0, 0.2, 0.5, 1.0, 1.4;
  Eigen::VectorXd t(8);
  t << 0.3, 0.5, 0.7, 1.0, 1.1, 1.4, 2.0, 2.5;
  const auto data = make_dataset(t, Eigen::VectorXi::Ones(8), x, {"x"});
  const auto fit = fit_uncensored(data, PredictiveFit::clayton(1.0).with_covariates(1, 0.6));
  const CovariateResampler pool(x);
  const auto grid = linear_grid(0.0, 4.0, 20);
  const std::vector<double> target{0.5};
  StreamRng a(2, StreamTag::forward), b(2, StreamTag::bootstrap);
  const auto r = predictive_resample(fit, 500, grid, target, a, &pool, &b);
  for (Eigen::Index i = 1; i < r.cdf.size(); ++i) EXPECT_GE(r.cdf[i], r.cdf[i - 1]);
  EXPECT_LE(r.cdf.maxCoeff(), 1.0);
  StreamRng a0(2, StreamTag::forward);
  EXPECT_THROW(predictive_resample(fit, 5, grid, target, a0), ConfigurationError);
}

TEST(MartingalePosterior, UncensoredEqualWeights) {
  const auto data = simulate_exponential(20, 1.0, 1e-9, 6);
  const auto ens = impute_smc(data, PredictiveFit::clayton(1.0), {16, 0.5, 1, 1});
  const auto grid = default_grid(data);
  const auto post = martingale_posterior(ens, grid, {}, {200, 4, 1, 10});
  for (Eigen::Index j = 0; j < post.weights.size(); ++j) EXPECT_NEAR(post.weights[j], 1.0 / 16, 1e-15);
  // Chain j is plain predictive resampling on stream (seed, forward, j).
  StreamRng rng(4, StreamTag::forward, 3);
  const auto r = predictive_resample(ens.particles[3].fit, 200, grid, {}, rng);
  EXPECT_TRUE((post.cdf_draws.row(3).transpose().array() == r.cdf).all());
  EXPECT_EQ(post.w1_trace.cols(), 21);
  EXPECT_EQ(post.w1_trace(3, 20), r.w1[200]);
}

TEST(MartingalePosterior, WeightedMeanMatchesImportanceEstimate) {
  const auto data = permute(simulate_exponential(30, 1.0, 1.5, 7), 7);
  const auto ens = impute_smc(data, PredictiveFit::clayton(1.0), {2000, 0.5, 3, 1});
  const auto grid = GridSpec(row({0.0, 0.3, 0.8, 1.5, 3.0}));
  const auto post = martingale_posterior(ens, grid, {}, {300, 5, 1, 10});
  const auto w = ens.normalized_weights();
  Eigen::VectorXd wv = Eigen::Map<const Eigen::VectorXd>(w.data(), static_cast<Eigen::Index>(w.size()));
  EXPECT_NEAR(post.weights.sum(), 1.0, 1e-12);
  for (Eigen::Index g = 1; g < grid.size(); ++g) {
    double is = 0.0;
    for (std::size_t j = 0; j < w.size(); ++j) is += w[j] * ens.particles[j].fit.evaluate(grid.points()[g]).cdf;
    const Eigen::VectorXd col = post.cdf_draws.col(g);
    const double mean = wv.dot(col);
    const double var = wv.dot((col.array() - mean).square().matrix());
    const double se = std::sqrt(var * wv.squaredNorm());
    EXPECT_LT(std::abs(mean - is), 3.0 * se) << grid.points()[g];
  }
}

TEST(MartingalePosterior, ThreadCountInvariant) {
  const auto data = permute(simulate_exponential(25, 1.0, 2.0, 8), 8);
  const auto ens = impute_smc(data, PredictiveFit::clayton(1.0), {40, 0.5, 3, 1});
  const auto grid = default_grid(data, 50);
  const auto a = martingale_posterior(ens, grid, {}, {400, 9, 1, 10});
  const auto b = martingale_posterior(ens, grid, {}, {400, 9, 4, 10});
  EXPECT_TRUE(a.cdf_draws == b.cdf_draws);
  EXPECT_TRUE(a.density_draws == b.density_draws);
  EXPECT_TRUE(a.w1_trace == b.w1_trace);
  EXPECT_TRUE(a.weights == b.weights);
  for (Eigen::Index j = 0; j < a.medians.size(); ++j)
    EXPECT_TRUE(a.medians[j] == b.medians[j] || (std::isnan(a.medians[j]) && std::isnan(b.medians[j])));
}

TEST(MartingalePosterior, MediansNanWhenUncovered) {
  const auto data = simulate_exponential(20, 1.0, 1e-9, 9);
  const auto ens = impute_smc(data, PredictiveFit::clayton(1.0), {8, 0.5, 1, 1});
  const auto post = martingale_posterior(ens, linear_grid(0.0, 1e-4, 5), {}, {50, 1, 1, 10});
  for (Eigen::Index j = 0; j < post.medians.size(); ++j) EXPECT_TRUE(std::isnan(post.medians[j]));
}

TEST(Summaries, WeightedQuantile) {
  const std::vector<double> v{3.0, 1.0, 2.0}, w{0.2, 0.5, 0.3};
  EXPECT_EQ(weighted_quantile(v, w, 0.5), 1.0);
  EXPECT_EQ(weighted_quantile(v, w, 0.51), 2.0);
  EXPECT_EQ(weighted_quantile(v, w, 0.8), 2.0);
  EXPECT_EQ(weighted_quantile(v, w, 0.81), 3.0);
}

TEST(Summaries, BandAndCsv) {
  Eigen::MatrixXd draws(2, 2);
  draws << 0.1, 0.4, 0.3, 0.8;
  const Eigen::VectorXd w = Eigen::VectorXd::Constant(2, 0.5);
  const auto band = summarize(draws, w);
  EXPECT_NEAR(band.mean[0], 0.2, 1e-15);
  EXPECT_NEAR(band.mean[1], 0.6, 1e-15);
  EXPECT_EQ(band.lower[1], 0.4);
  EXPECT_EQ(band.upper[1], 0.8);
  EXPECT_EQ(band_csv(row({0.0, 1.0}), band), "time,mean,q2.5,q97.5\n0,0.2,0.1,0.3\n1,0.6,0.4,0.8\n");
  const auto raw = draws_csv(row({0.0, 1.0}), draws, w);
  EXPECT_EQ(raw.substr(0, raw.find('\n')), "weight,0,1");
}
