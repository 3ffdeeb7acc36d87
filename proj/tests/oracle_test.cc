/*
 * Copyright 2026 The bnnint Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */


#include <cmath>
#include <random>
#include <vector>

#include "bnnint/error.h"
#include "bnnint/oracle.h"
#include "bnnint/random.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace bnnint {
namespace {

using oracle::TaylorTermSpec;

TaylorTermSpec Spec(std::vector<int> degree, std::vector<int> sign, double tau = 0.5) {
  TaylorTermSpec spec;
  spec.degree = std::move(degree);
  spec.sign = std::move(sign);
  spec.tau = tau;
  return spec;
}

// E[f(X)] for X ~ N(mu, sigma^2) by composite Simpson over +-12 sigma.
template <typename F>
double GaussianExpectation(F f, double mu, double sigma) {
  constexpr int kIntervals = 20000;
  const double lo = -12.0, hi = 12.0, h = (hi - lo) / kIntervals;
  double sum = 0.0;
  for (int k = 0; k <= kIntervals; ++k) {
    const double z = lo + k * h;
    const double w = (k == 0 || k == kIntervals) ? 1.0 : (k % 2 ? 4.0 : 2.0);
    sum += w * f(mu + sigma * z) * std::exp(-0.5 * z * z);
  }
  return sum * h / 3.0 / std::sqrt(2.0 * M_PI);
}

TEST(JTermTest, Examples) {
  const auto spec = Spec({1, 0, 2}, {1, 1, -1});
  EXPECT_EQ(spec.order(), 2u);
  EXPECT_EQ(oracle::JTermValue(spec, std::vector<double>{0.0, 0.0, 0.0}), 1.0);
  const auto single = Spec({1}, {1});
  EXPECT_DOUBLE_EQ(oracle::JTermValue(single, std::vector<double>{0.25}), 1.5);
  const auto negative = Spec({1}, {-1});
  EXPECT_DOUBLE_EQ(oracle::JTermValue(negative, std::vector<double>{-0.25}), 1.5);
  // (1 + 0.1/0.5) * (1 - 0.2/0.5)^2
  EXPECT_NEAR(oracle::JTermValue(spec, std::vector<double>{0.1, 3.0, 0.2}), 1.2 * 0.36, 1e-15);
  EXPECT_THROW(oracle::ValidateSpec(Spec({1, -1}, {1, 1})), ArgumentError);
  EXPECT_THROW(oracle::ValidateSpec(Spec({1}, {0})), ArgumentError);
  EXPECT_THROW(oracle::ValidateSpec(Spec({1}, {1}, 0.0)), ArgumentError);
  EXPECT_THROW(oracle::ValidateSpec(Spec({1, 1}, {1})), ArgumentError);
}

TEST(JTermTest, SmallNoiseRejection) {
  Rng rng = MakeRng(4);
  std::vector<double> eps(10000);
  const size_t rejected = oracle::SampleSmallNoise(rng, 0.5, 0.5, eps);
  for (double e : eps) EXPECT_LT(std::abs(e), 0.5);
  // P(|z| >= 1) = 0.3173, so about 4650 redraws are expected.
  EXPECT_GT(rejected, 4000u);
  EXPECT_LT(rejected, 5300u);
}

TEST(JTermTest, MonteCarloMeanMatchesQuadrature) {
  const auto spec = Spec({2, 1, 3}, {1, -1, 1});
  const double r = 0.1;
  const auto mc = oracle::MonteCarloJMoments(spec, r, 1000000, 7);
  double expected = 1.0;
  for (int pi : spec.degree) {
    expected *= GaussianExpectation([pi](double x) { return std::pow(x, pi); }, 1.0, r);
  }
  EXPECT_NEAR(mc.moments.mean, expected, 0.005 * expected);
  EXPECT_EQ(mc.draws, 1000000u);
}

TEST(Theorem1Test, ClosedForm) {
  EXPECT_NEAR(oracle::Theorem1ClosedForm(1.0, 1, 0.1).variance, 0.01, 1e-15);
  EXPECT_NEAR(oracle::Theorem1ClosedForm(2.0, 3, 0.1).variance, 0.121204, 1e-12);
  EXPECT_EQ(oracle::Theorem1ClosedForm(2.0, 3, 0.1).mean, 2.0);
  EXPECT_EQ(oracle::Theorem1ClosedForm(1.0, 4, 0.0).variance, 0.0);
  EXPECT_LT(oracle::Theorem1ClosedForm(1.0, 4, 1e-6).variance, 1e-10);
  EXPECT_THROW(oracle::Theorem1ClosedForm(1.0, 2, 1.0), ArgumentError);
}

TEST(Theorem1Test, MatchesMonomialMonteCarlo) {
  struct Case {
    double u;
    size_t order;
  };
  for (const Case c : {Case{1.0, 1}, Case{2.0, 3}}) {
    const double r = 0.1;
    Rng rng = MakeRng(c.order);
    std::normal_distribution<double> normal;
    constexpr int kDraws = 1000000;
    double sum = 0.0, sum2 = 0.0;
    for (int d = 0; d < kDraws; ++d) {
      double v = c.u;
      for (size_t i = 0; i < c.order; ++i) v *= 1.0 + r * normal(rng);
      sum += v;
      sum2 += v * v;
    }
    const double mean = sum / kDraws;
    const double var = (sum2 - kDraws * mean * mean) / (kDraws - 1);
    const auto exact = oracle::Theorem1ClosedForm(c.u, c.order, r);
    EXPECT_NEAR(var, exact.variance, 0.01 * exact.variance) << c.order;
  }
}

TEST(GaussianMomentTest, ExamplesAndQuadrature) {
  for (double s : {0.05, 0.1, 0.5}) {
    EXPECT_NEAR(oracle::GaussianMoment(2, 1.0, s), 1.0 + s * s, 1e-15);
    EXPECT_NEAR(oracle::GaussianMoment(3, 1.0, s), 1.0 + 3.0 * s * s, 1e-15);
    double previous = 1.0;
    for (int k = 0; k <= 6; ++k) {
      const double m = oracle::GaussianMoment(k, 1.0, s);
      const double q = GaussianExpectation([k](double x) { return std::pow(x, k); }, 1.0, s);
      EXPECT_NEAR(m, q, 1e-9 * std::max(1.0, q)) << k;
      if (k >= 1) EXPECT_GE(m, previous);
      previous = m;
    }
  }
  EXPECT_EQ(oracle::GaussianMoment(0, 3.0, 2.0), 1.0);
  EXPECT_EQ(oracle::GaussianMoment(1, 3.0, 2.0), 3.0);
  EXPECT_THROW(oracle::GaussianMoment(-1, 1.0, 1.0), ArgumentError);
}

TEST(Theorem2Test, ChecksPass) {
  const auto pair = oracle::Theorem2Check(Spec({1, 1}, {1, 1}), 0.05, 1000000, 1);
  ASSERT_EQ(pair.size(), 2u);
  for (const auto& row : pair) EXPECT_TRUE(row.pass) << row.check_name;
  const double r = 0.05;
  EXPECT_NEAR(pair[1].analytic_value, std::pow(1.0 + r * r, 2.0) - 1.0, 1e-15);

  const auto square = oracle::Theorem2Check(Spec({2}, {1}), 0.1, 1000000, 2);
  EXPECT_NEAR(square[0].analytic_value, 1.01, 1e-15);
  for (const auto& row : square) EXPECT_TRUE(row.pass) << row.check_name;

  const auto empty = oracle::Theorem2Check(Spec({0, 0}, {1, 1}), 0.1, 1000, 3);
  EXPECT_EQ(empty[0].mc_value, 1.0);
  EXPECT_EQ(empty[1].mc_value, 0.0);
  for (const auto& row : empty) EXPECT_TRUE(row.pass);
}

TEST(Theorem2Test, ConsistentWithTheorem1) {
  for (size_t order = 1; order <= 5; ++order) {
    const auto spec = oracle::LowestDegreeTerm(6, (uint64_t{1} << order) - 1, 0.5);
    const auto analytic = oracle::AnalyticJMoments(spec, 0.1);
    const auto closed = oracle::Theorem1ClosedForm(1.0, order, 0.1);
    EXPECT_NEAR(analytic.mean, closed.mean, 1e-15);
    EXPECT_NEAR(analytic.variance, closed.variance, 1e-15);
  }
}

TEST(PropositionTest, ProductOfIndependentMeans) {
  Rng rng = MakeRng(12);
  std::normal_distribution<double> a(1.0, 0.3), b(-0.5, 0.2);
  constexpr int kDraws = 200000;
  double sum = 0.0, sum2 = 0.0;
  for (int d = 0; d < kDraws; ++d) {
    const double v = a(rng) * b(rng);
    sum += v;
    sum2 += v * v;
  }
  const double mean = sum / kDraws;
  const double var = (sum2 - kDraws * mean * mean) / (kDraws - 1);
  const double ea = 1.0, eb = -0.5, va = 0.09, vb = 0.04;
  const double expected_var = (ea * ea + va) * (eb * eb + vb) - ea * ea * eb * eb;
  EXPECT_NEAR(mean, ea * eb, 3.0 * std::sqrt(var / kDraws));
  // Variance of the sample variance uses the fourth moment; 2% is > 3 SE here.
  EXPECT_NEAR(var, expected_var, 0.02 * expected_var);
}

TEST(Theorem3Test, NestedTerms) {
  const auto inner = Spec({1, 0, 0}, {1, 1, 1});
  const auto outer = Spec({1, 1, 0}, {1, 1, 1});
  const auto report = oracle::Theorem3RatioCheck(inner, outer, 0.1, 1000000, 5);
  EXPECT_GT(report.variance_ratio, 1.0);
  EXPECT_LE(report.stability_bound, 1.0);
  EXPECT_GT(report.variance_margin(), 0.0);
  EXPECT_GE(report.stability_margin(), 0.0);
  EXPECT_GT(report.mc_variance_margin(), 0.0);
  EXPECT_GE(report.mc_stability_margin(), 0.0);
  EXPECT_FALSE(report.degenerate);

  const auto same = oracle::Theorem3RatioCheck(inner, inner, 0.1, 1000, 5);
  EXPECT_TRUE(same.degenerate);
  EXPECT_DOUBLE_EQ(same.variance_ratio, 1.0);
  EXPECT_DOUBLE_EQ(same.stability_ratio, 1.0);

  const auto higher = Spec({2, 1, 3}, {1, -1, 1});
  const auto base = Spec({2, 0, 0}, {1, -1, 1});
  const auto r2 = oracle::Theorem3RatioCheck(base, higher, 0.1, 1000000, 6);
  EXPECT_GT(r2.variance_margin(), 0.0);
  EXPECT_GE(r2.stability_margin(), 0.0);

  EXPECT_THROW(oracle::Theorem3RatioCheck(outer, inner, 0.1, 100, 1), ArgumentError);
  EXPECT_THROW(oracle::Theorem3RatioCheck(Spec({2, 0}, {1, 1}), Spec({1, 1}, {1, 1}), 0.1, 100, 1),
               ArgumentError);
  EXPECT_THROW(oracle::Theorem3RatioCheck(Spec({0, 0}, {1, 1}), Spec({1, 1}, {1, 1}), 0.1, 100, 1),
               ArgumentError);
}

TEST(RegressionTest, ScalarAndZeroTarget) {
  oracle::ConceptRegressionProblem p;
  p.alpha = {0.8};
  p.beta2 = {0.3};
  p.target = 2.0;
  const auto s = oracle::SolveConceptRegression(p);
  EXPECT_NEAR(s.dense[0], 2.0 * 0.8 / (0.64 + 0.3), 1e-15);
  EXPECT_LE(s.agreement, 1e-6);

  p.alpha = {0.5, -1.0, 2.0};
  p.beta2 = {0.1, 0.4, 0.9};
  p.target = 0.0;
  for (double u : oracle::SolveConceptRegression(p).dense) EXPECT_EQ(u, 0.0);
}

TEST(RegressionTest, CoefficientsFollowRelativeStability) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const size_t p = 2 + seed % 7;
    oracle::ConceptRegressionProblem problem;
    problem.alpha = testing::Uniforms(p, seed, 0.2, 2.0);
    problem.beta2 = testing::Uniforms(p, seed + 100, 0.05, 1.0);
    problem.target = 1.5;
    const auto s = oracle::SolveConceptRegression(problem);
    ASSERT_FALSE(s.singular);
    for (size_t i = 1; i < p; ++i) {
      const double expected = (problem.alpha[i] / problem.beta2[i]) /
                              (problem.alpha[0] / problem.beta2[0]);
      EXPECT_NEAR(std::abs(s.dense[i] / s.dense[0]), expected, 1e-6 * expected);
    }
    EXPECT_LE(s.residual, 1e-9);
    EXPECT_LE(s.agreement, 1e-6);
  }
}

TEST(RegressionTest, Errors) {
  oracle::ConceptRegressionProblem p;
  p.alpha = {1.0, 2.0};
  p.beta2 = {0.5, 0.0};
  p.target = 1.0;
  EXPECT_TRUE(oracle::SolveConceptRegression(p).singular);
  p.beta2 = {0.5};
  EXPECT_THROW(oracle::SolveConceptRegression(p), ArgumentError);
  p.alpha.assign(13, 1.0);
  p.beta2.assign(13, 1.0);
  EXPECT_THROW(oracle::SolveConceptRegression(p), ArgumentError);
}

TEST(RegressionTest, DenseSolve) {
  std::vector<double> x;
  ASSERT_TRUE(oracle::SolveDense({0.0, 2.0, 1.0, 1.0}, {4.0, 3.0}, 2, &x));
  EXPECT_NEAR(x[0], 1.0, 1e-15);
  EXPECT_NEAR(x[1], 2.0, 1e-15);
  EXPECT_FALSE(oracle::SolveDense({1.0, 2.0, 2.0, 4.0}, {1.0, 2.0}, 2, &x));
}

TEST(Theorem5Test, ConstructedConcepts) {
  const auto us = testing::Uniforms(100, 8, 0.5, 2.0);
  const auto concepts = oracle::ConstructConcepts(us, 2000, 9);
  ASSERT_EQ(concepts.size(), 100u);
  for (size_t i = 0; i < concepts.size(); ++i) {
    EXPECT_NEAR(concepts[i].mean_i, us[i] * concepts[i].mean_c,
                1e-12 * std::abs(concepts[i].mean_i));
    EXPECT_NEAR(concepts[i].var_i, us[i] * us[i] * concepts[i].var_c, 1e-10 * concepts[i].var_i);
  }
  const auto result = oracle::Theorem5BoundCheck(concepts, 0.5, 2.0);
  EXPECT_TRUE(result.all_hold);
  for (size_t i = 0; i < concepts.size(); ++i) {
    EXPECT_GE(result.lower_margin[i], 0.0);
    EXPECT_GE(result.upper_margin[i], 0.0);
  }

  const std::vector<double> one = {1.3};
  const auto single = oracle::ConstructConcepts(one, 2000, 10);
  const auto tight = oracle::Theorem5BoundCheck(single, 1.3, 1.3);
  EXPECT_TRUE(tight.all_hold);
  const double k_c = std::abs(single[0].mean_c) / single[0].var_c;
  EXPECT_LE(std::abs(tight.lower_margin[0]), 1e-9 * k_c);
  EXPECT_LE(std::abs(tight.upper_margin[0]), 1e-9 * k_c);
}

TEST(SuiteTest, RunsAndFormats) {
  oracle::SuiteConfig config;
  config.draws = 20000;
  config.theorem3_cases = 3;
  const auto rows = oracle::RunOracleSuite(config);
  EXPECT_GT(rows.size(), 10u);
  const std::string csv = oracle::FormatOracleCsv(rows, "seed=0");
  EXPECT_NE(csv.find("check_name,parameters,analytic_value,mc_value,tolerance,pass"),
            std::string::npos);
}

}  // namespace
}  // namespace bnnint
