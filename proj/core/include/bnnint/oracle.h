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


// Numeric validators for the perturbation theory of Taylor expansion terms
// and of the concept-regression model.
//
// For a sample whose reference values sit at distance tau (x_i - r_i =
// delta_i * tau), the expansion term of concept S with degree pi is
//   J(S, pi | x') = prod_{i in S} (sign(x'_i - r_i) (x'_i - r_i) / tau)^pi_i,
// which equals prod (1 + delta_i eps_i / tau)^pi_i whenever |eps_i| < tau.

#ifndef BNNINT_ORACLE_H_
#define BNNINT_ORACLE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bnnint/random.h"

namespace bnnint::oracle {

struct TaylorTermSpec {
  std::vector<int> degree;  // pi_i > 0 on S, 0 elsewhere
  std::vector<int> sign;    // delta_i in {-1, +1}
  double tau = 0.5;

  size_t num_variables() const { return degree.size(); }
  size_t order() const;  // |S|
};

// All-ones degree on the variables of `mask` among n, all signs +1.
TaylorTermSpec LowestDegreeTerm(size_t n, uint64_t mask, double tau);

// Throws ArgumentError on negative degrees, signs other than +-1, tau <= 0
// or mismatched lengths.
void ValidateSpec(const TaylorTermSpec& spec);

// Literal J at x' = x + eps with x - r = delta * tau.
double JTermValue(const TaylorTermSpec& spec, std::span<const double> eps);

// Fills eps with N(0, sigma^2) draws, redrawing any coordinate with
// |eps_i| >= tau. Returns the number of redraws.
size_t SampleSmallNoise(Rng& rng, double sigma, double tau, std::span<double> eps);

struct MeanVariance {
  double mean = 0.0;
  double variance = 0.0;
};

// Mean U and variance U^2 ((1 + r^2)^order - 1), r = sigma / tau.
// Throws ArgumentError unless 0 <= r < 1.
MeanVariance Theorem1ClosedForm(double u, size_t order, double sigma_over_tau);

// E[X^k] for X ~ N(mu, sigma^2) by the three-term recurrence.
// Throws ArgumentError if k < 0.
double GaussianMoment(int k, double mu, double sigma);

// Mean and variance of J from products of Gaussian moments of
// X_i = 1 + eps_i / tau ~ N(1, (sigma/tau)^2).
MeanVariance AnalyticJMoments(const TaylorTermSpec& spec, double sigma_over_tau);

struct MonteCarloMoments {
  MeanVariance moments;
  size_t draws = 0;
  size_t rejections = 0;
};

MonteCarloMoments MonteCarloJMoments(const TaylorTermSpec& spec,
                                     double sigma_over_tau, size_t draws,
                                     uint64_t seed);

struct OracleRow {
  std::string check_name;
  std::string parameters;
  double analytic_value = 0.0;
  double mc_value = 0.0;
  double tolerance = 0.0;
  bool pass = false;
};

// Relative agreement of analytic and MC mean and variance (two rows).
// S = {} compares the constant 1 with zero variance exactly.
std::vector<OracleRow> Theorem2Check(const TaylorTermSpec& spec,
                                     double sigma_over_tau, size_t draws,
                                     uint64_t seed, double tolerance = 0.01);

struct Theorem3Report {
  double variance_ratio = 0.0;       // Var[J'] / Var[J]
  double variance_bound = 0.0;       // prod over S' \ S of E^2[X^pi']
  double stability_ratio = 0.0;      // (E'/Var') / (E/Var)
  double stability_bound = 0.0;      // 1 / prod E[X^pi']
  double mc_variance_ratio = 0.0;
  double mc_stability_ratio = 0.0;
  double variance_margin() const { return variance_ratio - variance_bound; }
  double stability_margin() const { return stability_bound - stability_ratio; }
  double mc_variance_margin() const { return mc_variance_ratio - variance_bound; }
  double mc_stability_margin() const { return stability_bound - mc_stability_ratio; }
  bool degenerate = false;  // S == S' (both ratios 1, bounds vacuous)
};

// Requires S subset of S' and pi' extending pi (equal on S). Throws
// ArgumentError otherwise or when S is empty.
Theorem3Report Theorem3RatioCheck(const TaylorTermSpec& inner,
                                  const TaylorTermSpec& outer,
                                  double sigma_over_tau, size_t draws,
                                  uint64_t seed);

struct ConceptRegressionProblem {
  std::vector<double> alpha;  // E[C_S]
  std::vector<double> beta2;  // Var[C_S]
  double target = 0.0;        // y*
};

struct ConceptRegressionSolution {
  std::vector<double> dense;             // LU solve of the normal equation
  std::vector<double> gradient_descent;  // direct minimization of the loss
  double agreement = 0.0;                // max |dense - gradient_descent|
  double residual = 0.0;                 // ||M U - y* alpha||_inf at dense
  size_t iterations = 0;
  bool singular = false;
};

// Normal equation (alpha alpha^T + diag(beta2)) U = y* alpha. Throws
// ArgumentError when p > 12 or the lengths differ; a zero variance or a
// vanishing pivot sets `singular`.
ConceptRegressionSolution SolveConceptRegression(
    const ConceptRegressionProblem& problem);

// LU with partial pivoting. Returns false if a pivot is below 1e-300.
bool SolveDense(std::vector<double> matrix, std::vector<double> rhs, size_t n,
                std::vector<double>* solution);

struct ConceptStats {
  double u = 0.0;  // coefficient with I = u * C
  double mean_i = 0.0;
  double var_i = 0.0;
  double mean_c = 0.0;
  double var_c = 0.0;
};

// Draws C_S for each coefficient from a seeded non-Gaussian law and sets
// I = u C_S draw by draw.
std::vector<ConceptStats> ConstructConcepts(std::span<const double> u,
                                            size_t draws, uint64_t seed);

struct Theorem5Result {
  std::vector<double> lower_margin;  // K_C - A_min K_I
  std::vector<double> upper_margin;  // A_max K_I - K_C
  std::vector<bool> skipped;         // zero variance
  bool all_hold = true;
};

// Bounds checked with a relative slack of 1e-9.
Theorem5Result Theorem5BoundCheck(const std::vector<ConceptStats>& concepts,
                                  double a_min, double a_max);

struct SuiteConfig {
  size_t draws = 1000000;
  uint64_t seed = 0;
  size_t theorem3_cases = 20;
};

// Every check above on a fixed grid of cases.
std::vector<OracleRow> RunOracleSuite(const SuiteConfig& config);

std::string FormatOracleCsv(const std::vector<OracleRow>& rows,
                            const std::string& header);

}  // namespace bnnint::oracle

#endif  // BNNINT_ORACLE_H_
