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


#include "bnnint/oracle.h"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "bnnint/error.h"

namespace bnnint::oracle {
namespace {

std::string Fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::string Short(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%g", v);
  return buffer;
}

std::string DegreeText(const TaylorTermSpec& spec) {
  std::string out = "pi=";
  for (size_t i = 0; i < spec.degree.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(spec.degree[i]);
  }
  return out;
}

double RelativeError(double a, double b) {
  const double scale = std::max(std::abs(a), std::abs(b));
  return scale == 0.0 ? 0.0 : std::abs(a - b) / scale;
}

// Welford accumulator.
struct Running {
  double mean = 0.0;
  double m2 = 0.0;
  size_t n = 0;
  void Add(double v) {
    ++n;
    const double d = v - mean;
    mean += d / static_cast<double>(n);
    m2 += d * (v - mean);
  }
  double variance() const { return n > 1 ? m2 / static_cast<double>(n - 1) : 0.0; }
};

}  // namespace

size_t TaylorTermSpec::order() const {
  return static_cast<size_t>(
      std::count_if(degree.begin(), degree.end(), [](int d) { return d > 0; }));
}

TaylorTermSpec LowestDegreeTerm(size_t n, uint64_t mask, double tau) {
  TaylorTermSpec spec;
  spec.tau = tau;
  spec.degree.assign(n, 0);
  spec.sign.assign(n, 1);
  for (size_t i = 0; i < n; ++i) {
    if ((mask >> i) & 1) spec.degree[i] = 1;
  }
  return spec;
}

void ValidateSpec(const TaylorTermSpec& spec) {
  if (!(spec.tau > 0.0)) throw ArgumentError("tau must be positive");
  if (spec.sign.size() != spec.degree.size()) {
    throw ArgumentError("degree and sign vectors differ in length");
  }
  for (size_t i = 0; i < spec.degree.size(); ++i) {
    if (spec.degree[i] < 0) throw ArgumentError("negative degree");
    if (spec.sign[i] != 1 && spec.sign[i] != -1) {
      throw ArgumentError("signs must be +1 or -1");
    }
  }
}

double JTermValue(const TaylorTermSpec& spec, std::span<const double> eps) {
  if (eps.size() != spec.degree.size()) throw ShapeError("eps has wrong length");
  double j = 1.0;
  for (size_t i = 0; i < eps.size(); ++i) {
    if (spec.degree[i] == 0) continue;
    // x'_i - r_i with x_i - r_i = delta_i * tau.
    const double d = spec.sign[i] * spec.tau + eps[i];
    const double s = d > 0.0 ? 1.0 : (d < 0.0 ? -1.0 : 0.0);
    const double base = s * d / spec.tau;
    double term = 1.0;
    for (int p = 0; p < spec.degree[i]; ++p) term *= base;
    j *= term;
  }
  return j;
}

size_t SampleSmallNoise(Rng& rng, double sigma, double tau, std::span<double> eps) {
  std::normal_distribution<double> normal(0.0, sigma);
  size_t rejections = 0;
  for (double& e : eps) {
    e = normal(rng);
    while (std::abs(e) >= tau) {
      ++rejections;
      e = normal(rng);
    }
  }
  return rejections;
}

MeanVariance Theorem1ClosedForm(double u, size_t order, double sigma_over_tau) {
  if (!(sigma_over_tau >= 0.0 && sigma_over_tau < 1.0)) {
    throw ArgumentError("sigma / tau must lie in [0, 1)");
  }
  const double r2 = sigma_over_tau * sigma_over_tau;
  return {u, u * u * (std::pow(1.0 + r2, static_cast<double>(order)) - 1.0)};
}

double GaussianMoment(int k, double mu, double sigma) {
  if (k < 0) throw ArgumentError("moment order must be non-negative");
  if (k == 0) return 1.0;
  double previous = 1.0;  // E[X^0]
  double current = mu;    // E[X^1]
  const double var = sigma * sigma;
  for (int j = 1; j < k; ++j) {
    const double next = mu * current + j * var * previous;
    previous = current;
    current = next;
  }
  return current;
}

MeanVariance AnalyticJMoments(const TaylorTermSpec& spec, double sigma_over_tau) {
  ValidateSpec(spec);
  double mean = 1.0;
  double second = 1.0;
  for (int d : spec.degree) {
    if (d == 0) continue;
    mean *= GaussianMoment(d, 1.0, sigma_over_tau);
    second *= GaussianMoment(2 * d, 1.0, sigma_over_tau);
  }
  return {mean, second - mean * mean};
}

MonteCarloMoments MonteCarloJMoments(const TaylorTermSpec& spec,
                                     double sigma_over_tau, size_t draws,
                                     uint64_t seed) {
  ValidateSpec(spec);
  Rng rng = MakeRng(DeriveSeed(seed, 0x0a1));
  std::vector<double> eps(spec.degree.size());
  Running acc;
  MonteCarloMoments out;
  const double sigma = sigma_over_tau * spec.tau;
  for (size_t d = 0; d < draws; ++d) {
    out.rejections += SampleSmallNoise(rng, sigma, spec.tau, eps);
    acc.Add(JTermValue(spec, eps));
  }
  out.moments = {acc.mean, acc.variance()};
  out.draws = draws;
  return out;
}

std::vector<OracleRow> Theorem2Check(const TaylorTermSpec& spec,
                                     double sigma_over_tau, size_t draws,
                                     uint64_t seed, double tolerance) {
  const MeanVariance analytic = AnalyticJMoments(spec, sigma_over_tau);
  const MonteCarloMoments mc = MonteCarloJMoments(spec, sigma_over_tau, draws, seed);
  const std::string params = DegreeText(spec) + " sigma_over_tau=" +
                             Short(sigma_over_tau) + " draws=" +
                             std::to_string(draws) + " rejections=" +
                             std::to_string(mc.rejections);
  std::vector<OracleRow> rows;
  rows.push_back({"theorem2_mean", params, analytic.mean, mc.moments.mean, tolerance,
                  RelativeError(analytic.mean, mc.moments.mean) <= tolerance});
  const bool var_ok = spec.order() == 0
                          ? analytic.variance == 0.0 && mc.moments.variance == 0.0
                          : RelativeError(analytic.variance, mc.moments.variance) <=
                                tolerance;
  rows.push_back({"theorem2_variance", params, analytic.variance,
                  mc.moments.variance, tolerance, var_ok});
  return rows;
}

Theorem3Report Theorem3RatioCheck(const TaylorTermSpec& inner,
                                  const TaylorTermSpec& outer,
                                  double sigma_over_tau, size_t draws,
                                  uint64_t seed) {
  ValidateSpec(inner);
  ValidateSpec(outer);
  if (inner.degree.size() != outer.degree.size()) {
    throw ArgumentError("terms must be over the same variables");
  }
  if (inner.order() == 0) throw ArgumentError("inner concept must be nonempty");
  bool equal = true;
  double bound_product = 1.0;
  for (size_t i = 0; i < inner.degree.size(); ++i) {
    if (inner.degree[i] > 0) {
      if (outer.degree[i] != inner.degree[i]) {
        throw ArgumentError("outer degree must extend the inner degree");
      }
    } else if (outer.degree[i] > 0) {
      equal = false;
      bound_product *= GaussianMoment(outer.degree[i], 1.0, sigma_over_tau);
    }
  }
  Theorem3Report report;
  report.degenerate = equal;
  const MeanVariance a = AnalyticJMoments(inner, sigma_over_tau);
  const MeanVariance b = AnalyticJMoments(outer, sigma_over_tau);
  report.variance_ratio = b.variance / a.variance;
  report.variance_bound = bound_product * bound_product;
  report.stability_ratio = (b.mean / b.variance) / (a.mean / a.variance);
  report.stability_bound = 1.0 / bound_product;
  const MeanVariance ma = MonteCarloJMoments(inner, sigma_over_tau, draws, seed).moments;
  const MeanVariance mb = MonteCarloJMoments(outer, sigma_over_tau, draws, seed).moments;
  report.mc_variance_ratio = mb.variance / ma.variance;
  report.mc_stability_ratio = (mb.mean / mb.variance) / (ma.mean / ma.variance);
  return report;
}

bool SolveDense(std::vector<double> a, std::vector<double> b, size_t n,
                std::vector<double>* solution) {
  for (size_t col = 0; col < n; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < n; ++r) {
      if (std::abs(a[r * n + col]) > std::abs(a[pivot * n + col])) pivot = r;
    }
    if (std::abs(a[pivot * n + col]) < 1e-300) return false;
    if (pivot != col) {
      for (size_t c = 0; c < n; ++c) std::swap(a[col * n + c], a[pivot * n + c]);
      std::swap(b[col], b[pivot]);
    }
    for (size_t r = col + 1; r < n; ++r) {
      const double f = a[r * n + col] / a[col * n + col];
      if (f == 0.0) continue;
      for (size_t c = col; c < n; ++c) a[r * n + c] -= f * a[col * n + c];
      b[r] -= f * b[col];
    }
  }
  solution->assign(n, 0.0);
  for (size_t r = n; r-- > 0;) {
    double sum = b[r];
    for (size_t c = r + 1; c < n; ++c) sum -= a[r * n + c] * (*solution)[c];
    (*solution)[r] = sum / a[r * n + r];
  }
  return true;
}

ConceptRegressionSolution SolveConceptRegression(
    const ConceptRegressionProblem& problem) {
  const size_t p = problem.alpha.size();
  if (p == 0 || p > 12) throw ArgumentError("need 1..12 concepts");
  if (problem.beta2.size() != p) throw ArgumentError("alpha and beta2 differ in length");
  ConceptRegressionSolution out;
  std::vector<double> m(p * p);
  for (size_t i = 0; i < p; ++i) {
    if (!(problem.beta2[i] > 0.0)) out.singular = true;
    for (size_t j = 0; j < p; ++j) {
      m[i * p + j] = problem.alpha[i] * problem.alpha[j] + (i == j ? problem.beta2[i] : 0.0);
    }
  }
  std::vector<double> rhs(p);
  for (size_t i = 0; i < p; ++i) rhs[i] = problem.target * problem.alpha[i];
  if (!SolveDense(m, rhs, p, &out.dense)) {
    out.singular = true;
    return out;
  }
  auto residual = [&](const std::vector<double>& u, std::vector<double>* r) {
    double worst = 0.0;
    for (size_t i = 0; i < p; ++i) {
      double sum = -rhs[i];
      for (size_t j = 0; j < p; ++j) sum += m[i * p + j] * u[j];
      (*r)[i] = sum;
      worst = std::max(worst, std::abs(sum));
    }
    return worst;
  };
  std::vector<double> r(p);
  out.residual = residual(out.dense, &r);

  // Gradient descent on E[(y* - U.C)^2]; the gradient is 2 (M U - y* alpha).
  double trace = 0.0;
  for (size_t i = 0; i < p; ++i) trace += m[i * p + i];
  const double step = 1.0 / trace;
  std::vector<double> u(p, 0.0);
  constexpr size_t kMaxIterations = 10000000;
  for (out.iterations = 0; out.iterations < kMaxIterations; ++out.iterations) {
    residual(u, &r);
    double largest = 0.0;
    for (size_t i = 0; i < p; ++i) {
      const double delta = step * r[i];
      u[i] -= delta;
      largest = std::max(largest, std::abs(delta));
    }
    if (largest < 1e-15) break;
  }
  out.gradient_descent = u;
  for (size_t i = 0; i < p; ++i) {
    out.agreement = std::max(out.agreement, std::abs(u[i] - out.dense[i]));
  }
  return out;
}

std::vector<ConceptStats> ConstructConcepts(std::span<const double> u, size_t draws,
                                            uint64_t seed) {
  if (draws < 2) throw ArgumentError("need at least 2 draws");
  std::vector<ConceptStats> out;
  for (size_t s = 0; s < u.size(); ++s) {
    Rng rng = MakeRng(DeriveSeed(seed, 0x75, s));
    std::uniform_real_distribution<double> level(0.2, 2.0);
    std::uniform_real_distribution<double> spread(0.05, 0.5);
    const double a = level(rng);
    const double b = spread(rng);
    // Product of shifted Gaussians: skewed, strictly non-Gaussian.
    std::normal_distribution<double> normal(0.0, 1.0);
    Running c_acc, i_acc;
    for (size_t d = 0; d < draws; ++d) {
      const double c = (a + b * normal(rng)) * (1.0 + 0.3 * b * normal(rng));
      c_acc.Add(c);
      i_acc.Add(u[s] * c);
    }
    out.push_back({u[s], i_acc.mean, i_acc.variance(), c_acc.mean, c_acc.variance()});
  }
  return out;
}

Theorem5Result Theorem5BoundCheck(const std::vector<ConceptStats>& concepts,
                                  double a_min, double a_max) {
  constexpr double kSlack = 1e-9;
  Theorem5Result result;
  for (const ConceptStats& c : concepts) {
    if (!(c.var_i > 0.0) || !(c.var_c > 0.0)) {
      result.lower_margin.push_back(0.0);
      result.upper_margin.push_back(0.0);
      result.skipped.push_back(true);
      continue;
    }
    const double k_i = std::abs(c.mean_i) / c.var_i;
    const double k_c = std::abs(c.mean_c) / c.var_c;
    const double lower = k_c - a_min * k_i;
    const double upper = a_max * k_i - k_c;
    result.lower_margin.push_back(lower);
    result.upper_margin.push_back(upper);
    result.skipped.push_back(false);
    const double scale = std::max(k_c, 1e-300);
    if (lower < -kSlack * scale || upper < -kSlack * scale) result.all_hold = false;
  }
  return result;
}

std::vector<OracleRow> RunOracleSuite(const SuiteConfig& config) {
  std::vector<OracleRow> rows;
  const size_t draws = config.draws;
  uint64_t stream = 0;
  auto next_seed = [&] { return DeriveSeed(config.seed, 0x5e7, stream++); };

  for (double r : {0.05, 0.1}) {
    for (size_t order = 1; order <= 6; ++order) {
      const TaylorTermSpec spec = LowestDegreeTerm(order, (uint64_t{1} << order) - 1, 0.5);
      const MeanVariance closed = Theorem1ClosedForm(1.0, order, r);
      const MonteCarloMoments mc = MonteCarloJMoments(spec, r, draws, next_seed());
      rows.push_back({"theorem1_variance",
                      "order=" + std::to_string(order) + " sigma_over_tau=" + Short(r) +
                          " draws=" + std::to_string(draws),
                      closed.variance, mc.moments.variance, 0.01,
                      RelativeError(closed.variance, mc.moments.variance) <= 0.01});
    }
  }

  for (double sigma : {0.05, 0.1, 0.5}) {
    Rng rng = MakeRng(next_seed());
    std::normal_distribution<double> normal(1.0, sigma);
    std::vector<double> sums(7, 0.0);
    for (size_t d = 0; d < draws; ++d) {
      const double x = normal(rng);
      double power = 1.0;
      for (int k = 0; k <= 6; ++k) {
        sums[k] += power;
        power *= x;
      }
    }
    double previous = 0.0;
    for (int k = 0; k <= 6; ++k) {
      const double analytic = GaussianMoment(k, 1.0, sigma);
      const double mc = sums[k] / static_cast<double>(draws);
      const bool monotone = k == 0 || analytic >= previous;
      previous = analytic;
      rows.push_back({"gaussian_moment",
                      "k=" + std::to_string(k) + " mu=1 sigma=" + Short(sigma),
                      analytic, mc, 0.01,
                      RelativeError(analytic, mc) <= 0.01 && monotone});
    }
  }

  const std::vector<TaylorTermSpec> theorem2_specs = {
      {{1, 1}, {1, 1}, 0.5}, {{2}, {1}, 0.5}, {{1, 2, 0}, {1, -1, 1}, 0.5},
      {{3, 1}, {-1, 1}, 0.5}, {{0, 0}, {1, 1}, 0.5}};
  for (const TaylorTermSpec& spec : theorem2_specs) {
    for (double r : {0.05, 0.1}) {
      for (OracleRow& row : Theorem2Check(spec, r, draws, next_seed())) {
        rows.push_back(std::move(row));
      }
    }
  }

  Rng case_rng = MakeRng(next_seed());
  for (size_t c = 0; c < config.theorem3_cases; ++c) {
    const size_t n = 2 + case_rng() % 4;
    TaylorTermSpec outer{std::vector<int>(n), std::vector<int>(n, 1), 0.5};
    for (size_t i = 0; i < n; ++i) {
      outer.degree[i] = 1 + static_cast<int>(case_rng() % 3);
      outer.sign[i] = case_rng() % 2 ? 1 : -1;
    }
    TaylorTermSpec inner = outer;
    const size_t keep = 1 + case_rng() % (n - 1);
    for (size_t i = keep; i < n; ++i) inner.degree[i] = 0;
    const double r = case_rng() % 2 ? 0.05 : 0.1;
    const Theorem3Report rep =
        Theorem3RatioCheck(inner, outer, r, draws / 10, next_seed());
    const std::string params = DegreeText(inner) + " -> " + DegreeText(outer) +
                               " sigma_over_tau=" + Short(r);
    rows.push_back({"theorem3_variance_margin", params, rep.variance_margin(),
                    rep.mc_variance_margin(), 0.0,
                    rep.variance_margin() > 0.0 && rep.mc_variance_margin() > 0.0});
    rows.push_back({"theorem3_stability_margin", params, rep.stability_margin(),
                    rep.mc_stability_margin(), 0.0,
                    rep.stability_margin() > 0.0 && rep.mc_stability_margin() > 0.0});
  }

  Rng reg_rng = MakeRng(next_seed());
  std::uniform_real_distribution<double> alpha_dist(-2.0, 2.0);
  std::uniform_real_distribution<double> beta_dist(0.25, 4.0);
  for (size_t p = 1; p <= 8; ++p) {
    ConceptRegressionProblem problem;
    for (size_t i = 0; i < p; ++i) {
      problem.alpha.push_back(alpha_dist(reg_rng));
      problem.beta2.push_back(beta_dist(reg_rng));
    }
    problem.target = alpha_dist(reg_rng);
    const ConceptRegressionSolution sol = SolveConceptRegression(problem);
    double worst = 0.0;
    const double ref = sol.dense[0] / (problem.alpha[0] / problem.beta2[0]);
    for (size_t i = 0; i < p; ++i) {
      const double ratio = sol.dense[i] / (problem.alpha[i] / problem.beta2[i]);
      worst = std::max(worst, RelativeError(ratio, ref));
    }
    rows.push_back({"theorem4_proportionality", "p=" + std::to_string(p), 0.0, worst,
                    1e-6, !sol.singular && worst <= 1e-6});
    rows.push_back({"theorem4_gradient_descent", "p=" + std::to_string(p), 0.0,
                    sol.agreement, 1e-6, !sol.singular && sol.agreement <= 1e-6});
  }

  std::vector<double> u(100);
  Rng u_rng = MakeRng(next_seed());
  std::uniform_real_distribution<double> u_dist(0.5, 2.0);
  for (double& v : u) v = u_dist(u_rng);
  const auto concepts = ConstructConcepts(u, 10000, next_seed());
  const double a_min = *std::min_element(u.begin(), u.end());
  const double a_max = *std::max_element(u.begin(), u.end());
  const Theorem5Result t5 = Theorem5BoundCheck(concepts, a_min, a_max);
  const double low = *std::min_element(t5.lower_margin.begin(), t5.lower_margin.end());
  const double high = *std::min_element(t5.upper_margin.begin(), t5.upper_margin.end());
  rows.push_back({"theorem5_bounds", "concepts=100", low, high, 1e-9, t5.all_hold});
  return rows;
}

std::string FormatOracleCsv(const std::vector<OracleRow>& rows,
                            const std::string& header) {
  std::string out = header.empty() ? "" : "# " + header + "\n";
  out += "check_name,parameters,analytic_value,mc_value,tolerance,pass\n";
  for (const OracleRow& r : rows) {
    out += r.check_name + "," + r.parameters + "," + Fmt(r.analytic_value) + "," +
           Fmt(r.mc_value) + "," + Fmt(r.tolerance) + "," + (r.pass ? "1" : "0") + "\n";
  }
  return out;
}

}  // namespace bnnint::oracle
