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


#include "bnnint/metrics.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>

#include "bnnint/error.h"
#include "bnnint/loss.h"
#include "bnnint/random.h"

namespace bnnint::metrics {
namespace {

using interaction::InteractionTable;
using interaction::Order;

std::string Fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

OrderMetrics EmptyMetrics(size_t n) {
  OrderMetrics m;
  m.n_active = n;
  m.variance.assign(n + 1, 0.0);
  m.stability.assign(n + 1, 0.0);
  m.strength.assign(n + 1, 0.0);
  m.count.assign(n + 1, 0);
  m.flagged.assign(n + 1, 0);
  return m;
}

std::vector<double> InputGradient(const nn::MlpModel& model,
                                  std::span<const double> x, int label) {
  const Tensor input = Tensor::Vector({x.begin(), x.end()});
  return nn::Backward(model, input, nn::SoftmaxCrossEntropy(label)).input.values();
}

void SignStepAndProject(std::span<const double> x, std::span<const double> grad,
                        const PgdConfig& config, std::vector<double>* adv) {
  for (size_t i = 0; i < adv->size(); ++i) {
    const double g = grad[i];
    const double step = g > 0.0 ? config.step_size : (g < 0.0 ? -config.step_size : 0.0);
    const double moved = (*adv)[i] + step;
    double v = std::clamp(moved, x[i] - config.epsilon, x[i] + config.epsilon);
    // x +- eps can round outside the ball; pull back by ulps.
    while (v - x[i] > config.epsilon) v = std::nextafter(v, x[i]);
    while (x[i] - v > config.epsilon) v = std::nextafter(v, x[i]);
    (*adv)[i] = v;
  }
}

void ValidatePgd(const PgdConfig& config) {
  if (!(config.epsilon >= 0.0) || !(config.step_size >= 0.0)) {
    throw ArgumentError("PGD epsilon and step size must be non-negative");
  }
}

}  // namespace

void ValidateNoise(const NoiseSpec& noise, double tau) {
  if (!(noise.variance > 0.0)) throw ArgumentError("noise variance must be positive");
  if (noise.draws < 2) throw ArgumentError("need at least 2 noise draws");
  if (!(std::sqrt(noise.variance) < tau)) {
    throw ArgumentError("noise sigma must be smaller than tau");
  }
}

OrderMetrics OrderStatistics(
    const std::function<InteractionTable(size_t)>& table_for_draw, size_t draws) {
  if (draws < 2) throw ArgumentError("need at least 2 draws");
  std::vector<double> mean, m2, abs_mean;
  size_t n = 0;
  for (size_t d = 0; d < draws; ++d) {
    const InteractionTable table = table_for_draw(d);
    if (d == 0) {
      n = table.n_active;
      mean.assign(table.values.size(), 0.0);
      m2.assign(table.values.size(), 0.0);
      abs_mean.assign(table.values.size(), 0.0);
    } else if (table.n_active != n) {
      throw ShapeError("tables differ in size across draws");
    }
    const double count = static_cast<double>(d + 1);
    for (size_t m = 0; m < table.values.size(); ++m) {
      const double v = table.values[m];
      const double delta = v - mean[m];
      mean[m] += delta / count;
      m2[m] += delta * (v - mean[m]);
      abs_mean[m] += (std::abs(v) - abs_mean[m]) / count;
    }
  }
  OrderMetrics out = EmptyMetrics(n);
  out.draws = draws;
  out.samples = 1;
  for (size_t m = 1; m < mean.size(); ++m) {
    const int s = Order(m);
    const double var = m2[m] / static_cast<double>(draws - 1);
    out.variance[s] += var;
    double floored = var;
    if (var < kStabilityVarianceFloor) {
      floored = kStabilityVarianceFloor;
      ++out.flagged[s];
    }
    out.stability[s] += std::abs(mean[m]) / floored;
    out.strength[s] += abs_mean[m];
    ++out.count[s];
  }
  for (size_t s = 1; s <= n; ++s) {
    const double c = static_cast<double>(out.count[s]);
    out.variance[s] /= c;
    out.stability[s] /= c;
    out.strength[s] /= c;
  }
  return out;
}

OrderMetrics OrderVarianceStabilityNoise(const interaction::ValueFunction& value,
                                         const interaction::MaskContext& ctx,
                                         const NoiseSpec& noise) {
  ValidateNoise(noise, ctx.tau);
  const double sigma = std::sqrt(noise.variance);
  return OrderStatistics(
      [&](size_t d) {
        Rng rng = MakeRng(DeriveSeed(noise.seed, 0x401e, d));
        std::normal_distribution<double> normal(0.0, sigma);
        interaction::MaskContext perturbed = ctx;
        for (double& xi : perturbed.x) xi += normal(rng);
        return interaction::ComputeTable(perturbed, value);
      },
      noise.draws);
}

OrderMetrics OrderVarianceStabilityBnn(const bnn::BnnModel& bnn,
                                       const interaction::MaskContext& ctx,
                                       int label, size_t weight_draws,
                                       uint64_t seed) {
  return OrderStatistics(
      [&](size_t d) {
        const nn::MlpModel sampled =
            bnn::SampleWeights(bnn, DeriveSeed(seed, 0x3e16, d));
        return interaction::ComputeTable(ctx,
                                         interaction::MlpLogOdds(sampled, label));
      },
      weight_draws);
}

OrderMetrics AverageOrderMetrics(const std::vector<OrderMetrics>& per_sample) {
  if (per_sample.empty()) throw ArgumentError("no samples to average");
  const size_t n = per_sample.front().n_active;
  OrderMetrics out = EmptyMetrics(n);
  out.draws = per_sample.front().draws;
  for (const OrderMetrics& m : per_sample) {
    if (m.n_active != n) throw ShapeError("metrics differ in n_active");
    for (size_t s = 1; s <= n; ++s) {
      out.variance[s] += m.variance[s];
      out.stability[s] += m.stability[s];
      out.strength[s] += m.strength[s];
      out.flagged[s] += m.flagged[s];
      out.count[s] = m.count[s];
    }
    out.samples += m.samples;
  }
  const double k = static_cast<double>(per_sample.size());
  for (size_t s = 1; s <= n; ++s) {
    out.variance[s] /= k;
    out.stability[s] /= k;
    out.strength[s] /= k;
  }
  return out;
}

std::vector<double> OrderStrength(const InteractionTable& table) {
  std::vector<double> sum(table.n_active + 1, 0.0);
  std::vector<size_t> count(table.n_active + 1, 0);
  for (size_t m = 1; m < table.values.size(); ++m) {
    sum[Order(m)] += std::abs(table.values[m]);
    ++count[Order(m)];
  }
  for (size_t s = 1; s <= table.n_active; ++s) sum[s] /= static_cast<double>(count[s]);
  return sum;
}

std::vector<double> AverageStrength(const std::vector<InteractionTable>& tables) {
  if (tables.empty()) throw ArgumentError("no tables");
  std::vector<double> out(tables.front().n_active + 1, 0.0);
  for (const InteractionTable& t : tables) {
    if (t.n_active != tables.front().n_active) throw ShapeError("tables differ in size");
    const std::vector<double> s = OrderStrength(t);
    for (size_t i = 0; i < out.size(); ++i) out[i] += s[i];
  }
  for (double& v : out) v /= static_cast<double>(tables.size());
  return out;
}

double JaccardSimilarity(std::span<const double> a, std::span<const double> b,
                         bool* degenerate) {
  if (a.size() != b.size()) throw ShapeError("vectors differ in length");
  double lo = 0.0;
  double hi = 0.0;
  for (size_t i = 0; i < a.size(); ++i) {
    const double ap = std::max(a[i], 0.0), an = -std::min(a[i], 0.0);
    const double bp = std::max(b[i], 0.0), bn = -std::min(b[i], 0.0);
    lo += std::min(ap, bp) + std::min(an, bn);
    hi += std::max(ap, bp) + std::max(an, bn);
  }
  if (degenerate != nullptr) *degenerate = hi == 0.0;
  if (hi == 0.0) return 1.0;
  return lo / hi;
}

GeneralizationReport Generalization(const std::vector<InteractionTable>& train_tables,
                                    const std::vector<int>& train_labels,
                                    const std::vector<InteractionTable>& test_tables,
                                    const std::vector<int>& test_labels) {
  if (train_tables.size() != train_labels.size() ||
      test_tables.size() != test_labels.size()) {
    throw ShapeError("tables and labels differ in count");
  }
  if (train_tables.empty() || test_tables.empty()) {
    throw ArgumentError("need train and test tables");
  }
  const size_t n = train_tables.front().n_active;
  const size_t masks = size_t{1} << n;
  // Per category: summed tables and counts for each split.
  std::map<int, std::vector<double>> train_sum, test_sum;
  std::map<int, size_t> train_count, test_count;
  auto accumulate = [&](const std::vector<InteractionTable>& tables,
                        const std::vector<int>& labels,
                        std::map<int, std::vector<double>>& sums,
                        std::map<int, size_t>& counts) {
    for (size_t i = 0; i < tables.size(); ++i) {
      if (tables[i].n_active != n) throw ShapeError("tables differ in size");
      auto& sum = sums[labels[i]];
      sum.resize(masks, 0.0);
      for (size_t m = 0; m < masks; ++m) sum[m] += tables[i].values[m];
      ++counts[labels[i]];
    }
  };
  accumulate(train_tables, train_labels, train_sum, train_count);
  accumulate(test_tables, test_labels, test_sum, test_count);

  GeneralizationReport report;
  for (const auto& [c, unused] : train_sum) {
    if (!test_sum.count(c)) {
      throw ArgumentError("category " + std::to_string(c) + " has no test samples");
    }
    report.categories.push_back(c);
  }
  for (const auto& [c, unused] : test_sum) {
    if (!train_sum.count(c)) {
      throw ArgumentError("category " + std::to_string(c) + " has no train samples");
    }
  }
  report.g.assign(n + 1, 0.0);
  report.per_category.assign(n + 1, {});
  for (size_t order = 1; order <= n; ++order) {
    for (int c : report.categories) {
      std::vector<double> a, b;
      const double tr = static_cast<double>(train_count[c]);
      const double te = static_cast<double>(test_count[c]);
      for (size_t m = 1; m < masks; ++m) {
        if (static_cast<size_t>(Order(m)) != order) continue;
        a.push_back(train_sum[c][m] / tr);
        b.push_back(test_sum[c][m] / te);
      }
      bool degenerate = false;
      const double sim = JaccardSimilarity(a, b, &degenerate);
      if (degenerate) ++report.degenerate;
      report.per_category[order].push_back(sim);
      report.g[order] += sim;
    }
    report.g[order] /= static_cast<double>(report.categories.size());
  }
  return report;
}

std::vector<double> PgdAttack(const nn::MlpModel& model, std::span<const double> x,
                              int label, const PgdConfig& config) {
  ValidatePgd(config);
  std::vector<double> adv(x.begin(), x.end());
  for (size_t step = 0; step < config.steps; ++step) {
    SignStepAndProject(x, InputGradient(model, adv, label), config, &adv);
  }
  return adv;
}

std::vector<double> PgdAttackBnn(const bnn::BnnModel& bnn, std::span<const double> x,
                                 int label, const PgdConfig& config, uint64_t seed) {
  ValidatePgd(config);
  std::vector<double> adv(x.begin(), x.end());
  for (size_t step = 0; step < config.steps; ++step) {
    const nn::MlpModel sampled = bnn::SampleWeights(bnn, DeriveSeed(seed, 0x96d, step));
    SignStepAndProject(x, InputGradient(sampled, adv, label), config, &adv);
  }
  return adv;
}

RobustnessRow EvaluateRobustness(const nn::MlpModel& model, const Dataset& data,
                                 const PgdConfig& config,
                                 const std::string& model_id) {
  RobustnessRow row{model_id, 0.0, 0.0, config.epsilon, config.steps};
  nn::Evaluator eval(model);
  for (size_t r = 0; r < data.rows(); ++r) {
    const int y = data.labels[r];
    if (static_cast<int>(nn::Argmax(eval.Logits(data.features.row(r)))) == y) {
      row.clean_acc += 1.0;
    }
    const std::vector<double> adv = PgdAttack(model, data.features.row(r), y, config);
    if (static_cast<int>(nn::Argmax(eval.Logits(adv))) == y) row.adv_acc += 1.0;
  }
  row.clean_acc /= static_cast<double>(data.rows());
  row.adv_acc /= static_cast<double>(data.rows());
  return row;
}

RobustnessRow EvaluateRobustnessBnn(const bnn::BnnModel& bnn, const Dataset& data,
                                    const PgdConfig& config, uint64_t seed,
                                    size_t predict_samples,
                                    const std::string& model_id) {
  RobustnessRow row{model_id, 0.0, 0.0, config.epsilon, config.steps};
  const bnn::Ensemble ensemble(bnn, predict_samples, seed);
  for (size_t r = 0; r < data.rows(); ++r) {
    const int y = data.labels[r];
    if (static_cast<int>(nn::Argmax(ensemble.Predict(data.features.row(r)))) == y) {
      row.clean_acc += 1.0;
    }
    const std::vector<double> adv = PgdAttackBnn(bnn, data.features.row(r), y, config,
                                                 DeriveSeed(seed, 0xa77, r));
    if (static_cast<int>(nn::Argmax(ensemble.Predict(adv))) == y) row.adv_acc += 1.0;
  }
  row.clean_acc /= static_cast<double>(data.rows());
  row.adv_acc /= static_cast<double>(data.rows());
  return row;
}

LinearFit FitLine(std::span<const double> x, std::span<const double> y) {
  if (x.size() != y.size() || x.size() < 2) {
    throw ArgumentError("need at least two paired points");
  }
  const double n = static_cast<double>(x.size());
  double mx = 0.0, my = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    mx += x[i];
    my += y[i];
  }
  mx /= n;
  my /= n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
    syy += (y[i] - my) * (y[i] - my);
  }
  LinearFit fit;
  fit.slope = sxx > 0.0 ? sxy / sxx : 0.0;
  fit.intercept = my - fit.slope * mx;
  fit.r2 = (sxx > 0.0 && syy > 0.0) ? (sxy * sxy) / (sxx * syy) : 0.0;
  return fit;
}

size_t LongestNonincreasingRun(std::span<const double> by_order) {
  size_t best = 0;
  size_t run = 0;
  for (size_t s = 1; s + 1 < by_order.size(); ++s) {
    run = by_order[s + 1] <= by_order[s] ? run + 1 : 0;
    best = std::max(best, run);
  }
  return best;
}

std::vector<MetricRow> MetricRows(const OrderMetrics& m, const std::string& prefix,
                                  uint64_t seed) {
  std::vector<MetricRow> rows;
  for (size_t s = 1; s <= m.n_active; ++s) {
    rows.push_back({"V_" + prefix, s, m.variance[s], m.draws, seed});
    rows.push_back({"K_" + prefix, s, m.stability[s], m.draws, seed});
    rows.push_back({"K_flagged_" + prefix, s, static_cast<double>(m.flagged[s]),
                    m.draws, seed});
  }
  return rows;
}

std::string FormatMetricsCsv(const std::vector<MetricRow>& rows,
                             const std::string& header) {
  std::string out = header.empty() ? "" : "# " + header + "\n";
  out += "metric_name,order,value,draws,seed\n";
  for (const MetricRow& r : rows) {
    out += r.metric_name + "," + std::to_string(r.order) + "," + Fmt(r.value) + "," +
           std::to_string(r.draws) + "," + std::to_string(r.seed) + "\n";
  }
  return out;
}

std::string FormatRobustnessCsv(const std::vector<RobustnessRow>& rows,
                                const std::string& header) {
  std::string out = header.empty() ? "" : "# " + header + "\n";
  out += "model_id,clean_acc,adv_acc,eps,steps\n";
  for (const RobustnessRow& r : rows) {
    out += r.model_id + "," + Fmt(r.clean_acc) + "," + Fmt(r.adv_acc) + "," +
           Fmt(r.epsilon) + "," + std::to_string(r.steps) + "\n";
  }
  return out;
}

}  // namespace bnnint::metrics
