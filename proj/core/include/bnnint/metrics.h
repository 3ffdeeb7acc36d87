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


// Order-indexed aggregates of interaction tables: variance V(s), relative
// stability K(s), mean strength, train/test generalization g(m), and the
// l-infinity PGD robustness comparison.

#ifndef BNNINT_METRICS_H_
#define BNNINT_METRICS_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "bnnint/bnn.h"
#include "bnnint/dataset.h"
#include "bnnint/interaction.h"
#include "bnnint/mlp.h"

namespace bnnint::metrics {

inline constexpr double kStabilityVarianceFloor = 1e-12;

struct NoiseSpec {
  double variance = 0.05 * 0.05;
  size_t draws = 100;
  uint64_t seed = 0;
};

// Throws ArgumentError unless variance > 0, draws >= 2 and sigma < tau.
void ValidateNoise(const NoiseSpec& noise, double tau);

// Vectors are indexed by order s = 0..n_active; entry 0 is unused (zero).
struct OrderMetrics {
  size_t n_active = 0;
  std::vector<double> variance;   // mean over |S| = s of Var[I(S)]
  std::vector<double> stability;  // mean over |S| = s of |E[I(S)]| / Var[I(S)]
  std::vector<double> strength;   // mean over |S| = s of E|I(S)|
  std::vector<size_t> count;      // binomial(n_active, s)
  std::vector<size_t> flagged;    // concepts whose variance hit the floor
  size_t draws = 0;
  size_t samples = 0;
};

// Aggregates tables(d), d = 0..draws-1, of one sample.
OrderMetrics OrderStatistics(
    const std::function<interaction::InteractionTable(size_t)>& table_for_draw,
    size_t draws);

// Input noise: the table at x + eps with eps ~ N(0, variance I); the
// reference values stay those of the clean sample.
OrderMetrics OrderVarianceStabilityNoise(const interaction::ValueFunction& value,
                                         const interaction::MaskContext& ctx,
                                         const NoiseSpec& noise);

// Weight uncertainty: one table per sampled network (log-odds of that
// single network), clean input.
OrderMetrics OrderVarianceStabilityBnn(const bnn::BnnModel& bnn,
                                       const interaction::MaskContext& ctx,
                                       int label, size_t weight_draws,
                                       uint64_t seed);

// Elementwise mean over samples (flagged counts are summed).
OrderMetrics AverageOrderMetrics(const std::vector<OrderMetrics>& per_sample);

// Per-order mean |I(S)| of one table (index 0 unused).
std::vector<double> OrderStrength(const interaction::InteractionTable& table);
// Mean of OrderStrength over tables.
std::vector<double> AverageStrength(
    const std::vector<interaction::InteractionTable>& tables);

// ||min(a+, b+)||_1 / ||max(a+, b+)||_1 on the nonnegative split
// [max(v, 0), -min(v, 0)]. Two all-zero vectors give 1 and set *degenerate.
double JaccardSimilarity(std::span<const double> a, std::span<const double> b,
                         bool* degenerate = nullptr);

struct GeneralizationReport {
  std::vector<double> g;                           // by order m, index 0 unused
  std::vector<std::vector<double>> per_category;   // [m][category]
  std::vector<int> categories;
  size_t degenerate = 0;
};

// Tables must share one active-variable convention. Categories are the
// distinct labels; each needs at least one train and one test table.
GeneralizationReport Generalization(
    const std::vector<interaction::InteractionTable>& train_tables,
    const std::vector<int>& train_labels,
    const std::vector<interaction::InteractionTable>& test_tables,
    const std::vector<int>& test_labels);

struct PgdConfig {
  double epsilon = 0.1;
  size_t steps = 20;
  double step_size = 0.01;
};

// Sign-gradient ascent on the cross-entropy, projected onto the l-infinity
// ball of radius epsilon around x after every step.
std::vector<double> PgdAttack(const nn::MlpModel& model, std::span<const double> x,
                              int label, const PgdConfig& config);
// Same, each step through a fresh single weight sample.
std::vector<double> PgdAttackBnn(const bnn::BnnModel& bnn,
                                 std::span<const double> x, int label,
                                 const PgdConfig& config, uint64_t seed);

struct RobustnessRow {
  std::string model_id;
  double clean_acc = 0.0;
  double adv_acc = 0.0;
  double epsilon = 0.0;
  size_t steps = 0;
};

RobustnessRow EvaluateRobustness(const nn::MlpModel& model, const Dataset& data,
                                 const PgdConfig& config,
                                 const std::string& model_id);
// Predictions average predict_samples networks drawn with `seed`.
RobustnessRow EvaluateRobustnessBnn(const bnn::BnnModel& bnn, const Dataset& data,
                                    const PgdConfig& config, uint64_t seed,
                                    size_t predict_samples,
                                    const std::string& model_id);

struct LinearFit {
  double slope = 0.0;
  double intercept = 0.0;
  double r2 = 0.0;
};

LinearFit FitLine(std::span<const double> x, std::span<const double> y);

// Longest run of consecutive steps s -> s+1 (s >= 1) with values[s+1] <=
// values[s], counted in steps.
size_t LongestNonincreasingRun(std::span<const double> by_order);

struct MetricRow {
  std::string metric_name;
  size_t order = 0;
  double value = 0.0;
  size_t draws = 0;
  uint64_t seed = 0;
};

std::vector<MetricRow> MetricRows(const OrderMetrics& m, const std::string& prefix,
                                  uint64_t seed);

std::string FormatMetricsCsv(const std::vector<MetricRow>& rows,
                             const std::string& header);
std::string FormatRobustnessCsv(const std::vector<RobustnessRow>& rows,
                                const std::string& header);

}  // namespace bnnint::metrics

#endif  // BNNINT_METRICS_H_
