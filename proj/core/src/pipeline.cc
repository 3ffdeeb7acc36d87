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


#include "bnnint/pipeline.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <numeric>
#include <utility>

#include "bnnint/error.h"
#include "bnnint/oracle.h"
#include "bnnint/parallel.h"
#include "bnnint/random.h"
#include "bnnint/report.h"
#include "bnnint/surrogate.h"
#include "bnnint/svg.h"

namespace bnnint::harness {
namespace {

using interaction::InteractionTable;
using report::FormatNumber;

std::string Hex(uint64_t mask) {
  char buffer[24];
  std::snprintf(buffer, sizeof(buffer), "0x%llx", static_cast<unsigned long long>(mask));
  return buffer;
}

std::string Join(const std::vector<size_t>& values, char sep) {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

std::string ErrorType(const std::exception& e) {
  if (dynamic_cast<const ShapeError*>(&e)) return "shape_error";
  if (dynamic_cast<const ArgumentError*>(&e)) return "argument_error";
  if (dynamic_cast<const NumericError*>(&e)) return "numeric_error";
  if (dynamic_cast<const ParseError*>(&e)) return "parse_error";
  return "error";
}

std::string CsvSafe(std::string text) {
  std::replace(text.begin(), text.end(), ',', ';');
  std::replace(text.begin(), text.end(), '\n', ' ');
  return text;
}

Tensor Rows(const Dataset& data, const std::vector<size_t>& rows) {
  Tensor out({rows.size(), data.num_features()});
  for (size_t r = 0; r < rows.size(); ++r) {
    std::copy(data.features.row(rows[r]).begin(), data.features.row(rows[r]).end(),
              out.row(r).begin());
  }
  return out;
}

}  // namespace

SplitData PrepareData(const ExperimentConfig& config) {
  const uint64_t seed = config.Seed("data");
  const Dataset raw = config.data_csv.empty() ? GenerateSynthetic(config.data, seed)
                                              : ReadCsv(config.data_csv);
  auto [train, test] = SplitTrainTest(raw, config.test_fraction, DeriveSeed(seed, 0x5b1));
  return {std::move(train), std::move(test)};
}

std::vector<size_t> ModelWidths(const ExperimentConfig& config, const Dataset& data) {
  std::vector<size_t> widths = {data.num_features()};
  widths.insert(widths.end(), config.hidden.begin(), config.hidden.end());
  widths.push_back(static_cast<size_t>(data.num_classes));
  return widths;
}

nn::TrainResult RunDnnTraining(const ExperimentConfig& config, const Dataset& train,
                               bool keep_snapshots) {
  const uint64_t seed = config.Seed("dnn");
  const std::vector<size_t> widths = ModelWidths(config, train);
  const nn::MlpModel init = nn::MlpModel::Initialize(widths, DeriveSeed(seed, 1));
  nn::TrainConfig tc;
  tc.learning_rate = config.dnn_lr;
  tc.epochs = config.dnn_epochs;
  tc.batch_size = config.dnn_batch;
  tc.seed = seed;
  tc.keep_snapshots = keep_snapshots;
  return nn::TrainDnn(init, train, tc);
}

bnn::BnnTrainResult RunBnnTraining(const ExperimentConfig& config,
                                   const Dataset& train, bool keep_snapshots) {
  const uint64_t seed = config.Seed("bnn");
  const std::vector<size_t> widths = ModelWidths(config, train);
  const bnn::BnnModel init =
      bnn::BnnModel::Initialize(widths, DeriveSeed(seed, 1), config.bnn_init_sigma);
  bnn::BnnTrainConfig tc;
  tc.train.learning_rate = config.bnn_lr;
  tc.train.epochs = config.bnn_epochs;
  tc.train.batch_size = config.bnn_batch;
  tc.train.seed = seed;
  tc.train.keep_snapshots = keep_snapshots;
  tc.mc_samples = config.bnn_mc_samples;
  tc.kl_weight = config.bnn_kl_weight;
  tc.eval_samples = config.predict_samples;
  return bnn::TrainBnn(init, train, tc);
}

MatchedPair MatchCheckpoints(std::span<const double> dnn_accuracy,
                             std::span<const double> bnn_accuracy,
                             double tolerance) {
  if (dnn_accuracy.empty() || bnn_accuracy.empty()) {
    throw ArgumentError("matching needs two nonempty accuracy logs");
  }
  MatchedPair best;
  bool have_within = false;
  bool have_any = false;
  auto distance = [](size_t a, size_t b) { return a > b ? a - b : b - a; };
  for (size_t i = 0; i < dnn_accuracy.size(); ++i) {
    for (size_t j = 0; j < bnn_accuracy.size(); ++j) {
      MatchedPair c;
      c.dnn_epoch = i;
      c.bnn_epoch = j;
      c.dnn_accuracy = dnn_accuracy[i];
      c.bnn_accuracy = bnn_accuracy[j];
      c.gap = std::abs(c.dnn_accuracy - c.bnn_accuracy);
      const bool within = c.gap <= tolerance;
      bool better = false;
      if (!have_any) {
        better = true;
      } else if (within != have_within) {
        better = within;
      } else if (within) {
        const double low = std::min(c.dnn_accuracy, c.bnn_accuracy);
        const double best_low = std::min(best.dnn_accuracy, best.bnn_accuracy);
        if (low != best_low) {
          better = low > best_low;
        } else if (distance(i, j) != distance(best.dnn_epoch, best.bnn_epoch)) {
          better = distance(i, j) < distance(best.dnn_epoch, best.bnn_epoch);
        } else {
          better = i + j > best.dnn_epoch + best.bnn_epoch;
        }
      } else {
        better = c.gap < best.gap;
      }
      if (better) {
        best = c;
        have_any = true;
        have_within = within;
      }
    }
  }
  best.flagged = !have_within;
  return best;
}

std::vector<size_t> SelectSamples(const Dataset& data, size_t count, uint64_t seed) {
  std::vector<size_t> order(data.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(seed);
  std::shuffle(order.begin(), order.end(), rng);
  std::map<int, std::vector<size_t>> by_class;
  for (size_t r : order) by_class[data.labels[r]].push_back(r);
  std::vector<size_t> out;
  count = std::min(count, data.rows());
  for (size_t k = 0; out.size() < count; ++k) {
    for (const auto& [label, rows] : by_class) {
      if (k < rows.size() && out.size() < count) out.push_back(rows[k]);
    }
  }
  return out;
}

std::vector<size_t> ActiveVariables(const ExperimentConfig& config,
                                    size_t num_features) {
  const size_t n = interaction::ResolveActiveCount(num_features, config.n_active);
  if (n > num_features) {
    throw ArgumentError("n_active " + std::to_string(n) + " exceeds " +
                        std::to_string(num_features) + " features");
  }
  if (n == num_features) {
    std::vector<size_t> all(n);
    std::iota(all.begin(), all.end(), 0);
    return all;
  }
  return interaction::SampleActiveVariables(
      num_features, n, {}, DeriveSeed(config.Seed("interaction"), 0xac7));
}

std::vector<InteractionTable> DnnTables(const nn::MlpModel& model, const Dataset& data,
                                        const std::vector<size_t>& rows,
                                        const std::vector<size_t>& active, double tau,
                                        size_t workers) {
  const std::vector<double> means = data.FeatureMeans();
  std::vector<InteractionTable> tables(rows.size());
  ParallelFor(
      rows.size(),
      [&](size_t k) {
        const auto ctx =
            interaction::MakeContext(data.features.row(rows[k]), means, tau, active);
        tables[k] = interaction::ComputeTable(
            ctx, interaction::MlpLogOdds(model, data.labels[rows[k]]));
      },
      workers);
  return tables;
}

std::vector<InteractionTable> BnnTables(const bnn::BnnModel& model, const Dataset& data,
                                        const std::vector<size_t>& rows,
                                        const std::vector<size_t>& active, double tau,
                                        size_t predict_samples, uint64_t seed,
                                        size_t workers) {
  const std::vector<double> means = data.FeatureMeans();
  const auto ensemble = std::make_shared<const bnn::Ensemble>(model, predict_samples, seed);
  std::vector<InteractionTable> tables(rows.size());
  ParallelFor(
      rows.size(),
      [&](size_t k) {
        const auto ctx =
            interaction::MakeContext(data.features.row(rows[k]), means, tau, active);
        tables[k] = interaction::ComputeTable(
            ctx, interaction::EnsembleLogOdds(ensemble, data.labels[rows[k]]));
      },
      workers);
  return tables;
}

StrengthComparison CompareStrength(const std::string& name,
                                   const std::vector<InteractionTable>& bnn,
                                   const std::vector<InteractionTable>& dnn) {
  StrengthComparison out;
  out.name = name;
  out.bnn = metrics::AverageStrength(bnn);
  out.dnn = metrics::AverageStrength(dnn);
  if (out.bnn.size() != out.dnn.size()) {
    throw ShapeError("strength comparison over different orders");
  }
  out.ratio.assign(out.bnn.size(), 0.0);
  for (size_t s = 1; s < out.bnn.size(); ++s) {
    out.ratio[s] = out.dnn[s] > 0.0 ? out.bnn[s] / out.dnn[s]
                                    : std::numeric_limits<double>::quiet_NaN();
  }
  return out;
}

bool StrengthPatternHolds(const StrengthComparison& comparison) {
  const size_t n = comparison.ratio.size() - 1;
  if (n < 4) return false;
  std::vector<double> xs, ys;
  for (size_t s = 1; s <= n; ++s) {
    const double r = comparison.ratio[s];
    if (!std::isfinite(r)) return false;
    if (3 * s > 2 * n && r >= 1.0) return false;
    if (s >= 3) {
      xs.push_back(static_cast<double>(s));
      ys.push_back(r);
    }
  }
  return metrics::FitLine(xs, ys).slope < 0.0;
}

PlantedRecovery RecoverPlanted(const std::vector<InteractionTable>& tables,
                               const std::vector<size_t>& active,
                               const std::vector<std::vector<size_t>>& planted,
                               double threshold) {
  PlantedRecovery out;
  if (tables.empty()) throw ArgumentError("planted recovery needs tables");
  std::vector<double> mean_abs(tables.front().values.size(), 0.0);
  for (const InteractionTable& t : tables) {
    for (size_t m = 0; m < mean_abs.size(); ++m) mean_abs[m] += std::abs(t.values[m]);
  }
  for (double& v : mean_abs) v /= static_cast<double>(tables.size());
  const std::vector<uint64_t> ranking = interaction::RankConcepts(mean_abs);
  double largest = 0.0;
  for (size_t m = 1; m < mean_abs.size(); ++m) largest = std::max(largest, mean_abs[m]);
  for (const auto& concept_features : planted) {
    uint64_t mask = 0;
    bool inside = true;
    for (size_t f : concept_features) {
      const auto it = std::find(active.begin(), active.end(), f);
      if (it == active.end()) {
        inside = false;
        break;
      }
      mask |= uint64_t{1} << (it - active.begin());
    }
    if (!inside || mask == 0) continue;
    const size_t rank =
        static_cast<size_t>(std::find(ranking.begin(), ranking.end(), mask) -
                            ranking.begin()) + 1;
    out.masks.push_back(mask);
    out.ranks.push_back(rank);
    out.salient.push_back(largest > 0.0 && mean_abs[mask] >= threshold * largest);
  }
  if (out.masks.empty()) return out;
  out.mean_rank = std::accumulate(out.ranks.begin(), out.ranks.end(), 0.0) /
                  static_cast<double>(out.ranks.size());
  out.recovered = out.mean_rank <= 2.0 * static_cast<double>(out.ranks.size()) &&
                  std::all_of(out.salient.begin(), out.salient.end(),
                              [](bool b) { return b; });
  return out;
}

bool PipelineResult::ok() const {
  if (failed) return false;
  return std::all_of(checks.begin(), checks.end(), [](const Check& c) { return c.pass; });
}

std::string ReportHeader(const ExperimentConfig& config, const std::string& stage) {
  std::string out = "config_hash=" + ConfigHash(config) +
                    " seed=" + std::to_string(config.seed);
  if (!stage.empty()) {
    out += " stage=" + stage + " stage_seed=" + std::to_string(config.Seed(stage));
  }
  return out;
}

std::string FormatChecksCsv(const std::vector<Check>& checks, const std::string& header) {
  std::vector<std::vector<std::string>> rows;
  for (const Check& c : checks) {
    rows.push_back({c.name, c.pass ? "1" : "0", CsvSafe(c.detail)});
  }
  return report::FormatCsv(header, {"check", "pass", "detail"}, rows);
}

PipelineResult RunPipeline(const ExperimentConfig& config) {
  PipelineResult result;
  result.config_hash = ConfigHash(config);
  const std::filesystem::path dir(config.output_dir);
  const size_t workers = config.workers;

  auto write = [&](const std::string& name, const std::string& text) {
    report::WriteFile((dir / name).string(), text);
    result.files.push_back(name);
  };
  auto header = [&](const std::string& stage) { return ReportHeader(config, stage); };
  auto check = [&](const std::string& name, bool pass, const std::string& detail) {
    result.checks.push_back({name, pass, detail});
  };

  SplitData data;
  nn::TrainResult dnn;
  bnn::BnnTrainResult bnn_run;
  std::vector<size_t> active;
  std::vector<size_t> strength_rows;
  std::vector<InteractionTable> dnn_train_tables;

  const std::vector<std::pair<std::string, std::function<void()>>> stages = {
      {"config",
       [&] {
         ValidateConfig(config);
         write("config.txt", "# " + header("") + "\n" + CanonicalConfig(config));
       }},
      {"data",
       [&] {
         data = PrepareData(config);
         const NormalizationStats stats = ComputeNormalization(data.train.features);
         double worst_mean = 0.0, worst_var = 0.0;
         for (size_t c = 0; c < stats.means.size(); ++c) {
           worst_mean = std::max(worst_mean, std::abs(stats.means[c]));
           if (data.train.column_stddevs[c] != 1.0 || stats.stddevs[c] != 1.0) {
             worst_var = std::max(worst_var,
                                  std::abs(stats.stddevs[c] * stats.stddevs[c] - 1.0));
           }
         }
         check("normalization", worst_mean <= 1e-9 && worst_var <= 1e-6,
               "max |mean|=" + FormatNumber(worst_mean) +
                   " max |var-1|=" + FormatNumber(worst_var));
         write("data.csv",
               report::FormatCsv(header("data"), {"split", "rows", "features", "classes"},
                                 {{"train", std::to_string(data.train.rows()),
                                   std::to_string(data.train.num_features()),
                                   std::to_string(data.train.num_classes)},
                                  {"test", std::to_string(data.test.rows()),
                                   std::to_string(data.test.num_features()),
                                   std::to_string(data.test.num_classes)}}));
       }},
      {"train",
       [&] {
         dnn = RunDnnTraining(config, data.train, true);
         bnn_run = RunBnnTraining(config, data.train, true);
         std::vector<std::vector<std::string>> rows;
         for (size_t e = 0; e < dnn.epoch_loss.size(); ++e) {
           rows.push_back({"dnn", std::to_string(e + 1), FormatNumber(dnn.epoch_loss[e]),
                           FormatNumber(dnn.epoch_accuracy[e])});
         }
         for (size_t e = 0; e < bnn_run.epoch_loss.size(); ++e) {
           rows.push_back({"bnn", std::to_string(e + 1),
                           FormatNumber(bnn_run.epoch_loss[e]),
                           FormatNumber(bnn_run.epoch_accuracy[e])});
         }
         write("training.csv",
               report::FormatCsv(header("dnn") + " bnn_seed=" +
                                     std::to_string(config.Seed("bnn")),
                                 {"model", "epoch", "loss", "train_accuracy"}, rows));
       }},
      {"interaction",
       [&] {
         const uint64_t seed = config.Seed("interaction");
         const uint64_t ensemble_seed = DeriveSeed(seed, 0xe75);
         active = ActiveVariables(config, data.train.num_features());
         strength_rows = SelectSamples(data.train, config.strength_samples,
                                       DeriveSeed(seed, 0x5a));
         const std::vector<double> variances = bnn::MeanLayerVariances(bnn_run.model);
         const nn::MlpModel psi_theta = bnn::DnnFromBnnMean(bnn_run.model);
         const bnn::BnnModel theta_psi = bnn::BnnFromDnn(dnn.model, variances);
         const MatchedPair pair = MatchCheckpoints(
             dnn.epoch_accuracy, bnn_run.epoch_accuracy, config.matched_accuracy_tolerance);
         check("matched_accuracy", !pair.flagged,
               "gap=" + FormatNumber(pair.gap) + " dnn_epoch=" +
                   std::to_string(pair.dnn_epoch + 1) +
                   " bnn_epoch=" + std::to_string(pair.bnn_epoch + 1));
         write("matched.csv",
               report::FormatCsv(header("interaction"),
                                 {"dnn_epoch", "bnn_epoch", "dnn_train_acc",
                                  "bnn_train_acc", "gap", "flagged"},
                                 {{std::to_string(pair.dnn_epoch + 1),
                                   std::to_string(pair.bnn_epoch + 1),
                                   FormatNumber(pair.dnn_accuracy),
                                   FormatNumber(pair.bnn_accuracy), FormatNumber(pair.gap),
                                   pair.flagged ? "1" : "0"}}));

         auto dnn_tables = [&](const nn::MlpModel& m) {
           return DnnTables(m, data.train, strength_rows, active, config.tau, workers);
         };
         auto bnn_tables = [&](const bnn::BnnModel& m) {
           return BnnTables(m, data.train, strength_rows, active, config.tau,
                            config.predict_samples, ensemble_seed, workers);
         };
         const auto theta_tables = bnn_tables(bnn_run.model);
         const auto psi_theta_tables = dnn_tables(psi_theta);
         dnn_train_tables = dnn_tables(dnn.model);
         const auto theta_psi_tables = bnn_tables(theta_psi);
         const auto matched_dnn = dnn_tables(dnn.snapshots.at(pair.dnn_epoch));
         const auto matched_bnn = bnn_tables(bnn_run.snapshots.at(pair.bnn_epoch));

         double worst = 0.0;
         for (const std::vector<InteractionTable>* set :
              {&std::as_const(dnn_train_tables), &psi_theta_tables}) {
           for (const InteractionTable& t : *set) {
             const std::vector<double> back = interaction::ZetaReconstruct(t);
             for (size_t m = 0; m < back.size(); ++m) {
               worst = std::max(worst, std::abs(back[m] - t.raw[m]));
             }
           }
         }
         check("faithfulness", worst <= 1e-6, "max |v - sum I|=" + FormatNumber(worst));

         const std::vector<StrengthComparison> comparisons = {
             CompareStrength("bnn_vs_mean_dnn", theta_tables, psi_theta_tables),
             CompareStrength("dnn_variance_bnn_vs_dnn", theta_psi_tables,
                             dnn_train_tables),
             CompareStrength("matched_accuracy", matched_bnn, matched_dnn)};
         std::vector<std::vector<std::string>> rows;
         for (const StrengthComparison& c : comparisons) {
           for (size_t s = 1; s < c.ratio.size(); ++s) {
             rows.push_back({c.name, std::to_string(s), FormatNumber(c.bnn[s]),
                             FormatNumber(c.dnn[s]), FormatNumber(c.ratio[s]),
                             std::to_string(strength_rows.size())});
           }
         }
         write("strength.csv",
               report::FormatCsv(header("interaction") +
                                     " samples=" + std::to_string(strength_rows.size()) +
                                     " active=" + Join(active, ';') +
                                     " tau=" + FormatNumber(config.tau),
                                 {"comparison", "order", "bnn_strength", "dnn_strength",
                                  "ratio", "samples"},
                                 rows));

         const std::vector<double> dnn_curve =
             interaction::SparsityCurve(dnn_train_tables.front());
         const std::vector<double> bnn_curve =
             interaction::SparsityCurve(theta_tables.front());
         rows.clear();
         for (size_t k = 0; k < dnn_curve.size(); ++k) {
           rows.push_back({std::to_string(k + 1), FormatNumber(dnn_curve[k]),
                           FormatNumber(bnn_curve[k])});
         }
         write("sparsity.csv",
               report::FormatCsv(header("interaction") + " sample_row=" +
                                     std::to_string(strength_rows.front()),
                                 {"rank", "dnn", "bnn"}, rows));

         rows.clear();
         for (size_t k = 0; k < dnn_train_tables.size(); ++k) {
           const auto salient =
               interaction::ExtractSalient(dnn_train_tables[k], config.salient_threshold);
           for (size_t i = 0; i < salient.concepts.size(); ++i) {
             const auto& [mask, value] = salient.concepts[i];
             rows.push_back({std::to_string(strength_rows[k]), std::to_string(i + 1),
                             Hex(mask), std::to_string(interaction::Order(mask)),
                             FormatNumber(value)});
           }
         }
         write("salient.csv",
               report::FormatCsv(header("interaction") + " threshold=" +
                                     FormatNumber(config.salient_threshold),
                                 {"sample_row", "rank", "mask_hex", "order", "i_value"},
                                 rows));

         if (!data.train.planted_concepts.empty()) {
           const PlantedRecovery rec = RecoverPlanted(
               dnn_train_tables, active, data.train.planted_concepts,
               config.salient_threshold);
           rows.clear();
           for (size_t k = 0; k < rec.masks.size(); ++k) {
             rows.push_back({Hex(rec.masks[k]), std::to_string(rec.ranks[k]),
                             rec.salient[k] ? "1" : "0"});
           }
           write("planted.csv",
                 report::FormatCsv(header("interaction") +
                                       " mean_rank=" + FormatNumber(rec.mean_rank),
                                   {"mask_hex", "rank", "salient"}, rows));
         }
       }},
      {"metrics",
       [&] {
         const uint64_t seed = config.Seed("metrics");
         const std::vector<size_t> rows =
             SelectSamples(data.train, config.metric_samples, DeriveSeed(seed, 1));
         const std::vector<double> means = data.train.FeatureMeans();
         std::vector<metrics::OrderMetrics> noise(rows.size()), weights(rows.size());
         ParallelFor(
             rows.size(),
             [&](size_t k) {
               const auto ctx = interaction::MakeContext(data.train.features.row(rows[k]),
                                                         means, config.tau, active);
               const int label = data.train.labels[rows[k]];
               metrics::NoiseSpec spec{config.noise_sigma * config.noise_sigma,
                                       config.noise_draws, DeriveSeed(seed, 0x10, k)};
               noise[k] = metrics::OrderVarianceStabilityNoise(
                   interaction::MlpLogOdds(dnn.model, label), ctx, spec);
               weights[k] = metrics::OrderVarianceStabilityBnn(
                   bnn_run.model, ctx, label, config.weight_draws,
                   DeriveSeed(seed, 0x20, k));
             },
             workers);
         std::vector<metrics::MetricRow> metric_rows =
             metrics::MetricRows(metrics::AverageOrderMetrics(noise), "noise", seed);
         const auto bnn_rows =
             metrics::MetricRows(metrics::AverageOrderMetrics(weights), "bnn", seed);
         metric_rows.insert(metric_rows.end(), bnn_rows.begin(), bnn_rows.end());
         write("metrics.csv",
               metrics::FormatMetricsCsv(metric_rows,
                                         header("metrics") +
                                             " samples=" + std::to_string(rows.size()) +
                                             " noise_sigma=" +
                                             FormatNumber(config.noise_sigma)));

         const std::vector<size_t> test_rows = SelectSamples(
             data.test, config.strength_samples, DeriveSeed(seed, 0x7e5));
         const auto test_tables =
             DnnTables(dnn.model, data.test, test_rows, active, config.tau, workers);
         std::vector<int> train_labels, test_labels;
         for (size_t r : strength_rows) train_labels.push_back(data.train.labels[r]);
         for (size_t r : test_rows) test_labels.push_back(data.test.labels[r]);
         const metrics::GeneralizationReport g = metrics::Generalization(
             dnn_train_tables, train_labels, test_tables, test_labels);
         std::vector<std::vector<std::string>> g_rows;
         for (size_t m = 1; m < g.g.size(); ++m) {
           g_rows.push_back({std::to_string(m), FormatNumber(g.g[m])});
         }
         write("generalization.csv",
               report::FormatCsv(header("metrics") +
                                     " degenerate=" + std::to_string(g.degenerate),
                                 {"order", "g"}, g_rows));
       }},
      {"surrogate",
       [&] {
         const uint64_t seed = config.Seed("surrogate");
         const std::vector<size_t> rows =
             SelectSamples(data.train, config.surrogate_samples, DeriveSeed(seed, 1));
         surrogate::FitConfig fc;
         fc.steps = config.surrogate_steps;
         fc.learning_rate = config.surrogate_lr;
         fc.draws = config.surrogate_draws;
         fc.seed = seed;
         const surrogate::FitResult fit = surrogate::FitSurrogate(
             bnn_run.model, bnn::DnnFromBnnMean(bnn_run.model), Rows(data.train, rows), fc);
         check("surrogate_fit", !fit.diverged,
               fit.diverged ? fit.diagnostic : "final kl=" +
                                                   FormatNumber(fit.layers.back().kl_after));
         write("surrogate_plan.csv", surrogate::FormatPlanCsv(fit.plan, header("surrogate")));
         write("surrogate_fit.csv",
               surrogate::FormatFitLogCsv(fit, header("surrogate") + " samples=" +
                                                   std::to_string(rows.size())));
       }},
      {"oracle",
       [&] {
         oracle::SuiteConfig sc;
         sc.draws = config.oracle_draws;
         sc.seed = config.Seed("oracle");
         const auto rows = oracle::RunOracleSuite(sc);
         size_t failed = 0;
         for (const auto& r : rows) failed += r.pass ? 0 : 1;
         check("oracles", failed == 0,
               std::to_string(rows.size() - failed) + "/" + std::to_string(rows.size()) +
                   " passed");
         write("oracles.csv", oracle::FormatOracleCsv(rows, header("oracle")));
       }},
      {"attack",
       [&] {
         const uint64_t seed = config.Seed("attack");
         std::vector<size_t> rows(data.test.rows());
         std::iota(rows.begin(), rows.end(), 0);
         if (config.attack_samples > 0 && config.attack_samples < rows.size()) {
           rows = SelectSamples(data.test, config.attack_samples, DeriveSeed(seed, 1));
           std::sort(rows.begin(), rows.end());
         }
         const Dataset subset = data.test.Subset(rows);
         const metrics::PgdConfig pgd{config.pgd_eps, config.pgd_steps, config.pgd_step};
         const std::vector<metrics::RobustnessRow> out = {
             metrics::EvaluateRobustness(dnn.model, subset, pgd, "dnn"),
             metrics::EvaluateRobustness(bnn::DnnFromBnnMean(bnn_run.model), subset, pgd,
                                         "bnn_mean_dnn"),
             metrics::EvaluateRobustnessBnn(bnn_run.model, subset, pgd, seed,
                                            config.predict_samples, "bnn")};
         write("robustness.csv",
               metrics::FormatRobustnessCsv(out, header("attack") + " rows=" +
                                                     std::to_string(rows.size())));
       }},
      {"plot",
       [&] {
         for (const std::string& path : plot::EmitPlots(dir.string())) {
           result.files.push_back(std::filesystem::path(path).filename().string());
         }
       }},
  };

  for (const auto& [name, run] : stages) {
    try {
      run();
    } catch (const std::exception& e) {
      result.failed = true;
      result.failed_stage = name;
      result.error = e.what();
      try {
        write("failure.csv",
              report::FormatCsv(header(""), {"stage", "error_type", "message"},
                                {{name, ErrorType(e), CsvSafe(e.what())}}));
      } catch (const std::exception&) {
        // Nothing more can be reported if the directory is not writable.
      }
      break;
    }
  }
  try {
    write("checks.csv", FormatChecksCsv(result.checks, header("")));
    std::vector<std::vector<std::string>> listed;
    for (const std::string& f : result.files) listed.push_back({f});
    listed.push_back({"manifest.csv"});
    report::WriteFile((dir / "manifest.csv").string(),
                      report::FormatCsv(header(""), {"file"}, listed));
  } catch (const std::exception& e) {
    if (!result.failed) {
      result.failed = true;
      result.failed_stage = "report";
      result.error = e.what();
    }
  }
  return result;
}

}  // namespace bnnint::harness
