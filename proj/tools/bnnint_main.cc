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


// Command-line driver. Every config key is also a --key flag; flags override
// values read with --config.

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "bnnint/bnn.h"
#include "bnnint/checkpoint.h"
#include "bnnint/config.h"
#include "bnnint/error.h"
#include "bnnint/interaction.h"
#include "bnnint/metrics.h"
#include "bnnint/oracle.h"
#include "bnnint/parallel.h"
#include "bnnint/pipeline.h"
#include "bnnint/random.h"
#include "bnnint/report.h"
#include "bnnint/surrogate.h"
#include "bnnint/svg.h"

namespace {

using bnnint::harness::Check;
using bnnint::harness::ExperimentConfig;
using bnnint::report::FormatNumber;

constexpr int kExitChecksFailed = 1;
constexpr int kExitError = 2;

struct Options {
  std::string config_path;
  std::map<std::string, std::string> overrides;
  std::string dnn_path;
  std::string bnn_path;
  std::string model_path;
  std::string split = "train";
  size_t samples = 0;
  std::string bundle;
};

ExperimentConfig ResolveConfig(const Options& opts, const CLI::App& app) {
  ExperimentConfig config;
  if (!opts.config_path.empty()) config = bnnint::harness::LoadConfig(opts.config_path);
  for (const auto& key : bnnint::harness::ConfigKeys()) {
    if (app.count("--" + key.name) > 0) {
      bnnint::harness::SetConfigValue(key.name, opts.overrides.at(key.name), &config);
    }
  }
  bnnint::harness::ValidateConfig(config);
  return config;
}

std::string OutPath(const ExperimentConfig& config, const std::string& name) {
  return (std::filesystem::path(config.output_dir) / name).string();
}

int Report(const std::vector<Check>& checks) {
  bool ok = true;
  for (const Check& c : checks) {
    std::printf("%s %s %s\n", c.pass ? "PASS" : "FAIL", c.name.c_str(), c.detail.c_str());
    ok = ok && c.pass;
  }
  return ok ? 0 : kExitChecksFailed;
}

void Wrote(const std::string& path) { std::printf("wrote %s\n", path.c_str()); }

bnnint::nn::MlpModel DnnFor(const Options& opts, const ExperimentConfig& config,
                            const bnnint::Dataset& train) {
  if (!opts.dnn_path.empty()) return bnnint::LoadAsMlp(opts.dnn_path);
  return bnnint::harness::RunDnnTraining(config, train, false).model;
}

bnnint::bnn::BnnModel BnnFor(const Options& opts, const ExperimentConfig& config,
                             const bnnint::Dataset& train) {
  if (!opts.bnn_path.empty()) return bnnint::LoadBnn(opts.bnn_path);
  return bnnint::harness::RunBnnTraining(config, train, false).model;
}

int GenData(const ExperimentConfig& config) {
  const uint64_t seed = config.Seed("data");
  const bnnint::Dataset raw = config.data_csv.empty()
                                  ? bnnint::GenerateSynthetic(config.data, seed)
                                  : bnnint::ReadCsv(config.data_csv);
  const auto split = bnnint::harness::PrepareData(config);
  bnnint::WriteCsv(raw, OutPath(config, "data_raw.csv"));
  bnnint::WriteCsv(split.train, OutPath(config, "train.csv"));
  bnnint::WriteCsv(split.test, OutPath(config, "test.csv"));
  std::vector<std::vector<std::string>> rows;
  for (const auto& concept_features : raw.planted_concepts) {
    std::string joined;
    for (size_t f : concept_features) {
      joined += (joined.empty() ? "" : ";") + std::to_string(f);
    }
    rows.push_back({joined});
  }
  bnnint::report::WriteFile(
      OutPath(config, "planted.csv"),
      bnnint::report::FormatCsv(bnnint::harness::ReportHeader(config, "data"),
                                {"features"}, rows));
  for (const char* name : {"data_raw.csv", "train.csv", "test.csv", "planted.csv"}) {
    Wrote(OutPath(config, name));
  }
  const auto stats = bnnint::ComputeNormalization(split.train.features);
  double worst = 0.0;
  for (double m : stats.means) worst = std::max(worst, std::abs(m));
  return Report({{"normalization", worst <= 1e-9, "max |mean|=" + FormatNumber(worst)}});
}

std::string TrainingLog(const ExperimentConfig& config, const std::string& stage,
                        const std::vector<double>& loss,
                        const std::vector<double>& accuracy) {
  std::vector<std::vector<std::string>> rows;
  for (size_t e = 0; e < loss.size(); ++e) {
    rows.push_back({std::to_string(e + 1), FormatNumber(loss[e]), FormatNumber(accuracy[e])});
  }
  return bnnint::report::FormatCsv(bnnint::harness::ReportHeader(config, stage),
                                   {"epoch", "loss", "train_accuracy"}, rows);
}

int TrainDnnCommand(const ExperimentConfig& config) {
  const auto data = bnnint::harness::PrepareData(config);
  const auto run = bnnint::harness::RunDnnTraining(config, data.train, false);
  bnnint::SaveMlp(run.model, OutPath(config, "dnn.ckpt"));
  bnnint::report::WriteFile(OutPath(config, "dnn_training.csv"),
                            TrainingLog(config, "dnn", run.epoch_loss, run.epoch_accuracy));
  Wrote(OutPath(config, "dnn.ckpt"));
  Wrote(OutPath(config, "dnn_training.csv"));
  const double test_acc =
      bnnint::nn::Accuracy(run.model, data.test.features, data.test.labels);
  std::printf("train_accuracy=%.4f test_accuracy=%.4f\n", run.epoch_accuracy.back(),
              test_acc);
  return Report({{"training_finite", std::isfinite(run.epoch_loss.back()),
                  "final loss=" + FormatNumber(run.epoch_loss.back())}});
}

int TrainBnnCommand(const ExperimentConfig& config) {
  const auto data = bnnint::harness::PrepareData(config);
  const auto run = bnnint::harness::RunBnnTraining(config, data.train, false);
  bnnint::SaveBnn(run.model, OutPath(config, "bnn.ckpt"));
  bnnint::report::WriteFile(OutPath(config, "bnn_training.csv"),
                            TrainingLog(config, "bnn", run.epoch_loss, run.epoch_accuracy));
  Wrote(OutPath(config, "bnn.ckpt"));
  Wrote(OutPath(config, "bnn_training.csv"));
  const double test_acc = bnnint::bnn::BnnAccuracy(
      run.model, data.test, config.predict_samples,
      bnnint::DeriveSeed(config.Seed("bnn"), 0xacc));
  std::printf("train_accuracy=%.4f test_accuracy=%.4f\n", run.epoch_accuracy.back(),
              test_acc);
  return Report({{"training_finite", std::isfinite(run.epoch_loss.back()),
                  "final loss=" + FormatNumber(run.epoch_loss.back())}});
}

int InteractionsCommand(const Options& opts, const ExperimentConfig& config) {
  const auto data = bnnint::harness::PrepareData(config);
  const bnnint::Dataset& split = opts.split == "test" ? data.test : data.train;
  const uint64_t seed = config.Seed("interaction");
  const auto active = bnnint::harness::ActiveVariables(config, split.num_features());
  const size_t count = opts.samples > 0 ? opts.samples : config.strength_samples;
  const auto rows = bnnint::harness::SelectSamples(split, count, bnnint::DeriveSeed(seed, 0x5a));
  std::vector<bnnint::interaction::InteractionTable> tables;
  std::string kind = "dnn";
  if (!opts.model_path.empty() && bnnint::IsBnnCheckpoint(opts.model_path)) {
    kind = "bnn";
    tables = bnnint::harness::BnnTables(bnnint::LoadBnn(opts.model_path), split, rows,
                                        active, config.tau, config.predict_samples,
                                        bnnint::DeriveSeed(seed, 0xe75), config.workers);
  } else {
    const auto model = opts.model_path.empty()
                           ? bnnint::harness::RunDnnTraining(config, data.train, false).model
                           : bnnint::LoadMlp(opts.model_path);
    tables = bnnint::harness::DnnTables(model, split, rows, active, config.tau,
                                        config.workers);
  }
  double worst = 0.0;
  for (size_t k = 0; k < tables.size(); ++k) {
    const auto back = bnnint::interaction::ZetaReconstruct(tables[k]);
    for (size_t m = 0; m < back.size(); ++m) {
      worst = std::max(worst, std::abs(back[m] - tables[k].raw[m]));
    }
    const std::string path =
        OutPath(config, "tables/" + opts.split + "_row" + std::to_string(rows[k]) + ".csv");
    bnnint::report::WriteFile(
        path, bnnint::interaction::FormatTableCsv(
                  tables[k], active, config.tau, seed,
                  "config_hash=" + bnnint::harness::ConfigHash(config) + " model=" + kind +
                      " label=" + std::to_string(split.labels[rows[k]])));
    Wrote(path);
  }
  const auto strength = bnnint::metrics::AverageStrength(tables);
  std::vector<std::vector<std::string>> out_rows;
  for (size_t s = 1; s < strength.size(); ++s) {
    out_rows.push_back({std::to_string(s), FormatNumber(strength[s])});
  }
  bnnint::report::WriteFile(
      OutPath(config, "order_strength.csv"),
      bnnint::report::FormatCsv(bnnint::harness::ReportHeader(config, "interaction") +
                                    " samples=" + std::to_string(rows.size()),
                                {"order", "strength"}, out_rows));
  Wrote(OutPath(config, "order_strength.csv"));
  return Report({{"faithfulness", worst <= 1e-6, "max |v - sum I|=" + FormatNumber(worst)}});
}

int SurrogateCommand(const Options& opts, const ExperimentConfig& config) {
  const auto data = bnnint::harness::PrepareData(config);
  const auto bnn = BnnFor(opts, config, data.train);
  const uint64_t seed = config.Seed("surrogate");
  const auto rows = bnnint::harness::SelectSamples(data.train, config.surrogate_samples,
                                                   bnnint::DeriveSeed(seed, 1));
  bnnint::Tensor xs({rows.size(), data.train.num_features()});
  for (size_t r = 0; r < rows.size(); ++r) {
    const auto src = data.train.features.row(rows[r]);
    std::copy(src.begin(), src.end(), xs.row(r).begin());
  }
  bnnint::surrogate::FitConfig fc;
  fc.steps = config.surrogate_steps;
  fc.learning_rate = config.surrogate_lr;
  fc.draws = config.surrogate_draws;
  fc.seed = seed;
  const auto fit =
      bnnint::surrogate::FitSurrogate(bnn, bnnint::bnn::DnnFromBnnMean(bnn), xs, fc);
  const std::string header = bnnint::harness::ReportHeader(config, "surrogate");
  bnnint::report::WriteFile(OutPath(config, "surrogate_plan.csv"),
                            bnnint::surrogate::FormatPlanCsv(fit.plan, header));
  bnnint::report::WriteFile(OutPath(config, "surrogate_fit.csv"),
                            bnnint::surrogate::FormatFitLogCsv(fit, header));
  Wrote(OutPath(config, "surrogate_plan.csv"));
  Wrote(OutPath(config, "surrogate_fit.csv"));
  std::vector<Check> checks = {{"surrogate_converged", !fit.diverged, fit.diagnostic}};
  for (const auto& layer : fit.layers) {
    std::printf("layer %zu kl_before=%.6g kl_after=%.6g baseline_kl=%.6g\n", layer.layer,
                layer.kl_before, layer.kl_after, layer.baseline_kl);
    checks.push_back({"layer" + std::to_string(layer.layer) + "_kl_not_increased",
                      layer.kl_after <= layer.kl_before,
                      FormatNumber(layer.kl_before) + " -> " + FormatNumber(layer.kl_after)});
  }
  return Report(checks);
}

int MetricsCommand(const Options& opts, const ExperimentConfig& config) {
  const auto data = bnnint::harness::PrepareData(config);
  const auto dnn = DnnFor(opts, config, data.train);
  const auto bnn = BnnFor(opts, config, data.train);
  const uint64_t seed = config.Seed("metrics");
  const auto active = bnnint::harness::ActiveVariables(config, data.train.num_features());
  const auto rows = bnnint::harness::SelectSamples(data.train, config.metric_samples,
                                                   bnnint::DeriveSeed(seed, 1));
  const auto means = data.train.FeatureMeans();
  std::vector<bnnint::metrics::OrderMetrics> noise, weights;
  for (size_t k = 0; k < rows.size(); ++k) {
    const auto ctx = bnnint::interaction::MakeContext(data.train.features.row(rows[k]),
                                                      means, config.tau, active);
    const int label = data.train.labels[rows[k]];
    noise.push_back(bnnint::metrics::OrderVarianceStabilityNoise(
        bnnint::interaction::MlpLogOdds(dnn, label), ctx,
        {config.noise_sigma * config.noise_sigma, config.noise_draws,
         bnnint::DeriveSeed(seed, 0x10, k)}));
    weights.push_back(bnnint::metrics::OrderVarianceStabilityBnn(
        bnn, ctx, label, config.weight_draws, bnnint::DeriveSeed(seed, 0x20, k)));
  }
  const auto noise_avg = bnnint::metrics::AverageOrderMetrics(noise);
  const auto bnn_avg = bnnint::metrics::AverageOrderMetrics(weights);
  auto rows_out = bnnint::metrics::MetricRows(noise_avg, "noise", seed);
  const auto bnn_rows = bnnint::metrics::MetricRows(bnn_avg, "bnn", seed);
  rows_out.insert(rows_out.end(), bnn_rows.begin(), bnn_rows.end());
  bnnint::report::WriteFile(
      OutPath(config, "metrics.csv"),
      bnnint::metrics::FormatMetricsCsv(
          rows_out, bnnint::harness::ReportHeader(config, "metrics") +
                        " samples=" + std::to_string(rows.size())));
  Wrote(OutPath(config, "metrics.csv"));
  std::vector<Check> checks;
  for (const auto* m : {&noise_avg, &bnn_avg}) {
    std::vector<double> s, log_v;
    for (size_t o = 1; o <= m->n_active; ++o) {
      if (m->variance[o] > 0.0) {
        s.push_back(static_cast<double>(o));
        log_v.push_back(std::log(m->variance[o]));
      }
    }
    const auto fit = bnnint::metrics::FitLine(s, log_v);
    std::printf("%s: log V slope=%.4g r2=%.4f longest K nonincreasing run=%zu\n",
                m == &noise_avg ? "noise" : "bnn", fit.slope, fit.r2,
                bnnint::metrics::LongestNonincreasingRun(m->stability));
    checks.push_back({std::string(m == &noise_avg ? "noise" : "bnn") + "_values_finite",
                      std::isfinite(fit.slope), "slope=" + FormatNumber(fit.slope)});
  }
  return Report(checks);
}

int OraclesCommand(const ExperimentConfig& config) {
  bnnint::oracle::SuiteConfig sc;
  sc.draws = config.oracle_draws;
  sc.seed = config.Seed("oracle");
  const auto rows = bnnint::oracle::RunOracleSuite(sc);
  bnnint::report::WriteFile(
      OutPath(config, "oracles.csv"),
      bnnint::oracle::FormatOracleCsv(rows, bnnint::harness::ReportHeader(config, "oracle")));
  Wrote(OutPath(config, "oracles.csv"));
  std::vector<Check> checks;
  for (const auto& r : rows) {
    checks.push_back({r.check_name, r.pass,
                      r.parameters + " analytic=" + FormatNumber(r.analytic_value) +
                          " mc=" + FormatNumber(r.mc_value)});
  }
  return Report(checks);
}

int AttackCommand(const Options& opts, const ExperimentConfig& config) {
  const auto data = bnnint::harness::PrepareData(config);
  const auto dnn = DnnFor(opts, config, data.train);
  const auto bnn = BnnFor(opts, config, data.train);
  const uint64_t seed = config.Seed("attack");
  std::vector<size_t> rows(data.test.rows());
  for (size_t r = 0; r < rows.size(); ++r) rows[r] = r;
  if (config.attack_samples > 0 && config.attack_samples < rows.size()) {
    rows = bnnint::harness::SelectSamples(data.test, config.attack_samples,
                                          bnnint::DeriveSeed(seed, 1));
    std::sort(rows.begin(), rows.end());
  }
  const auto subset = data.test.Subset(rows);
  const bnnint::metrics::PgdConfig pgd{config.pgd_eps, config.pgd_steps, config.pgd_step};
  const std::vector<bnnint::metrics::RobustnessRow> out = {
      bnnint::metrics::EvaluateRobustness(dnn, subset, pgd, "dnn"),
      bnnint::metrics::EvaluateRobustness(bnnint::bnn::DnnFromBnnMean(bnn), subset, pgd,
                                          "bnn_mean_dnn"),
      bnnint::metrics::EvaluateRobustnessBnn(bnn, subset, pgd, seed,
                                             config.predict_samples, "bnn")};
  bnnint::report::WriteFile(
      OutPath(config, "robustness.csv"),
      bnnint::metrics::FormatRobustnessCsv(out,
                                           bnnint::harness::ReportHeader(config, "attack")));
  Wrote(OutPath(config, "robustness.csv"));
  std::vector<Check> checks;
  for (const auto& r : out) {
    std::printf("%s clean_acc=%.4f adv_acc=%.4f\n", r.model_id.c_str(), r.clean_acc,
                r.adv_acc);
    checks.push_back({r.model_id + "_adv_not_above_clean", r.adv_acc <= r.clean_acc,
                      FormatNumber(r.adv_acc) + " <= " + FormatNumber(r.clean_acc)});
  }
  return Report(checks);
}

int PipelineCommand(const ExperimentConfig& config) {
  const auto result = bnnint::harness::RunPipeline(config);
  std::printf("config_hash=%s output_dir=%s\n", result.config_hash.c_str(),
              config.output_dir.c_str());
  for (const auto& f : result.files) Wrote(OutPath(config, f));
  if (result.failed) {
    std::fprintf(stderr, "stage %s failed: %s\n", result.failed_stage.c_str(),
                 result.error.c_str());
  }
  const int code = Report(result.checks);
  return result.failed ? kExitError : code;
}

int PlotCommand(const Options& opts, const ExperimentConfig& config) {
  const std::string dir = opts.bundle.empty() ? config.output_dir : opts.bundle;
  for (const auto& path : bnnint::plot::EmitPlots(dir)) Wrote(path);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Interactions of Bayesian and standard neural networks"};
  app.require_subcommand(1);
  app.fallthrough();
  Options opts;
  app.add_option("--config", opts.config_path, "key = value config file");
  auto* keys = app.add_option_group("config keys");
  for (const auto& key : bnnint::harness::ConfigKeys()) {
    keys->add_option("--" + key.name, opts.overrides[key.name], key.help);
  }
  app.footer(std::string("Environment: ") + bnnint::kWorkersEnv +
             " sets the worker count when --workers is 0.");

  auto* gen = app.add_subcommand("gen-data", "generate or ingest data and write splits");
  auto* train_dnn = app.add_subcommand("train-dnn", "train the standard DNN");
  auto* train_bnn = app.add_subcommand("train-bnn", "train the mean-field BNN");
  auto* inter = app.add_subcommand("interactions", "interaction tables of one model");
  inter->add_option("--model", opts.model_path, "DNN or BNN checkpoint (default: train a DNN)");
  inter->add_option("--split", opts.split, "train or test")
      ->check(CLI::IsMember({"train", "test"}));
  inter->add_option("--samples", opts.samples, "rows (default strength_samples)");
  auto* surr = app.add_subcommand("surrogate-fit", "layer-wise surrogate fit to a BNN");
  auto* metrics = app.add_subcommand("metrics", "V and K by order for noise and BNN");
  auto* oracles = app.add_subcommand("oracles", "analytic vs Monte-Carlo oracle suite");
  auto* attack = app.add_subcommand("attack", "PGD robustness of DNN and BNN");
  auto* pipeline = app.add_subcommand("pipeline", "run every stage and write the bundle");
  auto* plot = app.add_subcommand("plot", "render SVG plots from a report bundle");
  plot->add_option("--bundle", opts.bundle, "report directory (default output_dir)");
  for (auto* sub : {surr, metrics, attack}) {
    sub->add_option("--bnn", opts.bnn_path, "BNN checkpoint (default: train one)");
  }
  for (auto* sub : {metrics, attack}) {
    sub->add_option("--dnn", opts.dnn_path, "DNN checkpoint (default: train one)");
  }

  CLI11_PARSE(app, argc, argv);

  try {
    const ExperimentConfig config = ResolveConfig(opts, app);
    if (gen->parsed()) return GenData(config);
    if (train_dnn->parsed()) return TrainDnnCommand(config);
    if (train_bnn->parsed()) return TrainBnnCommand(config);
    if (inter->parsed()) return InteractionsCommand(opts, config);
    if (surr->parsed()) return SurrogateCommand(opts, config);
    if (metrics->parsed()) return MetricsCommand(opts, config);
    if (oracles->parsed()) return OraclesCommand(config);
    if (attack->parsed()) return AttackCommand(opts, config);
    if (pipeline->parsed()) return PipelineCommand(config);
    if (plot->parsed()) return PlotCommand(opts, config);
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitError;
  }
  return kExitError;
}
