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


// End-to-end experiment: data, DNN/BNN training, the three BNN-vs-DNN
// comparisons, interaction tables, order metrics, surrogate fit, oracle
// suite, PGD robustness and the CSV/SVG report bundle.

#ifndef BNNINT_PIPELINE_H_
#define BNNINT_PIPELINE_H_

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "bnnint/bnn.h"
#include "bnnint/config.h"
#include "bnnint/dataset.h"
#include "bnnint/interaction.h"
#include "bnnint/metrics.h"
#include "bnnint/mlp.h"
#include "bnnint/train.h"

namespace bnnint::harness {

struct SplitData {
  Dataset train;
  Dataset test;
};

// Synthetic data (or data_csv) split with test_fraction, normalized with
// train statistics.
SplitData PrepareData(const ExperimentConfig& config);

// {inputs, hidden..., classes}.
std::vector<size_t> ModelWidths(const ExperimentConfig& config, const Dataset& data);

nn::TrainResult RunDnnTraining(const ExperimentConfig& config, const Dataset& train,
                               bool keep_snapshots);
bnn::BnnTrainResult RunBnnTraining(const ExperimentConfig& config,
                                   const Dataset& train, bool keep_snapshots);

struct MatchedPair {
  size_t dnn_epoch = 0;  // 0-based index into the accuracy logs
  size_t bnn_epoch = 0;
  double dnn_accuracy = 0.0;
  double bnn_accuracy = 0.0;
  double gap = 0.0;
  bool flagged = false;  // gap above the tolerance
};

// Among epoch pairs within the tolerance, the one with the highest lower
// accuracy, then the smallest epoch distance, then the latest epochs. With no
// pair within the tolerance, the smallest gap, flagged.
MatchedPair MatchCheckpoints(std::span<const double> dnn_accuracy,
                             std::span<const double> bnn_accuracy,
                             double tolerance);

// `count` rows taken round-robin over the classes after a seeded shuffle.
std::vector<size_t> SelectSamples(const Dataset& data, size_t count, uint64_t seed);

// All features when they fit, else a seeded sample of n_active of them.
std::vector<size_t> ActiveVariables(const ExperimentConfig& config,
                                    size_t num_features);

// Tables of every listed row under the log-odds of its own label.
std::vector<interaction::InteractionTable> DnnTables(
    const nn::MlpModel& model, const Dataset& data, const std::vector<size_t>& rows,
    const std::vector<size_t>& active, double tau, size_t workers);
// Same, with the BNN output averaged over a fixed ensemble of
// `predict_samples` networks drawn from `seed`.
std::vector<interaction::InteractionTable> BnnTables(
    const bnn::BnnModel& model, const Dataset& data, const std::vector<size_t>& rows,
    const std::vector<size_t>& active, double tau, size_t predict_samples,
    uint64_t seed, size_t workers);

struct StrengthComparison {
  std::string name;
  std::vector<double> bnn;  // by order, index 0 unused
  std::vector<double> dnn;
  std::vector<double> ratio;
};

StrengthComparison CompareStrength(const std::string& name,
                                   const std::vector<interaction::InteractionTable>& bnn,
                                   const std::vector<interaction::InteractionTable>& dnn);

// Ratio below 1 for every order above 2n/3 and a negative least-squares slope
// of the ratio over orders s >= 3.
bool StrengthPatternHolds(const StrengthComparison& comparison);

struct PlantedRecovery {
  std::vector<uint64_t> masks;       // planted concepts over the active variables
  std::vector<size_t> ranks;         // 1-based rank by mean |I| over samples
  std::vector<bool> salient;         // mean |I| >= threshold * largest mean |I|
  double mean_rank = 0.0;
  bool recovered = false;            // all salient, mean rank <= 2 * count
};

// Planted concepts with a feature outside `active` are skipped.
PlantedRecovery RecoverPlanted(const std::vector<interaction::InteractionTable>& tables,
                               const std::vector<size_t>& active,
                               const std::vector<std::vector<size_t>>& planted,
                               double threshold);

struct Check {
  std::string name;
  bool pass = false;
  std::string detail;
};

struct PipelineResult {
  std::string config_hash;
  std::vector<Check> checks;
  std::vector<std::string> files;  // relative to the output directory
  bool failed = false;
  std::string failed_stage;
  std::string error;

  bool ok() const;
};

// Header text every report file starts with.
std::string ReportHeader(const ExperimentConfig& config, const std::string& stage);

// Runs every stage, writing into config.output_dir. A stage failure stops the
// run, keeps what was written and adds failure.csv.
PipelineResult RunPipeline(const ExperimentConfig& config);

std::string FormatChecksCsv(const std::vector<Check>& checks, const std::string& header);

}  // namespace bnnint::harness

#endif  // BNNINT_PIPELINE_H_
