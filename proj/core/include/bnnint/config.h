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


// Experiment configuration: a flat "key = value" text format. Text after
// '#' is a comment. Unknown keys are errors.

#ifndef BNNINT_CONFIG_H_
#define BNNINT_CONFIG_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "bnnint/dataset.h"

namespace bnnint::harness {

struct ExperimentConfig {
  // Data.
  SyntheticSpec data;
  std::string data_csv;  // when set, replaces the synthetic generator
  double test_fraction = 0.25;
  // Architecture: hidden widths; input and output come from the data.
  std::vector<size_t> hidden = {32, 32};
  // Training.
  double dnn_lr = 1e-3;
  size_t dnn_epochs = 100;
  size_t dnn_batch = 64;
  double bnn_lr = 1e-3;
  size_t bnn_epochs = 100;
  size_t bnn_batch = 64;
  size_t bnn_mc_samples = 1;
  std::optional<double> bnn_kl_weight;  // unset: 1 / batches per epoch
  double bnn_init_sigma = 0.05;
  size_t predict_samples = 10;
  double matched_accuracy_tolerance = 0.01;
  // Interactions.
  double tau = 0.5;
  size_t n_active = 0;  // 0: all features up to 16, else 12 sampled
  double salient_threshold = 0.05;
  size_t strength_samples = 20;
  // Order metrics.
  double noise_sigma = 0.05;
  size_t noise_draws = 100;
  size_t weight_draws = 100;
  size_t metric_samples = 5;
  // Surrogate fit.
  size_t surrogate_steps = 500;
  double surrogate_lr = 0.01;
  size_t surrogate_draws = 256;
  size_t surrogate_samples = 10;
  // Robustness.
  double pgd_eps = 0.1;
  size_t pgd_steps = 20;
  double pgd_step = 0.01;
  size_t attack_samples = 200;
  // Oracles.
  size_t oracle_draws = 1000000;
  // Seeds: stage seeds default to values derived from `seed`.
  uint64_t seed = 1;
  std::optional<uint64_t> seed_data, seed_dnn, seed_bnn, seed_interaction,
      seed_metrics, seed_surrogate, seed_attack, seed_oracle;
  // Run environment (not part of the hash).
  std::string output_dir = "bnnint_out";
  size_t workers = 0;

  uint64_t Seed(const std::string& stage) const;
};

struct ConfigKey {
  std::string name;
  std::string help;
};

// Every accepted key with a one-line description.
const std::vector<ConfigKey>& ConfigKeys();

// Throws ArgumentError for an unknown key or a malformed value.
void SetConfigValue(const std::string& key, const std::string& value,
                    ExperimentConfig* config);
std::string GetConfigValue(const std::string& key, const ExperimentConfig& config);

// Throws ParseError (with line number) on syntax errors and unknown keys.
ExperimentConfig ParseConfig(const std::string& text);
ExperimentConfig LoadConfig(const std::string& path);

// Checks cross-field constraints; throws ArgumentError.
void ValidateConfig(const ExperimentConfig& config);

// "key = value" lines for every key, sorted by key, with stage seeds resolved.
std::string CanonicalConfig(const ExperimentConfig& config);

// FNV-1a 64 of the canonical text without output_dir and workers, as 16
// hex digits.
std::string ConfigHash(const ExperimentConfig& config);

}  // namespace bnnint::harness

#endif  // BNNINT_CONFIG_H_
