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


// Adam training of deterministic MLPs with softmax cross-entropy.

#ifndef BNNINT_TRAIN_H_
#define BNNINT_TRAIN_H_

#include <cstdint>
#include <vector>

#include "bnnint/dataset.h"
#include "bnnint/mlp.h"

namespace bnnint::nn {

struct TrainConfig {
  double learning_rate = 1e-3;
  size_t epochs = 50;
  // 0 picks full batch for <= 4096 rows and 256 otherwise.
  size_t batch_size = 0;
  uint64_t seed = 0;
  // Keep a copy of the model after every epoch.
  bool keep_snapshots = false;
};

size_t EffectiveBatchSize(const TrainConfig& config, size_t rows);

// Mini-batch row orders for one epoch. Full batch keeps the natural order.
std::vector<std::vector<size_t>> EpochBatches(size_t rows, size_t batch_size,
                                              uint64_t seed, size_t epoch);

void ValidateTrainConfig(const TrainConfig& config);

struct TrainResult {
  MlpModel model;
  std::vector<double> epoch_loss;      // mean cross-entropy seen in the epoch
  std::vector<double> epoch_accuracy;  // train accuracy after the epoch
  std::vector<MlpModel> snapshots;     // after each epoch, if requested
};

// Zero epochs returns the model unchanged. Throws NumericError on a NaN loss.
TrainResult TrainDnn(const MlpModel& model, const Dataset& data,
                     const TrainConfig& config);

}  // namespace bnnint::nn

#endif  // BNNINT_TRAIN_H_
