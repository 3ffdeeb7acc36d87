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


#include "bnnint/train.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>

#include "bnnint/adam.h"
#include "bnnint/error.h"
#include "bnnint/random.h"

namespace bnnint::nn {

constexpr size_t kFullBatchLimit = 4096;
constexpr size_t kDefaultMiniBatch = 256;

size_t EffectiveBatchSize(const TrainConfig& config, size_t rows) {
  if (config.batch_size == 0) {
    return rows <= kFullBatchLimit ? rows : kDefaultMiniBatch;
  }
  return std::min(config.batch_size, rows);
}

std::vector<std::vector<size_t>> EpochBatches(size_t rows, size_t batch_size,
                                              uint64_t seed, size_t epoch) {
  std::vector<size_t> order(rows);
  std::iota(order.begin(), order.end(), 0);
  if (batch_size < rows) {
    Rng rng = MakeRng(DeriveSeed(seed, 0xba7c, epoch));
    std::shuffle(order.begin(), order.end(), rng);
  }
  std::vector<std::vector<size_t>> batches;
  for (size_t start = 0; start < rows; start += batch_size) {
    const size_t end = std::min(rows, start + batch_size);
    batches.emplace_back(order.begin() + start, order.begin() + end);
  }
  return batches;
}

void ValidateTrainConfig(const TrainConfig& config) {
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ArgumentError("learning rate must be positive");
  }
}

TrainResult TrainDnn(const MlpModel& model, const Dataset& data,
                     const TrainConfig& config) {
  ValidateTrainConfig(config);
  if (data.rows() == 0) throw ArgumentError("empty training set");
  if (data.num_features() != model.input_dim()) {
    throw ShapeError("dataset feature count does not match the model input");
  }
  for (int label : data.labels) {
    if (label < 0 || static_cast<size_t>(label) >= model.output_dim()) {
      throw ArgumentError("label " + std::to_string(label) +
                          " exceeds the model's class count");
    }
  }
  TrainResult result;
  result.model = model;
  Adam adam({.learning_rate = config.learning_rate});
  const size_t batch_size = EffectiveBatchSize(config, data.rows());
  for (size_t epoch = 0; epoch < config.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (const auto& batch :
         EpochBatches(data.rows(), batch_size, config.seed, epoch)) {
      Gradients grads = Gradients::ZerosLike(result.model);
      const double loss = AccumulateCrossEntropy(result.model, data.features,
                                                 data.labels, batch, &grads);
      if (!std::isfinite(loss)) {
        throw NumericError("non-finite training loss at epoch " +
                           std::to_string(epoch + 1));
      }
      epoch_loss += loss;
      grads.Scale(1.0 / static_cast<double>(batch.size()));
      adam.Step(result.model.MutableParameters(), grads.ParameterViews());
    }
    result.epoch_loss.push_back(epoch_loss / static_cast<double>(data.rows()));
    result.epoch_accuracy.push_back(
        Accuracy(result.model, data.features, data.labels));
    if (config.keep_snapshots) result.snapshots.push_back(result.model);
  }
  return result;
}

}  // namespace bnnint::nn
