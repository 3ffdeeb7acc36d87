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


// Mean-field Gaussian Bayesian MLPs: reparameterized sampling, the KL to a
// standard normal prior, ELBO training and Monte-Carlo prediction.

#ifndef BNNINT_BNN_H_
#define BNNINT_BNN_H_

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "bnnint/dataset.h"
#include "bnnint/mlp.h"
#include "bnnint/tensor.h"
#include "bnnint/train.h"

namespace bnnint::bnn {

inline constexpr double kSigmaFloor = 1e-12;
inline constexpr double kDefaultInitSigma = 0.05;
inline constexpr size_t kDefaultPredictSamples = 10;

// log(1 + exp(rho)), stable for large |rho|.
double Softplus(double rho);
// Inverse of Softplus; sigma is floored at kSigmaFloor first.
double InverseSoftplus(double sigma);
// max(Softplus(rho), kSigmaFloor).
double Sigma(double rho);

struct MeanFieldLayer {
  Tensor weight_mean;  // out_dim x in_dim
  Tensor weight_rho;   // sigma = softplus(rho)
  Tensor bias_mean;
  Tensor bias_rho;
  nn::Activation activation = nn::Activation::kRelu;

  size_t in_dim() const { return weight_mean.cols(); }
  size_t out_dim() const { return weight_mean.rows(); }

  bool operator==(const MeanFieldLayer& other) const = default;
};

// Prior is fixed to N(0, I) over every weight and bias.
class BnnModel {
 public:
  BnnModel() = default;
  explicit BnnModel(std::vector<MeanFieldLayer> layers);

  // Means as in MlpModel::Initialize, every sigma equal to init_sigma.
  static BnnModel Initialize(std::span<const size_t> widths, uint64_t seed,
                             double init_sigma = kDefaultInitSigma);

  const std::vector<MeanFieldLayer>& layers() const { return layers_; }
  const MeanFieldLayer& layer(size_t index) const { return layers_.at(index); }
  MeanFieldLayer& mutable_layer(size_t index) { return layers_.at(index); }
  size_t num_layers() const { return layers_.size(); }
  size_t input_dim() const { return layers_.front().in_dim(); }
  size_t output_dim() const { return layers_.back().out_dim(); }
  std::vector<size_t> widths() const;
  size_t num_weights() const;

  // Views in the order W_mean, W_rho, b_mean, b_rho for each layer.
  std::vector<std::span<double>> MutableParameters();

  bool operator==(const BnnModel& other) const = default;

 private:
  std::vector<MeanFieldLayer> layers_;
};

// W = mu + sigma * z with z ~ N(0, I), drawn weight by weight (W then b per
// layer) from a generator seeded with `seed`.
nn::MlpModel SampleWeights(const BnnModel& bnn, uint64_t seed);

// Seed of the index-th network in a prediction ensemble.
uint64_t MemberSeed(uint64_t seed, size_t index);

// KL[N(mu, sigma^2) || N(0, 1)] for one scalar.
double KlTerm(double mu, double sigma);
// Sum of KlTerm over every weight and bias.
double KlToStandardNormal(const BnnModel& bnn);

// Mean over mc_samples weight draws of the summed batch cross-entropy, plus
// kl_weight * KL. Throws ArgumentError on an empty batch.
double ElboLoss(const BnnModel& bnn, const Dataset& data,
                std::span<const size_t> rows, double kl_weight, uint64_t seed,
                size_t mc_samples = 1);

struct BnnTrainConfig {
  nn::TrainConfig train;
  size_t mc_samples = 1;
  // Unset means 1 / number of batches per epoch.
  std::optional<double> kl_weight;
  // Networks averaged for the per-epoch accuracy log.
  size_t eval_samples = kDefaultPredictSamples;
};

struct BnnTrainResult {
  BnnModel model;
  std::vector<double> epoch_loss;      // ELBO objective summed over the epoch
  std::vector<double> epoch_accuracy;  // predictive accuracy after the epoch
  std::vector<BnnModel> snapshots;
};

BnnTrainResult TrainBnn(const BnnModel& bnn, const Dataset& data,
                        const BnnTrainConfig& config);

// A fixed set of sampled networks. Prediction averages their softmax
// outputs. Reusing one ensemble across inputs gives common random numbers.
class Ensemble {
 public:
  Ensemble(const BnnModel& bnn, size_t num_samples, uint64_t seed);

  // Mean over members of softmax(logits).
  std::vector<double> Predict(std::span<const double> input) const;
  const std::vector<nn::MlpModel>& members() const { return members_; }

 private:
  std::vector<nn::MlpModel> members_;
};

// Throws ArgumentError if num_samples is 0.
std::vector<double> BnnPredict(const BnnModel& bnn,
                               std::span<const double> input,
                               size_t num_samples = kDefaultPredictSamples,
                               uint64_t seed = 0);

double BnnAccuracy(const BnnModel& bnn, const Dataset& data,
                   size_t num_samples, uint64_t seed);

nn::MlpModel DnnFromBnnMean(const BnnModel& bnn);

// Means copied from the DNN; every weight of layer l gets sigma
// sqrt(variances[l]) (floored) and biases stay at the floor. Throws
// ArgumentError on a negative variance.
BnnModel BnnFromDnn(const nn::MlpModel& dnn, std::span<const double> variances);

// Per layer, the mean of sigma^2 over the weight matrix.
std::vector<double> MeanLayerVariances(const BnnModel& bnn);

}  // namespace bnnint::bnn

#endif  // BNNINT_BNN_H_
