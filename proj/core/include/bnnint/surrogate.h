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


// Surrogate DNN: the BNN's mean network with diagonal Gaussian noise added
// to the input and to hidden pre-activations, fitted layer by layer so that
// its feature distributions match the BNN's.
//
// Features of layer l are the pre-activations h(l) = W(l) a(l-1) + b(l).
// Noise slot 0 perturbs the input; slot j >= 1 perturbs h(j) before its
// ReLU. Layer l is influenced by slots 0..l-1 only.

#ifndef BNNINT_SURROGATE_H_
#define BNNINT_SURROGATE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "bnnint/bnn.h"
#include "bnnint/mlp.h"
#include "bnnint/tensor.h"

namespace bnnint::surrogate {

inline constexpr double kVarianceFloor = 1e-10;

struct FeatureDistribution {
  std::vector<double> mean;
  std::vector<double> variance;  // unbiased sample variance
  size_t draws = 0;
};

FeatureDistribution Moments(const Tensor& samples);  // rows are draws

struct PerturbationPlan {
  // slots[0] is the input; slots[j] is hidden layer j. Entries >= 0.
  std::vector<std::vector<double>> slots;

  static PerturbationPlan Zeros(const nn::MlpModel& model);
  size_t num_slots() const { return slots.size(); }
};

// Layer-l features of whole-network weight draws, for every layer at once
// (element l-1 is layer l). Throws ArgumentError if draws < 2.
std::vector<FeatureDistribution> BnnFeatureDistributions(
    const bnn::BnnModel& bnn, std::span<const double> x, size_t draws,
    uint64_t seed);

// Layer is 1-based. Throws ArgumentError on an out-of-range layer.
FeatureDistribution BnnFeatureSamples(const bnn::BnnModel& bnn,
                                      std::span<const double> x, size_t layer,
                                      size_t draws, uint64_t seed);

// Raw layer-l surrogate features (draws x D_l). Noise of slot j comes from
// its own stream, so a given seed fixes every slot's draws independently
// of the plan values.
Tensor SurrogateSamples(const nn::MlpModel& dnn, std::span<const double> x,
                        const PerturbationPlan& plan, size_t layer,
                        size_t draws, uint64_t seed);

FeatureDistribution SurrogateFeatureSamples(const nn::MlpModel& dnn,
                                            std::span<const double> x,
                                            const PerturbationPlan& plan,
                                            size_t layer, size_t draws,
                                            uint64_t seed);

// KL(p || q) between diagonal Gaussians, variances floored at 1e-10.
// Throws ShapeError on a dimension mismatch.
double KlDiagGaussian(const FeatureDistribution& p, const FeatureDistribution& q);

// KL(p || N(m 1, s I)) with m, s the mean and variance pooled over every
// feature dimension and draw.
double BaselineKl(const Tensor& bnn_samples);

// Mean over xs of KL(p_BNN(h(layer)) || scalar-moment baseline).
double BaselineDistributionError(const bnn::BnnModel& bnn, const Tensor& xs,
                                 size_t layer, size_t draws, uint64_t seed);

struct FitConfig {
  size_t steps = 500;
  double learning_rate = 0.01;
  size_t draws = 256;
  uint64_t seed = 0;
  // Consecutive KL increases that count as divergence.
  size_t divergence_patience = 10;
};

struct LayerFitLog {
  size_t layer = 0;
  double kl_before = 0.0;  // this layer's slot at zero noise
  double kl_after = 0.0;
  double baseline_kl = 0.0;
  size_t steps_run = 0;
};

struct FitResult {
  PerturbationPlan plan;
  std::vector<LayerFitLog> layers;
  // Per fitted layer, KL after each optimizer step.
  std::vector<std::vector<double>> trajectories;
  bool diverged = false;
  std::string diagnostic;
};

// Fits slots 0..L-1 in order. KL values are means over the rows of xs. If
// the best iterate of a layer is worse than zero noise, the slot stays zero.
// On divergence the remaining slots stay zero and `diverged` is set.
FitResult FitSurrogate(const bnn::BnnModel& bnn, const nn::MlpModel& dnn,
                       const Tensor& xs, const FitConfig& config);

std::string FormatPlanCsv(const PerturbationPlan& plan, const std::string& header);
std::string FormatFitLogCsv(const FitResult& result, const std::string& header);

}  // namespace bnnint::surrogate

#endif  // BNNINT_SURROGATE_H_
