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

// Dense multilayer perceptrons: forward recursion, reverse-mode gradients.
//
// Layer l computes h(l) = W(l) a(l-1) + b(l) with a(0) = x and
// a(l) = relu(h(l)) for ReLU layers. The final layer is identity-activated
// and produces logits. The ReLU derivative at exactly 0 is taken to be 0.

#ifndef BNNINT_MLP_H_
#define BNNINT_MLP_H_

#include <cstdint>
#include <functional>
#include <span>
#include <vector>

#include "bnnint/tensor.h"

namespace bnnint::nn {

enum class Activation { kIdentity, kRelu };

struct DenseLayer {
  Tensor weight;  // out_dim x in_dim
  Tensor bias;    // out_dim
  Activation activation = Activation::kRelu;

  size_t in_dim() const { return weight.cols(); }
  size_t out_dim() const { return weight.rows(); }

  bool operator==(const DenseLayer& other) const = default;
};

class MlpModel {
 public:
  MlpModel() = default;

  // Validates that dimensions chain and that the last layer is identity.
  explicit MlpModel(std::vector<DenseLayer> layers);

  // widths = {input, hidden..., output}. Hidden layers are ReLU. Weights and
  // biases are drawn uniformly from [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  static MlpModel Initialize(std::span<const size_t> widths, uint64_t seed);

  const std::vector<DenseLayer>& layers() const { return layers_; }
  const DenseLayer& layer(size_t index) const { return layers_.at(index); }
  // Mutable access to values only; shapes must not be changed.
  DenseLayer& mutable_layer(size_t index) { return layers_.at(index); }

  size_t num_layers() const { return layers_.size(); }
  size_t input_dim() const;
  size_t output_dim() const;
  std::vector<size_t> widths() const;
  size_t num_parameters() const;

  // Parameter views in the order W(1), b(1), W(2), b(2), ...
  std::vector<std::span<double>> MutableParameters();

  bool operator==(const MlpModel& other) const = default;

 private:
  std::vector<DenseLayer> layers_;
};

struct LayerTrace {
  Tensor pre_activation;
  Tensor post_activation;
};

struct ForwardTrace {
  Tensor input;
  std::vector<LayerTrace> layers;

  const Tensor& logits() const { return layers.back().post_activation; }
};

// Throws ShapeError if the input length differs from model.input_dim().
ForwardTrace Forward(const MlpModel& model, const Tensor& input);

// Allocation-free logits for hot loops. Holds a pointer to the model, which
// must outlive the evaluator. Not thread-safe; use one per worker.
class Evaluator {
 public:
  explicit Evaluator(const MlpModel& model);

  std::span<const double> Logits(std::span<const double> input);

 private:
  const MlpModel* model_;
  std::vector<double> front_;
  std::vector<double> back_;
};

// Gradients in the same layout as the model.
struct Gradients {
  std::vector<Tensor> weight;
  std::vector<Tensor> bias;
  Tensor input;

  static Gradients ZerosLike(const MlpModel& model);
  void AddScaled(const Gradients& other, double scale);
  void Scale(double factor);
  // Views in MlpModel::MutableParameters() order.
  std::vector<std::span<const double>> ParameterViews() const;
};

struct LossValue {
  double value = 0.0;
  std::vector<double> grad_logits;
};

// Scalar loss of the logits together with its gradient w.r.t. the logits.
using LossFunctional = std::function<LossValue(std::span<const double>)>;

Gradients Backward(const MlpModel& model, const ForwardTrace& trace,
                   std::span<const double> grad_logits);

// Forward + loss + backward. Throws NumericError on a non-finite loss.
Gradients Backward(const MlpModel& model, const Tensor& input,
                   const LossFunctional& loss, double* loss_value = nullptr);

// Sum of softmax cross-entropy over the selected rows, accumulating the
// parameter gradients into *grads (input gradients are not kept).
// Reuses internal buffers; intended for training loops.
double AccumulateCrossEntropy(const MlpModel& model, const Tensor& features,
                              std::span<const int> labels,
                              std::span<const size_t> rows, Gradients* grads);

// Fraction of rows whose argmax logit equals the label.
double Accuracy(const MlpModel& model, const Tensor& features,
                std::span<const int> labels);

size_t Argmax(std::span<const double> values);

}  // namespace bnnint::nn

#endif  // BNNINT_MLP_H_
