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

#include "bnnint/mlp.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bnnint/error.h"
#include "bnnint/loss.h"
#include "bnnint/random.h"

namespace bnnint::nn {
namespace {

// out = W in + b.
void Affine(const DenseLayer& layer, std::span<const double> in,
            std::span<double> out) {
  const size_t rows = layer.out_dim();
  const size_t cols = layer.in_dim();
  const double* w = layer.weight.data().data();
  const double* b = layer.bias.data().data();
  for (size_t r = 0; r < rows; ++r) {
    const double* w_row = w + r * cols;
    double sum = b[r];
    for (size_t c = 0; c < cols; ++c) sum += w_row[c] * in[c];
    out[r] = sum;
  }
}

void CheckInput(const MlpModel& model, size_t length) {
  if (model.num_layers() == 0) throw ShapeError("model has no layers");
  if (length != model.input_dim()) {
    throw ShapeError("input has " + std::to_string(length) +
                     " entries, model expects " +
                     std::to_string(model.input_dim()));
  }
}

}  // namespace

MlpModel::MlpModel(std::vector<DenseLayer> layers) : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("an MLP needs at least one layer");
  for (size_t l = 0; l < layers_.size(); ++l) {
    const DenseLayer& layer = layers_[l];
    if (layer.weight.rank() != 2 || layer.bias.rank() != 1 ||
        layer.bias.size() != layer.weight.rows()) {
      throw ShapeError("layer " + std::to_string(l + 1) +
                       " has inconsistent weight/bias shapes");
    }
    if (l > 0 && layers_[l - 1].out_dim() != layer.in_dim()) {
      throw ShapeError("layer " + std::to_string(l + 1) + " expects " +
                       std::to_string(layer.in_dim()) + " inputs but layer " +
                       std::to_string(l) + " produces " +
                       std::to_string(layers_[l - 1].out_dim()));
    }
  }
  if (layers_.back().activation != Activation::kIdentity) {
    throw ShapeError("the final layer must be identity-activated (logits)");
  }
}

MlpModel MlpModel::Initialize(std::span<const size_t> widths, uint64_t seed) {
  if (widths.size() < 2) throw ShapeError("need at least input and output widths");
  Rng rng = MakeRng(seed);
  std::vector<DenseLayer> layers;
  for (size_t l = 0; l + 1 < widths.size(); ++l) {
    const size_t fan_in = widths[l];
    const size_t fan_out = widths[l + 1];
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    std::uniform_real_distribution<double> uniform(-bound, bound);
    DenseLayer layer;
    layer.weight = Tensor({fan_out, fan_in});
    layer.bias = Tensor({fan_out});
    for (double& w : layer.weight.data()) w = uniform(rng);
    for (double& b : layer.bias.data()) b = uniform(rng);
    layer.activation =
        l + 2 == widths.size() ? Activation::kIdentity : Activation::kRelu;
    layers.push_back(std::move(layer));
  }
  return MlpModel(std::move(layers));
}

size_t MlpModel::input_dim() const { return layers_.front().in_dim(); }
size_t MlpModel::output_dim() const { return layers_.back().out_dim(); }

std::vector<size_t> MlpModel::widths() const {
  std::vector<size_t> widths;
  if (layers_.empty()) return widths;
  widths.push_back(input_dim());
  for (const DenseLayer& layer : layers_) widths.push_back(layer.out_dim());
  return widths;
}

size_t MlpModel::num_parameters() const {
  size_t count = 0;
  for (const DenseLayer& layer : layers_) {
    count += layer.weight.size() + layer.bias.size();
  }
  return count;
}

std::vector<std::span<double>> MlpModel::MutableParameters() {
  std::vector<std::span<double>> views;
  for (DenseLayer& layer : layers_) {
    views.push_back(layer.weight.data());
    views.push_back(layer.bias.data());
  }
  return views;
}

ForwardTrace Forward(const MlpModel& model, const Tensor& input) {
  CheckInput(model, input.size());
  ForwardTrace trace;
  trace.input = input;
  std::span<const double> current = trace.input.data();
  for (const DenseLayer& layer : model.layers()) {
    LayerTrace lt;
    lt.pre_activation = Tensor({layer.out_dim()});
    Affine(layer, current, lt.pre_activation.data());
    lt.post_activation = lt.pre_activation;
    if (layer.activation == Activation::kRelu) {
      for (double& v : lt.post_activation.data()) v = std::max(0.0, v);
    }
    trace.layers.push_back(std::move(lt));
    current = trace.layers.back().post_activation.data();
  }
  return trace;
}

Evaluator::Evaluator(const MlpModel& model) : model_(&model) {
  size_t widest = model.input_dim();
  for (const DenseLayer& layer : model.layers()) {
    widest = std::max(widest, layer.out_dim());
  }
  front_.resize(widest);
  back_.resize(widest);
}

std::span<const double> Evaluator::Logits(std::span<const double> input) {
  CheckInput(*model_, input.size());
  std::span<const double> current = input;
  bool use_front = true;
  for (const DenseLayer& layer : model_->layers()) {
    std::span<double> out(use_front ? front_.data() : back_.data(),
                          layer.out_dim());
    Affine(layer, current, out);
    if (layer.activation == Activation::kRelu) {
      for (double& v : out) v = std::max(0.0, v);
    }
    current = out;
    use_front = !use_front;
  }
  return current;
}

Gradients Gradients::ZerosLike(const MlpModel& model) {
  Gradients g;
  for (const DenseLayer& layer : model.layers()) {
    g.weight.emplace_back(layer.weight.shape());
    g.bias.emplace_back(layer.bias.shape());
  }
  g.input = Tensor({model.input_dim()});
  return g;
}

void Gradients::AddScaled(const Gradients& other, double scale) {
  auto add = [scale](Tensor& dst, const Tensor& src) {
    for (size_t i = 0; i < dst.size(); ++i) dst[i] += scale * src[i];
  };
  for (size_t l = 0; l < weight.size(); ++l) {
    add(weight[l], other.weight[l]);
    add(bias[l], other.bias[l]);
  }
  if (input.size() == other.input.size()) add(input, other.input);
}

void Gradients::Scale(double factor) {
  for (size_t l = 0; l < weight.size(); ++l) {
    for (double& v : weight[l].data()) v *= factor;
    for (double& v : bias[l].data()) v *= factor;
  }
  for (double& v : input.data()) v *= factor;
}

std::vector<std::span<const double>> Gradients::ParameterViews() const {
  std::vector<std::span<const double>> views;
  for (size_t l = 0; l < weight.size(); ++l) {
    views.push_back(weight[l].data());
    views.push_back(bias[l].data());
  }
  return views;
}

Gradients Backward(const MlpModel& model, const ForwardTrace& trace,
                   std::span<const double> grad_logits) {
  if (grad_logits.size() != model.output_dim()) {
    throw ShapeError("gradient w.r.t. logits has wrong length");
  }
  Gradients grads = Gradients::ZerosLike(model);
  std::vector<double> upstream(grad_logits.begin(), grad_logits.end());
  for (size_t l = model.num_layers(); l-- > 0;) {
    const DenseLayer& layer = model.layer(l);
    // d/d pre-activation.
    if (layer.activation == Activation::kRelu) {
      const Tensor& pre = trace.layers[l].pre_activation;
      for (size_t r = 0; r < upstream.size(); ++r) {
        if (!(pre[r] > 0.0)) upstream[r] = 0.0;
      }
    }
    std::span<const double> in = l == 0 ? trace.input.data()
                                        : trace.layers[l - 1].post_activation.data();
    Tensor& gw = grads.weight[l];
    Tensor& gb = grads.bias[l];
    const size_t rows = layer.out_dim();
    const size_t cols = layer.in_dim();
    std::vector<double> downstream(cols, 0.0);
    for (size_t r = 0; r < rows; ++r) {
      const double g = upstream[r];
      gb[r] = g;
      if (g == 0.0) continue;
      for (size_t c = 0; c < cols; ++c) {
        gw.at(r, c) = g * in[c];
        downstream[c] += g * layer.weight.at(r, c);
      }
    }
    upstream = std::move(downstream);
  }
  grads.input = Tensor::Vector(std::move(upstream));
  return grads;
}

Gradients Backward(const MlpModel& model, const Tensor& input,
                   const LossFunctional& loss, double* loss_value) {
  ForwardTrace trace = Forward(model, input);
  LossValue lv = loss(trace.logits().data());
  if (!std::isfinite(lv.value)) {
    throw NumericError("non-finite loss in backward pass");
  }
  if (loss_value != nullptr) *loss_value = lv.value;
  return Backward(model, trace, lv.grad_logits);
}

double AccumulateCrossEntropy(const MlpModel& model, const Tensor& features,
                              std::span<const int> labels,
                              std::span<const size_t> rows, Gradients* grads) {
  const size_t num_layers = model.num_layers();
  // Per-layer activations for one sample; reused across rows.
  std::vector<std::vector<double>> pre(num_layers), post(num_layers);
  size_t widest = model.input_dim();
  for (size_t l = 0; l < num_layers; ++l) {
    pre[l].resize(model.layer(l).out_dim());
    post[l].resize(model.layer(l).out_dim());
    widest = std::max(widest, model.layer(l).out_dim());
  }
  std::vector<double> upstream(widest), downstream(widest);
  std::vector<double> probs(model.output_dim());
  double total = 0.0;
  for (size_t row : rows) {
    std::span<const double> x = features.row(row);
    std::span<const double> current = x;
    for (size_t l = 0; l < num_layers; ++l) {
      const DenseLayer& layer = model.layer(l);
      Affine(layer, current, pre[l]);
      for (size_t r = 0; r < pre[l].size(); ++r) {
        post[l][r] = layer.activation == Activation::kRelu
                         ? std::max(0.0, pre[l][r])
                         : pre[l][r];
      }
      current = post[l];
    }
    const int label = labels[row];
    SoftmaxInto(post.back(), probs);
    total += LogSumExp(post.back()) - post.back()[label];
    const size_t out_dim = model.output_dim();
    for (size_t k = 0; k < out_dim; ++k) {
      upstream[k] = probs[k] - (static_cast<int>(k) == label ? 1.0 : 0.0);
    }
    for (size_t l = num_layers; l-- > 0;) {
      const DenseLayer& layer = model.layer(l);
      const size_t out = layer.out_dim();
      const size_t in = layer.in_dim();
      if (layer.activation == Activation::kRelu) {
        for (size_t r = 0; r < out; ++r) {
          if (!(pre[l][r] > 0.0)) upstream[r] = 0.0;
        }
      }
      std::span<const double> input = l == 0 ? x : std::span<const double>(post[l - 1]);
      double* gw = grads->weight[l].data().data();
      double* gb = grads->bias[l].data().data();
      const double* w = layer.weight.data().data();
      if (l > 0) std::fill(downstream.begin(), downstream.begin() + in, 0.0);
      for (size_t r = 0; r < out; ++r) {
        const double g = upstream[r];
        if (g == 0.0) continue;
        gb[r] += g;
        double* gw_row = gw + r * in;
        const double* w_row = w + r * in;
        for (size_t c = 0; c < in; ++c) gw_row[c] += g * input[c];
        if (l > 0) {
          for (size_t c = 0; c < in; ++c) downstream[c] += g * w_row[c];
        }
      }
      if (l > 0) std::copy(downstream.begin(), downstream.begin() + in, upstream.begin());
    }
  }
  return total;
}

double Accuracy(const MlpModel& model, const Tensor& features,
                std::span<const int> labels) {
  if (labels.empty()) return 0.0;
  Evaluator eval(model);
  size_t correct = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (static_cast<int>(Argmax(eval.Logits(features.row(i)))) == labels[i]) {
      ++correct;
    }
  }
  return static_cast<double>(correct) / static_cast<double>(labels.size());
}

size_t Argmax(std::span<const double> values) {
  return static_cast<size_t>(
      std::distance(values.begin(), std::max_element(values.begin(), values.end())));
}

}  // namespace bnnint::nn
