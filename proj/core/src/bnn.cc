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


#include "bnnint/bnn.h"

#include <cmath>
#include <string>
#include <utility>

#include "bnnint/adam.h"
#include "bnnint/error.h"
#include "bnnint/loss.h"
#include "bnnint/random.h"

namespace bnnint::bnn {
namespace {

double Logistic(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

// d sigma / d rho, zero where the floor is active.
double SigmaGrad(double rho) {
  return Softplus(rho) > kSigmaFloor ? Logistic(rho) : 0.0;
}

struct Noise {
  std::vector<Tensor> weight;
  std::vector<Tensor> bias;
};

nn::MlpModel Sample(const BnnModel& bnn, uint64_t seed, Noise* noise) {
  Rng rng = MakeRng(seed);
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<nn::DenseLayer> layers;
  for (const MeanFieldLayer& mf : bnn.layers()) {
    nn::DenseLayer layer;
    layer.weight = mf.weight_mean;
    layer.bias = mf.bias_mean;
    layer.activation = mf.activation;
    Tensor zw(mf.weight_mean.shape());
    Tensor zb(mf.bias_mean.shape());
    for (size_t i = 0; i < zw.size(); ++i) {
      zw[i] = normal(rng);
      layer.weight[i] += Sigma(mf.weight_rho[i]) * zw[i];
    }
    for (size_t i = 0; i < zb.size(); ++i) {
      zb[i] = normal(rng);
      layer.bias[i] += Sigma(mf.bias_rho[i]) * zb[i];
    }
    if (noise != nullptr) {
      noise->weight.push_back(std::move(zw));
      noise->bias.push_back(std::move(zb));
    }
    layers.push_back(std::move(layer));
  }
  return nn::MlpModel(std::move(layers));
}

Tensor RhoLike(const Tensor& mean, double sigma) {
  Tensor rho(mean.shape());
  rho.Fill(InverseSoftplus(sigma));
  return rho;
}

}  // namespace

double Softplus(double rho) {
  if (rho > 30.0) return rho;
  return std::log1p(std::exp(rho));
}

double InverseSoftplus(double sigma) {
  sigma = std::max(sigma, kSigmaFloor);
  if (sigma > 30.0) return sigma;
  return std::log(std::expm1(sigma));
}

double Sigma(double rho) { return std::max(Softplus(rho), kSigmaFloor); }

BnnModel::BnnModel(std::vector<MeanFieldLayer> layers)
    : layers_(std::move(layers)) {
  if (layers_.empty()) throw ShapeError("a BNN needs at least one layer");
  for (size_t l = 0; l < layers_.size(); ++l) {
    const MeanFieldLayer& mf = layers_[l];
    if (mf.weight_mean.rank() != 2 || mf.weight_rho.shape() != mf.weight_mean.shape() ||
        mf.bias_mean.rank() != 1 || mf.bias_mean.size() != mf.weight_mean.rows() ||
        mf.bias_rho.shape() != mf.bias_mean.shape()) {
      throw ShapeError("BNN layer " + std::to_string(l + 1) +
                       " has inconsistent shapes");
    }
    if (l > 0 && layers_[l - 1].out_dim() != mf.in_dim()) {
      throw ShapeError("BNN layer " + std::to_string(l + 1) +
                       " does not chain with the previous layer");
    }
  }
  if (layers_.back().activation != nn::Activation::kIdentity) {
    throw ShapeError("the final BNN layer must be identity-activated");
  }
}

BnnModel BnnModel::Initialize(std::span<const size_t> widths, uint64_t seed,
                              double init_sigma) {
  if (!(init_sigma >= 0.0)) throw ArgumentError("negative initial sigma");
  const nn::MlpModel means = nn::MlpModel::Initialize(widths, seed);
  std::vector<MeanFieldLayer> layers;
  for (const nn::DenseLayer& dl : means.layers()) {
    MeanFieldLayer mf;
    mf.weight_mean = dl.weight;
    mf.bias_mean = dl.bias;
    mf.weight_rho = RhoLike(dl.weight, init_sigma);
    mf.bias_rho = RhoLike(dl.bias, init_sigma);
    mf.activation = dl.activation;
    layers.push_back(std::move(mf));
  }
  return BnnModel(std::move(layers));
}

std::vector<size_t> BnnModel::widths() const {
  std::vector<size_t> widths{input_dim()};
  for (const MeanFieldLayer& mf : layers_) widths.push_back(mf.out_dim());
  return widths;
}

size_t BnnModel::num_weights() const {
  size_t count = 0;
  for (const MeanFieldLayer& mf : layers_) {
    count += mf.weight_mean.size() + mf.bias_mean.size();
  }
  return count;
}

std::vector<std::span<double>> BnnModel::MutableParameters() {
  std::vector<std::span<double>> views;
  for (MeanFieldLayer& mf : layers_) {
    views.push_back(mf.weight_mean.data());
    views.push_back(mf.weight_rho.data());
    views.push_back(mf.bias_mean.data());
    views.push_back(mf.bias_rho.data());
  }
  return views;
}

nn::MlpModel SampleWeights(const BnnModel& bnn, uint64_t seed) {
  nn::MlpModel model = Sample(bnn, seed, nullptr);
  for (const nn::DenseLayer& layer : model.layers()) {
    if (!layer.weight.AllFinite() || !layer.bias.AllFinite()) {
      throw NumericError("sampled weights overflowed");
    }
  }
  return model;
}

uint64_t MemberSeed(uint64_t seed, size_t index) {
  return DeriveSeed(seed, 0xe75e, index);
}

double KlTerm(double mu, double sigma) {
  return -std::log(sigma) + 0.5 * (sigma * sigma + mu * mu - 1.0);
}

double KlToStandardNormal(const BnnModel& bnn) {
  double kl = 0.0;
  for (const MeanFieldLayer& mf : bnn.layers()) {
    for (size_t i = 0; i < mf.weight_mean.size(); ++i) {
      kl += KlTerm(mf.weight_mean[i], Sigma(mf.weight_rho[i]));
    }
    for (size_t i = 0; i < mf.bias_mean.size(); ++i) {
      kl += KlTerm(mf.bias_mean[i], Sigma(mf.bias_rho[i]));
    }
  }
  return kl;
}

double ElboLoss(const BnnModel& bnn, const Dataset& data,
                std::span<const size_t> rows, double kl_weight, uint64_t seed,
                size_t mc_samples) {
  if (rows.empty()) throw ArgumentError("empty batch");
  if (mc_samples == 0) throw ArgumentError("need at least one MC sample");
  if (!(kl_weight >= 0.0)) throw ArgumentError("negative KL weight");
  double nll = 0.0;
  for (size_t s = 0; s < mc_samples; ++s) {
    const nn::MlpModel sampled = SampleWeights(bnn, DeriveSeed(seed, s));
    nn::Evaluator eval(sampled);
    for (size_t row : rows) {
      auto logits = eval.Logits(data.features.row(row));
      nll += nn::LogSumExp(logits) - logits[data.labels[row]];
    }
  }
  return nll / static_cast<double>(mc_samples) +
         kl_weight * KlToStandardNormal(bnn);
}

BnnTrainResult TrainBnn(const BnnModel& bnn, const Dataset& data,
                        const BnnTrainConfig& config) {
  nn::ValidateTrainConfig(config.train);
  if (config.mc_samples == 0) throw ArgumentError("mc_samples must be >= 1");
  if (data.rows() == 0) throw ArgumentError("empty training set");
  if (data.num_features() != bnn.input_dim()) {
    throw ShapeError("dataset feature count does not match the BNN input");
  }
  for (int label : data.labels) {
    if (label < 0 || static_cast<size_t>(label) >= bnn.output_dim()) {
      throw ArgumentError("label " + std::to_string(label) +
                          " exceeds the BNN's class count");
    }
  }
  const size_t batch_size = nn::EffectiveBatchSize(config.train, data.rows());
  const size_t num_batches = (data.rows() + batch_size - 1) / batch_size;
  const double kl_weight =
      config.kl_weight.value_or(1.0 / static_cast<double>(num_batches));
  if (!(kl_weight >= 0.0)) throw ArgumentError("negative KL weight");

  BnnTrainResult result;
  result.model = bnn;
  BnnModel& model = result.model;
  nn::Adam adam({.learning_rate = config.train.learning_rate});
  const double inv_mc = 1.0 / static_cast<double>(config.mc_samples);
  size_t step = 0;
  for (size_t epoch = 0; epoch < config.train.epochs; ++epoch) {
    double epoch_loss = 0.0;
    for (const auto& batch : nn::EpochBatches(data.rows(), batch_size,
                                              config.train.seed, epoch)) {
      std::vector<Tensor> grads;
      for (const MeanFieldLayer& mf : model.layers()) {
        grads.emplace_back(mf.weight_mean.shape());
        grads.emplace_back(mf.weight_rho.shape());
        grads.emplace_back(mf.bias_mean.shape());
        grads.emplace_back(mf.bias_rho.shape());
      }
      double nll = 0.0;
      for (size_t s = 0; s < config.mc_samples; ++s) {
        Noise noise;
        const uint64_t draw_seed =
            DeriveSeed(config.train.seed, 0x7ba1, step * config.mc_samples + s);
        const nn::MlpModel sampled = Sample(model, draw_seed, &noise);
        nn::Gradients g = nn::Gradients::ZerosLike(sampled);
        nll += nn::AccumulateCrossEntropy(sampled, data.features, data.labels,
                                          batch, &g);
        for (size_t l = 0; l < model.num_layers(); ++l) {
          const MeanFieldLayer& mf = model.layer(l);
          Tensor& g_wmu = grads[4 * l];
          Tensor& g_wrho = grads[4 * l + 1];
          Tensor& g_bmu = grads[4 * l + 2];
          Tensor& g_brho = grads[4 * l + 3];
          for (size_t i = 0; i < g_wmu.size(); ++i) {
            const double gw = g.weight[l][i] * inv_mc;
            g_wmu[i] += gw;
            g_wrho[i] += gw * noise.weight[l][i] * SigmaGrad(mf.weight_rho[i]);
          }
          for (size_t i = 0; i < g_bmu.size(); ++i) {
            const double gb = g.bias[l][i] * inv_mc;
            g_bmu[i] += gb;
            g_brho[i] += gb * noise.bias[l][i] * SigmaGrad(mf.bias_rho[i]);
          }
        }
      }
      nll *= inv_mc;
      if (!std::isfinite(nll)) {
        throw NumericError("non-finite ELBO at epoch " + std::to_string(epoch + 1));
      }
      // Closed-form KL gradients: d/dmu = mu, d/dsigma = sigma - 1/sigma.
      for (size_t l = 0; l < model.num_layers(); ++l) {
        const MeanFieldLayer& mf = model.layer(l);
        auto add_kl = [kl_weight](const Tensor& mean, const Tensor& rho,
                                  Tensor& g_mean, Tensor& g_rho) {
          for (size_t i = 0; i < mean.size(); ++i) {
            const double sigma = Sigma(rho[i]);
            g_mean[i] += kl_weight * mean[i];
            g_rho[i] += kl_weight * (sigma - 1.0 / sigma) * SigmaGrad(rho[i]);
          }
        };
        add_kl(mf.weight_mean, mf.weight_rho, grads[4 * l], grads[4 * l + 1]);
        add_kl(mf.bias_mean, mf.bias_rho, grads[4 * l + 2], grads[4 * l + 3]);
      }
      epoch_loss += nll + kl_weight * KlToStandardNormal(model);
      std::vector<std::span<const double>> views;
      for (const Tensor& t : grads) views.push_back(t.data());
      adam.Step(model.MutableParameters(), views);
      ++step;
    }
    result.epoch_loss.push_back(epoch_loss);
    result.epoch_accuracy.push_back(
        BnnAccuracy(model, data, config.eval_samples,
                    DeriveSeed(config.train.seed, 0xacc)));
    if (config.train.keep_snapshots) result.snapshots.push_back(model);
  }
  return result;
}

Ensemble::Ensemble(const BnnModel& bnn, size_t num_samples, uint64_t seed) {
  if (num_samples == 0) throw ArgumentError("num_samples must be >= 1");
  for (size_t s = 0; s < num_samples; ++s) {
    members_.push_back(SampleWeights(bnn, MemberSeed(seed, s)));
  }
}

std::vector<double> Ensemble::Predict(std::span<const double> input) const {
  std::vector<double> mean(members_.front().output_dim(), 0.0);
  std::vector<double> probs(mean.size());
  for (const nn::MlpModel& member : members_) {
    nn::Evaluator eval(member);
    nn::SoftmaxInto(eval.Logits(input), probs);
    for (size_t k = 0; k < mean.size(); ++k) mean[k] += probs[k];
  }
  for (double& p : mean) p /= static_cast<double>(members_.size());
  return mean;
}

std::vector<double> BnnPredict(const BnnModel& bnn,
                               std::span<const double> input,
                               size_t num_samples, uint64_t seed) {
  return Ensemble(bnn, num_samples, seed).Predict(input);
}

double BnnAccuracy(const BnnModel& bnn, const Dataset& data,
                   size_t num_samples, uint64_t seed) {
  if (data.rows() == 0) return 0.0;
  const Ensemble ensemble(bnn, num_samples, seed);
  size_t correct = 0;
  for (size_t r = 0; r < data.rows(); ++r) {
    const std::vector<double> p = ensemble.Predict(data.features.row(r));
    if (static_cast<int>(nn::Argmax(p)) == data.labels[r]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(data.rows());
}

nn::MlpModel DnnFromBnnMean(const BnnModel& bnn) {
  std::vector<nn::DenseLayer> layers;
  for (const MeanFieldLayer& mf : bnn.layers()) {
    layers.push_back({mf.weight_mean, mf.bias_mean, mf.activation});
  }
  return nn::MlpModel(std::move(layers));
}

BnnModel BnnFromDnn(const nn::MlpModel& dnn, std::span<const double> variances) {
  if (variances.size() != dnn.num_layers()) {
    throw ArgumentError("need one variance per layer");
  }
  std::vector<MeanFieldLayer> layers;
  for (size_t l = 0; l < dnn.num_layers(); ++l) {
    if (!(variances[l] >= 0.0)) {
      throw ArgumentError("negative variance for layer " + std::to_string(l + 1));
    }
    const nn::DenseLayer& dl = dnn.layer(l);
    const double sigma = std::sqrt(variances[l]);
    MeanFieldLayer mf;
    mf.weight_mean = dl.weight;
    mf.bias_mean = dl.bias;
    mf.weight_rho = RhoLike(dl.weight, sigma);
    mf.bias_rho = RhoLike(dl.bias, 0.0);
    mf.activation = dl.activation;
    layers.push_back(std::move(mf));
  }
  return BnnModel(std::move(layers));
}

std::vector<double> MeanLayerVariances(const BnnModel& bnn) {
  std::vector<double> variances;
  for (const MeanFieldLayer& mf : bnn.layers()) {
    double sum = 0.0;
    for (double rho : mf.weight_rho.data()) {
      const double sigma = Sigma(rho);
      sum += sigma * sigma;
    }
    variances.push_back(sum / static_cast<double>(mf.weight_rho.size()));
  }
  return variances;
}

}  // namespace bnnint::bnn
