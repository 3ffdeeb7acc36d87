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


#include "bnnint/surrogate.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>

#include "bnnint/adam.h"
#include "bnnint/error.h"
#include "bnnint/random.h"

namespace bnnint::surrogate {
namespace {

// Normal draws for one noise slot, draw-major (draws x dim).
Tensor SlotNoise(uint64_t seed, size_t slot, size_t draws, size_t dim) {
  Rng rng = MakeRng(DeriveSeed(seed, 0x5107, slot));
  std::normal_distribution<double> normal(0.0, 1.0);
  Tensor z({draws, dim});
  for (double& v : z.data()) v = normal(rng);
  return z;
}

size_t SlotDim(const nn::MlpModel& dnn, size_t slot) {
  return slot == 0 ? dnn.input_dim() : dnn.layer(slot - 1).out_dim();
}

void CheckLayer(size_t layer, size_t num_layers) {
  if (layer == 0 || layer > num_layers) {
    throw ArgumentError("layer " + std::to_string(layer) + " out of range 1.." +
                        std::to_string(num_layers));
  }
}

void CheckPlan(const nn::MlpModel& dnn, const PerturbationPlan& plan,
               size_t layer) {
  if (plan.slots.size() < layer) throw ArgumentError("plan does not cover the layer");
  for (size_t j = 0; j < layer; ++j) {
    if (plan.slots[j].size() != SlotDim(dnn, j)) {
      throw ShapeError("plan slot " + std::to_string(j) + " has wrong size");
    }
    for (double v : plan.slots[j]) {
      if (!(v >= 0.0)) throw ArgumentError("negative or NaN plan variance");
    }
  }
}

// Per-layer pre-activation samples of whole-network weight draws.
std::vector<Tensor> BnnSampleMatrices(const bnn::BnnModel& bnn,
                                      std::span<const double> x, size_t draws,
                                      uint64_t seed) {
  if (draws < 2) throw ArgumentError("need at least 2 draws");
  if (x.size() != bnn.input_dim()) throw ShapeError("input has wrong length");
  std::vector<Tensor> out;
  for (const auto& layer : bnn.layers()) out.emplace_back(std::vector<size_t>{draws, layer.out_dim()});
  const Tensor input = Tensor::Vector({x.begin(), x.end()});
  for (size_t k = 0; k < draws; ++k) {
    const nn::MlpModel sampled = bnn::SampleWeights(bnn, DeriveSeed(seed, k));
    const nn::ForwardTrace trace = nn::Forward(sampled, input);
    for (size_t l = 0; l < out.size(); ++l) {
      auto row = out[l].row(k);
      const auto pre = trace.layers[l].pre_activation.data();
      std::copy(pre.begin(), pre.end(), row.begin());
    }
  }
  return out;
}

double KlTerm(double mp, double vp, double mq, double vq) {
  vp = std::max(vp, kVarianceFloor);
  vq = std::max(vq, kVarianceFloor);
  const double d = mp - mq;
  return 0.5 * std::log(vq / vp) + (vp + d * d) / (2.0 * vq) - 0.5;
}

// Per-x data for fitting one slot.
struct FitSample {
  FeatureDistribution target;
  Tensor base;   // slot input before this slot's noise (draws x D_j)
  Tensor noise;  // this slot's standard normals (draws x D_j)
};

// Mean KL over samples for log-variances s; gradient into *grad if given.
double SlotObjective(const nn::DenseLayer& layer, bool relu_slot,
                     const std::vector<FitSample>& samples,
                     std::span<const double> sd, std::span<double> grad) {
  const size_t out_dim = layer.out_dim();
  const size_t in_dim = layer.in_dim();
  const bool want_grad = !grad.empty();
  if (want_grad) std::fill(grad.begin(), grad.end(), 0.0);
  double total = 0.0;
  std::vector<double> a(in_dim);
  std::vector<double> mq(out_dim), vq(out_dim), dmu(out_dim), dvar(out_dim), gh(out_dim);
  std::vector<double> ga(in_dim);
  for (const FitSample& fs : samples) {
    const size_t draws = fs.base.rows();
    const double n = static_cast<double>(draws);
    Tensor h({draws, out_dim});
    for (size_t k = 0; k < draws; ++k) {
      auto base = fs.base.row(k);
      auto z = fs.noise.row(k);
      for (size_t j = 0; j < in_dim; ++j) {
        const double u = base[j] + sd[j] * z[j];
        a[j] = relu_slot ? std::max(0.0, u) : u;
      }
      auto hk = h.row(k);
      for (size_t i = 0; i < out_dim; ++i) {
        double sum = layer.bias[i];
        const auto w = layer.weight.row(i);
        for (size_t j = 0; j < in_dim; ++j) sum += w[j] * a[j];
        hk[i] = sum;
      }
    }
    const FeatureDistribution q = Moments(h);
    const FeatureDistribution& p = fs.target;
    for (size_t i = 0; i < out_dim; ++i) {
      total += KlTerm(p.mean[i], p.variance[i], q.mean[i], q.variance[i]);
    }
    if (!want_grad) continue;
    for (size_t i = 0; i < out_dim; ++i) {
      const bool floored = q.variance[i] < kVarianceFloor;
      const double v = std::max(q.variance[i], kVarianceFloor);
      const double vp = std::max(p.variance[i], kVarianceFloor);
      const double d = p.mean[i] - q.mean[i];
      mq[i] = q.mean[i];
      dmu[i] = -d / v;
      dvar[i] = floored ? 0.0 : 1.0 / (2.0 * v) - (vp + d * d) / (2.0 * v * v);
    }
    for (size_t k = 0; k < draws; ++k) {
      auto hk = h.row(k);
      for (size_t i = 0; i < out_dim; ++i) {
        gh[i] = dmu[i] / n + dvar[i] * 2.0 * (hk[i] - mq[i]) / (n - 1.0);
      }
      auto base = fs.base.row(k);
      auto z = fs.noise.row(k);
      std::fill(ga.begin(), ga.end(), 0.0);
      for (size_t i = 0; i < out_dim; ++i) {
        const auto w = layer.weight.row(i);
        for (size_t j = 0; j < in_dim; ++j) ga[j] += gh[i] * w[j];
      }
      for (size_t j = 0; j < in_dim; ++j) {
        const double u = base[j] + sd[j] * z[j];
        if (relu_slot && !(u > 0.0)) continue;
        // du/ds = z * sd / 2 for s = log variance.
        grad[j] += ga[j] * z[j] * sd[j] * 0.5;
      }
    }
  }
  const double scale = 1.0 / static_cast<double>(samples.size());
  if (want_grad) {
    for (double& g : grad) g *= scale;
  }
  return total * scale;
}

std::string Fmt(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

}  // namespace

FeatureDistribution Moments(const Tensor& samples) {
  const size_t draws = samples.rows();
  const size_t dim = samples.cols();
  FeatureDistribution out;
  out.draws = draws;
  out.mean.assign(dim, 0.0);
  out.variance.assign(dim, 0.0);
  for (size_t k = 0; k < draws; ++k) {
    auto row = samples.row(k);
    for (size_t i = 0; i < dim; ++i) out.mean[i] += row[i];
  }
  for (double& m : out.mean) m /= static_cast<double>(draws);
  if (draws < 2) return out;
  for (size_t k = 0; k < draws; ++k) {
    auto row = samples.row(k);
    for (size_t i = 0; i < dim; ++i) {
      const double d = row[i] - out.mean[i];
      out.variance[i] += d * d;
    }
  }
  for (double& v : out.variance) v /= static_cast<double>(draws - 1);
  return out;
}

PerturbationPlan PerturbationPlan::Zeros(const nn::MlpModel& model) {
  PerturbationPlan plan;
  plan.slots.emplace_back(model.input_dim(), 0.0);
  for (size_t l = 0; l + 1 < model.num_layers(); ++l) {
    plan.slots.emplace_back(model.layer(l).out_dim(), 0.0);
  }
  return plan;
}

std::vector<FeatureDistribution> BnnFeatureDistributions(
    const bnn::BnnModel& bnn, std::span<const double> x, size_t draws,
    uint64_t seed) {
  std::vector<FeatureDistribution> out;
  for (const Tensor& t : BnnSampleMatrices(bnn, x, draws, seed)) {
    out.push_back(Moments(t));
  }
  return out;
}

FeatureDistribution BnnFeatureSamples(const bnn::BnnModel& bnn,
                                      std::span<const double> x, size_t layer,
                                      size_t draws, uint64_t seed) {
  CheckLayer(layer, bnn.num_layers());
  return BnnFeatureDistributions(bnn, x, draws, seed)[layer - 1];
}

Tensor SurrogateSamples(const nn::MlpModel& dnn, std::span<const double> x,
                        const PerturbationPlan& plan, size_t layer,
                        size_t draws, uint64_t seed) {
  CheckLayer(layer, dnn.num_layers());
  CheckPlan(dnn, plan, layer);
  if (draws == 0) throw ArgumentError("need at least one draw");
  if (x.size() != dnn.input_dim()) throw ShapeError("input has wrong length");
  std::vector<Tensor> noise;
  std::vector<std::vector<double>> sd;
  for (size_t j = 0; j < layer; ++j) {
    noise.push_back(SlotNoise(seed, j, draws, SlotDim(dnn, j)));
    std::vector<double> s(plan.slots[j].size());
    for (size_t d = 0; d < s.size(); ++d) s[d] = std::sqrt(plan.slots[j][d]);
    sd.push_back(std::move(s));
  }
  Tensor out({draws, dnn.layer(layer - 1).out_dim()});
  std::vector<double> a, h;
  for (size_t k = 0; k < draws; ++k) {
    a.assign(x.begin(), x.end());
    auto z0 = noise[0].row(k);
    for (size_t d = 0; d < a.size(); ++d) a[d] += sd[0][d] * z0[d];
    for (size_t l = 1; l <= layer; ++l) {
      const nn::DenseLayer& dl = dnn.layer(l - 1);
      h.assign(dl.out_dim(), 0.0);
      for (size_t i = 0; i < dl.out_dim(); ++i) {
        double sum = dl.bias[i];
        const auto w = dl.weight.row(i);
        for (size_t j = 0; j < dl.in_dim(); ++j) sum += w[j] * a[j];
        h[i] = sum;
      }
      if (l == layer) break;
      auto zl = noise[l].row(k);
      a.resize(h.size());
      for (size_t i = 0; i < h.size(); ++i) {
        const double u = h[i] + sd[l][i] * zl[i];
        a[i] = dl.activation == nn::Activation::kRelu ? std::max(0.0, u) : u;
      }
    }
    std::copy(h.begin(), h.end(), out.row(k).begin());
  }
  return out;
}

FeatureDistribution SurrogateFeatureSamples(const nn::MlpModel& dnn,
                                            std::span<const double> x,
                                            const PerturbationPlan& plan,
                                            size_t layer, size_t draws,
                                            uint64_t seed) {
  return Moments(SurrogateSamples(dnn, x, plan, layer, draws, seed));
}

double KlDiagGaussian(const FeatureDistribution& p, const FeatureDistribution& q) {
  if (p.mean.size() != q.mean.size() || p.variance.size() != q.variance.size() ||
      p.mean.size() != p.variance.size()) {
    throw ShapeError("feature distributions differ in dimension");
  }
  double kl = 0.0;
  for (size_t i = 0; i < p.mean.size(); ++i) {
    kl += KlTerm(p.mean[i], p.variance[i], q.mean[i], q.variance[i]);
  }
  return std::max(kl, 0.0);
}

double BaselineKl(const Tensor& bnn_samples) {
  const FeatureDistribution p = Moments(bnn_samples);
  double mean = 0.0;
  for (double v : bnn_samples.data()) mean += v;
  mean /= static_cast<double>(bnn_samples.size());
  double var = 0.0;
  for (double v : bnn_samples.data()) var += (v - mean) * (v - mean);
  var /= static_cast<double>(bnn_samples.size() - 1);
  FeatureDistribution base;
  base.mean.assign(p.mean.size(), mean);
  base.variance.assign(p.mean.size(), var);
  return KlDiagGaussian(p, base);
}

double BaselineDistributionError(const bnn::BnnModel& bnn, const Tensor& xs,
                                 size_t layer, size_t draws, uint64_t seed) {
  CheckLayer(layer, bnn.num_layers());
  double total = 0.0;
  for (size_t r = 0; r < xs.rows(); ++r) {
    const auto samples = BnnSampleMatrices(bnn, xs.row(r), draws,
                                           DeriveSeed(seed, 0xb22, r));
    total += BaselineKl(samples[layer - 1]);
  }
  return total / static_cast<double>(xs.rows());
}

FitResult FitSurrogate(const bnn::BnnModel& bnn, const nn::MlpModel& dnn,
                       const Tensor& xs, const FitConfig& config) {
  if (bnn.widths() != dnn.widths()) {
    throw ShapeError("BNN and surrogate architectures differ");
  }
  if (xs.rank() != 2 || xs.cols() != dnn.input_dim() || xs.rows() == 0) {
    throw ShapeError("x-set must be a non-empty rows x input_dim matrix");
  }
  if (config.draws < 2) throw ArgumentError("need at least 2 draws");
  const size_t num_x = xs.rows();
  const size_t num_layers = dnn.num_layers();

  // Targets and baselines from one set of BNN draws per x.
  std::vector<std::vector<Tensor>> bnn_samples(num_x);
  for (size_t r = 0; r < num_x; ++r) {
    bnn_samples[r] = BnnSampleMatrices(bnn, xs.row(r), config.draws,
                                       DeriveSeed(config.seed, 0xb22, r));
  }

  FitResult result;
  result.plan = PerturbationPlan::Zeros(dnn);
  for (size_t layer = 1; layer <= num_layers; ++layer) {
    const size_t slot = layer - 1;
    const size_t dim = SlotDim(dnn, slot);
    const nn::DenseLayer& dl = dnn.layer(layer - 1);
    const bool relu_slot = slot > 0 && dnn.layer(slot - 1).activation == nn::Activation::kRelu;

    std::vector<FitSample> samples(num_x);
    LayerFitLog log;
    log.layer = layer;
    for (size_t r = 0; r < num_x; ++r) {
      const uint64_t pool = DeriveSeed(config.seed, 0x5077, r);
      FitSample& fs = samples[r];
      fs.target = Moments(bnn_samples[r][layer - 1]);
      if (slot == 0) {
        fs.base = Tensor({config.draws, dim});
        for (size_t k = 0; k < config.draws; ++k) {
          auto row = xs.row(r);
          std::copy(row.begin(), row.end(), fs.base.row(k).begin());
        }
      } else {
        fs.base = SurrogateSamples(dnn, xs.row(r), result.plan, slot,
                                   config.draws, pool);
      }
      fs.noise = SlotNoise(pool, slot, config.draws, dim);
      log.baseline_kl += BaselineKl(bnn_samples[r][layer - 1]);
    }
    log.baseline_kl /= static_cast<double>(num_x);

    const std::vector<double> zero_sd(dim, 0.0);
    log.kl_before = SlotObjective(dl, relu_slot, samples, zero_sd, {});

    // Start from a uniform variance that closes the mean variance gap
    // under a linear, all-active approximation.
    double gap = 0.0;
    {
      double target = 0.0;
      double current = 0.0;
      for (const FitSample& fs : samples) {
        for (double v : fs.target.variance) target += v;
      }
      // Current variance of layer features with this slot silent.
      for (size_t r = 0; r < num_x; ++r) {
        Tensor h({config.draws, dl.out_dim()});
        for (size_t k = 0; k < config.draws; ++k) {
          auto base = samples[r].base.row(k);
          for (size_t i = 0; i < dl.out_dim(); ++i) {
            double sum = dl.bias[i];
            const auto w = dl.weight.row(i);
            for (size_t j = 0; j < dim; ++j) {
              const double a = relu_slot ? std::max(0.0, base[j]) : base[j];
              sum += w[j] * a;
            }
            h.row(k)[i] = sum;
          }
        }
        for (double v : Moments(h).variance) current += v;
      }
      double active = 0.0;
      for (const FitSample& fs : samples) {
        for (double v : fs.base.data()) active += (!relu_slot || v > 0.0) ? 1.0 : 0.0;
      }
      active /= static_cast<double>(num_x * config.draws * dim);
      double gain = 0.0;
      for (double w : dl.weight.data()) gain += w * w;
      gain *= std::max(active, 0.05);
      gap = (target - current) / std::max(gain * static_cast<double>(num_x), 1e-300);
    }
    const double init_var = std::clamp(gap, 1e-6, 1e2);
    std::vector<double> s(dim, std::log(init_var));
    std::vector<double> sd(dim), grad(dim);
    auto set_sd = [&] {
      for (size_t j = 0; j < dim; ++j) sd[j] = std::exp(0.5 * s[j]);
    };

    nn::Adam adam({.learning_rate = config.learning_rate});
    set_sd();
    double best = SlotObjective(dl, relu_slot, samples, sd, grad);
    std::vector<double> best_s = s;
    double previous = best;
    size_t increases = 0;
    std::vector<double> trajectory;
    bool diverged = false;
    for (size_t step = 0; step < config.steps; ++step) {
      adam.Step({std::span<double>(s)}, {std::span<const double>(grad)});
      set_sd();
      const double kl = SlotObjective(dl, relu_slot, samples, sd, grad);
      trajectory.push_back(kl);
      ++log.steps_run;
      if (!std::isfinite(kl)) {
        diverged = true;
        result.diagnostic = "non-finite KL while fitting layer " + std::to_string(layer);
        break;
      }
      if (kl < best) {
        best = kl;
        best_s = s;
      }
      increases = kl > previous ? increases + 1 : 0;
      previous = kl;
      if (increases >= config.divergence_patience) {
        diverged = true;
        result.diagnostic = "KL increased " + std::to_string(increases) +
                            " consecutive steps while fitting layer " +
                            std::to_string(layer);
        break;
      }
    }
    if (best <= log.kl_before) {
      for (size_t j = 0; j < dim; ++j) result.plan.slots[slot][j] = std::exp(best_s[j]);
      log.kl_after = best;
    } else {
      log.kl_after = log.kl_before;
    }
    result.layers.push_back(log);
    result.trajectories.push_back(std::move(trajectory));
    if (diverged) {
      result.diverged = true;
      break;
    }
  }
  return result;
}

std::string FormatPlanCsv(const PerturbationPlan& plan, const std::string& header) {
  std::string out = header.empty() ? "" : "# " + header + "\n";
  out += "layer,dim,variance\n";
  for (size_t j = 0; j < plan.slots.size(); ++j) {
    for (size_t d = 0; d < plan.slots[j].size(); ++d) {
      out += std::to_string(j) + "," + std::to_string(d) + "," +
             Fmt(plan.slots[j][d]) + "\n";
    }
  }
  return out;
}

std::string FormatFitLogCsv(const FitResult& result, const std::string& header) {
  std::string out = header.empty() ? "" : "# " + header + "\n";
  out += "layer,kl_before,kl_after,baseline_kl\n";
  for (const LayerFitLog& log : result.layers) {
    out += std::to_string(log.layer) + "," + Fmt(log.kl_before) + "," +
           Fmt(log.kl_after) + "," + Fmt(log.baseline_kl) + "\n";
  }
  return out;
}

}  // namespace bnnint::surrogate
