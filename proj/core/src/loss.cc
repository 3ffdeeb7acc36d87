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

#include "bnnint/loss.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bnnint/error.h"

namespace bnnint::nn {

double LogSumExp(std::span<const double> logits) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - peak);
  return peak + std::log(sum);
}

void SoftmaxInto(std::span<const double> logits, std::span<double> out) {
  const double peak = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (size_t k = 0; k < logits.size(); ++k) {
    out[k] = std::exp(logits[k] - peak);
    sum += out[k];
  }
  for (size_t k = 0; k < logits.size(); ++k) out[k] /= sum;
}

std::vector<double> Softmax(std::span<const double> logits) {
  std::vector<double> out(logits.size());
  SoftmaxInto(logits, out);
  return out;
}

LossFunctional SoftmaxCrossEntropy(int label) {
  return [label](std::span<const double> logits) {
    if (label < 0 || static_cast<size_t>(label) >= logits.size()) {
      throw ArgumentError("label " + std::to_string(label) +
                          " out of range for " + std::to_string(logits.size()) +
                          " classes");
    }
    LossValue lv;
    lv.value = LogSumExp(logits) - logits[label];
    lv.grad_logits = Softmax(logits);
    lv.grad_logits[label] -= 1.0;
    return lv;
  };
}

LossFunctional SquaredError(std::vector<double> target) {
  return [target = std::move(target)](std::span<const double> logits) {
    if (logits.size() != target.size()) {
      throw ShapeError("squared error target has wrong length");
    }
    LossValue lv;
    lv.grad_logits.resize(logits.size());
    for (size_t k = 0; k < logits.size(); ++k) {
      const double diff = logits[k] - target[k];
      lv.value += diff * diff;
      lv.grad_logits[k] = 2.0 * diff;
    }
    return lv;
  };
}

}  // namespace bnnint::nn
