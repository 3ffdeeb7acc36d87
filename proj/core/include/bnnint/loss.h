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

#ifndef BNNINT_LOSS_H_
#define BNNINT_LOSS_H_

#include <span>
#include <vector>

#include "bnnint/mlp.h"

namespace bnnint::nn {

// Numerically stable softmax.
std::vector<double> Softmax(std::span<const double> logits);
void SoftmaxInto(std::span<const double> logits, std::span<double> out);

double LogSumExp(std::span<const double> logits);

// -log softmax(logits)[label]. Throws ArgumentError on a bad label.
LossFunctional SoftmaxCrossEntropy(int label);

// sum_k (logit_k - target_k)^2.
LossFunctional SquaredError(std::vector<double> target);

}  // namespace bnnint::nn

#endif  // BNNINT_LOSS_H_
