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

#ifndef BNNINT_ADAM_H_
#define BNNINT_ADAM_H_

#include <cstddef>
#include <span>
#include <vector>

namespace bnnint::nn {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam over a fixed list of parameter blocks. The block sizes are captured
// on the first Step and must not change afterwards.
class Adam {
 public:
  explicit Adam(AdamConfig config = {});

  void Step(const std::vector<std::span<double>>& params,
            const std::vector<std::span<const double>>& grads);

  size_t steps() const { return step_; }
  const AdamConfig& config() const { return config_; }

 private:
  AdamConfig config_;
  size_t step_ = 0;
  std::vector<std::vector<double>> m_;
  std::vector<std::vector<double>> v_;
};

}  // namespace bnnint::nn

#endif  // BNNINT_ADAM_H_
