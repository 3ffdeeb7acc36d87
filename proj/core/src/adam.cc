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

#include "bnnint/adam.h"

#include <cmath>
#include <string>

#include "bnnint/error.h"

namespace bnnint::nn {

Adam::Adam(AdamConfig config) : config_(config) {
  if (!(config_.learning_rate > 0.0)) {
    throw ArgumentError("learning rate must be positive");
  }
}

void Adam::Step(const std::vector<std::span<double>>& params,
                const std::vector<std::span<const double>>& grads) {
  if (params.size() != grads.size()) {
    throw ShapeError("parameter and gradient block counts differ");
  }
  if (m_.empty()) {
    for (const auto& p : params) {
      m_.emplace_back(p.size(), 0.0);
      v_.emplace_back(p.size(), 0.0);
    }
  }
  if (m_.size() != params.size()) throw ShapeError("parameter blocks changed");
  ++step_;
  const double t = static_cast<double>(step_);
  const double correction1 = 1.0 - std::pow(config_.beta1, t);
  const double correction2 = 1.0 - std::pow(config_.beta2, t);
  for (size_t b = 0; b < params.size(); ++b) {
    std::span<double> p = params[b];
    std::span<const double> g = grads[b];
    if (p.size() != g.size() || p.size() != m_[b].size()) {
      throw ShapeError("parameter block " + std::to_string(b) +
                       " has mismatched size");
    }
    std::vector<double>& m = m_[b];
    std::vector<double>& v = v_[b];
    for (size_t i = 0; i < p.size(); ++i) {
      m[i] = config_.beta1 * m[i] + (1.0 - config_.beta1) * g[i];
      v[i] = config_.beta2 * v[i] + (1.0 - config_.beta2) * g[i] * g[i];
      const double m_hat = m[i] / correction1;
      const double v_hat = v[i] / correction2;
      p[i] -= config_.learning_rate * m_hat / (std::sqrt(v_hat) + config_.epsilon);
    }
  }
}

}  // namespace bnnint::nn
