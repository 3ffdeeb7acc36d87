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

#include "bnnint/tensor.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "bnnint/error.h"

namespace bnnint {
namespace {

size_t Volume(const std::vector<size_t>& shape) {
  if (shape.empty()) throw ShapeError("tensor shape must have rank >= 1");
  size_t volume = 1;
  for (size_t extent : shape) {
    if (extent == 0) throw ShapeError("tensor extents must be positive");
    volume *= extent;
  }
  return volume;
}

}  // namespace

Tensor::Tensor(std::vector<size_t> shape)
    : shape_(std::move(shape)), data_(Volume(shape_), 0.0) {}

Tensor::Tensor(std::vector<size_t> shape, std::vector<double> data)
    : shape_(std::move(shape)), data_(std::move(data)) {
  const size_t volume = Volume(shape_);
  if (volume != data_.size()) {
    throw ShapeError("tensor data length " + std::to_string(data_.size()) +
                     " does not match shape volume " + std::to_string(volume));
  }
}

Tensor Tensor::Vector(std::vector<double> values) {
  const size_t n = values.size();
  return Tensor({n}, std::move(values));
}

Tensor Tensor::Matrix(size_t rows, size_t cols, std::vector<double> values) {
  return Tensor({rows, cols}, std::move(values));
}

size_t Tensor::dim(size_t axis) const {
  if (axis >= shape_.size()) {
    throw ShapeError("axis " + std::to_string(axis) + " out of range for rank " +
                     std::to_string(shape_.size()));
  }
  return shape_[axis];
}

bool Tensor::AllFinite() const {
  return std::all_of(data_.begin(), data_.end(),
                     [](double v) { return std::isfinite(v); });
}

void Tensor::Fill(double value) { std::fill(data_.begin(), data_.end(), value); }

}  // namespace bnnint
