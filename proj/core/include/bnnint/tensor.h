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

#ifndef BNNINT_TENSOR_H_
#define BNNINT_TENSOR_H_

#include <cstddef>
#include <span>
#include <vector>

namespace bnnint {

// Dense row-major array of doubles. Rank 1 holds vectors (inputs, biases,
// features), rank 2 holds weight matrices (rows = outputs).
class Tensor {
 public:
  Tensor() = default;

  // Zero-filled tensor. Every extent must be positive.
  explicit Tensor(std::vector<size_t> shape);

  // Throws ShapeError unless data.size() equals the product of extents.
  Tensor(std::vector<size_t> shape, std::vector<double> data);

  static Tensor Vector(std::vector<double> values);
  static Tensor Matrix(size_t rows, size_t cols, std::vector<double> values);

  const std::vector<size_t>& shape() const { return shape_; }
  size_t rank() const { return shape_.size(); }
  size_t size() const { return data_.size(); }
  size_t dim(size_t axis) const;

  // Rank-2 accessors.
  size_t rows() const { return dim(0); }
  size_t cols() const { return dim(1); }
  double& at(size_t row, size_t col) { return data_[row * shape_[1] + col]; }
  double at(size_t row, size_t col) const {
    return data_[row * shape_[1] + col];
  }
  std::span<const double> row(size_t r) const {
    return {data_.data() + r * shape_[1], shape_[1]};
  }
  std::span<double> row(size_t r) {
    return {data_.data() + r * shape_[1], shape_[1]};
  }

  double& operator[](size_t i) { return data_[i]; }
  double operator[](size_t i) const { return data_[i]; }

  std::span<double> data() { return data_; }
  std::span<const double> data() const { return data_; }
  const std::vector<double>& values() const { return data_; }

  bool AllFinite() const;
  void Fill(double value);

  bool operator==(const Tensor& other) const = default;

 private:
  std::vector<size_t> shape_;
  std::vector<double> data_;
};

}  // namespace bnnint

#endif  // BNNINT_TENSOR_H_
