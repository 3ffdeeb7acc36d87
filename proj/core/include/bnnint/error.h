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

#ifndef BNNINT_ERROR_H_
#define BNNINT_ERROR_H_

#include <stdexcept>
#include <string>

namespace bnnint {

// Tensor extents or layer dimensions that do not line up.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// A caller-supplied value outside its documented domain.
class ArgumentError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// NaN/Inf produced where a finite value is required (losses, gradients).
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Malformed input file. The message carries the offending line number.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, size_t line)
      : std::runtime_error(what + " (line " + std::to_string(line) + ")"),
        line_(line) {}
  explicit ParseError(const std::string& what) : std::runtime_error(what) {}

  size_t line() const { return line_; }

 private:
  size_t line_ = 0;
};

}  // namespace bnnint

#endif  // BNNINT_ERROR_H_
