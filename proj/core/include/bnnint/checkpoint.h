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


// Structured-text model checkpoints. Floats are written in hexadecimal
// (printf "%a"), so loading restores every bit.
//
//   bnnint-mlp v1            bnnint-bnn v1
//   layers <L>               layers <L>
//   layer <in> <out> <act>   layer <in> <out> <act>
//   weight <values...>       weight_mean / weight_rho <values...>
//   bias <values...>         bias_mean / bias_rho <values...>

#ifndef BNNINT_CHECKPOINT_H_
#define BNNINT_CHECKPOINT_H_

#include <string>

#include "bnnint/bnn.h"
#include "bnnint/mlp.h"

namespace bnnint {

std::string SerializeMlp(const nn::MlpModel& model);
std::string SerializeBnn(const bnn::BnnModel& model);

// Throw ParseError on malformed text.
nn::MlpModel ParseMlp(const std::string& text);
bnn::BnnModel ParseBnn(const std::string& text);

void SaveMlp(const nn::MlpModel& model, const std::string& path);
void SaveBnn(const bnn::BnnModel& model, const std::string& path);
nn::MlpModel LoadMlp(const std::string& path);
bnn::BnnModel LoadBnn(const std::string& path);

// Accepts either kind; a BNN checkpoint yields its mean network.
nn::MlpModel LoadAsMlp(const std::string& path);
bool IsBnnCheckpoint(const std::string& path);

}  // namespace bnnint

#endif  // BNNINT_CHECKPOINT_H_
