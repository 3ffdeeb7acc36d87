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

#ifndef BNNINT_RANDOM_H_
#define BNNINT_RANDOM_H_

#include <cstdint>
#include <random>

namespace bnnint {

using Rng = std::mt19937_64;

// SplitMix64 finalizer. Used to derive independent, reproducible sub-seeds
// (per sample, per draw, per stage) from one user seed.
inline uint64_t MixSeed(uint64_t value) {
  value += 0x9e3779b97f4a7c15ULL;
  value = (value ^ (value >> 30)) * 0xbf58476d1ce4e5b9ULL;
  value = (value ^ (value >> 27)) * 0x94d049bb133111ebULL;
  return value ^ (value >> 31);
}

inline uint64_t DeriveSeed(uint64_t seed, uint64_t stream) {
  return MixSeed(MixSeed(seed) ^ MixSeed(stream + 0x632be59bd9b4e019ULL));
}

inline uint64_t DeriveSeed(uint64_t seed, uint64_t stream, uint64_t index) {
  return DeriveSeed(DeriveSeed(seed, stream), index);
}

inline Rng MakeRng(uint64_t seed) { return Rng(MixSeed(seed)); }

}  // namespace bnnint

#endif  // BNNINT_RANDOM_H_
