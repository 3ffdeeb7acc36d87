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


// Harsanyi dividends over the subset lattice of masked input variables.
//
// A mask is a bitmask over the active variables: bit k set keeps variable k
// at its sample value, clear replaces it by its reference value. For a
// value function v, the dividend of a subset S is
//   I(S) = sum_{T subset of S} (-1)^{|S|-|T|} v(x_T)
// and v(x_T) = sum_{S subset of T} I(S) recovers the outputs exactly.

#ifndef BNNINT_INTERACTION_H_
#define BNNINT_INTERACTION_H_

#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "bnnint/bnn.h"
#include "bnnint/mlp.h"

namespace bnnint::interaction {

inline constexpr double kDefaultTau = 0.5;
inline constexpr size_t kMaxActive = 20;
inline constexpr double kDefaultSalientThreshold = 0.05;
inline constexpr double kProbabilityClamp = 1e-7;
inline constexpr size_t kDefaultSampledActive = 12;

// Pushes x toward the mean by tau without crossing it:
// x > mean: max(x - tau, mean); otherwise min(x + tau, mean).
double ReferenceValue(double x, double mean, double tau);
std::vector<double> ReferenceValues(std::span<const double> x,
                                    std::span<const double> means, double tau);

struct MaskContext {
  std::vector<double> x;
  std::vector<double> reference;
  std::vector<double> means;
  double tau = kDefaultTau;
  // Active variable k owns these input indices; they are masked together.
  std::vector<std::vector<size_t>> groups;

  size_t n_active() const { return groups.size(); }
  size_t num_masks() const { return size_t{1} << groups.size(); }
  // Input indices of all active variables, in variable order.
  std::vector<size_t> ActiveIndices() const;
};

// One active variable per listed input index. Throws ArgumentError on
// tau <= 0, out-of-range or repeated indices, or more than 20 variables.
MaskContext MakeContext(std::span<const double> x, std::span<const double> means,
                        double tau, const std::vector<size_t>& active);
MaskContext MakeGroupedContext(std::span<const double> x,
                               std::span<const double> means, double tau,
                               std::vector<std::vector<size_t>> groups);

// Inputs outside the active groups always take their reference value.
void MaskedInputInto(const MaskContext& ctx, uint64_t mask, std::span<double> out);
std::vector<double> MaskedInput(const MaskContext& ctx, uint64_t mask);

// Must be safe to call concurrently.
using ValueFunction = std::function<double(std::span<const double>)>;

// log(p / (1 - p)) with p clamped to [1e-7, 1 - 1e-7].
double LogOdds(double p);
// Same quantity from p and q = 1 - p computed separately (avoids the
// cancellation in 1 - p near p = 1).
double LogOdds(double p, double q);

// v(x) = log-odds of softmax(logits)[label]. Throws ArgumentError on a bad label.
ValueFunction MlpLogOdds(const nn::MlpModel& model, int label);
// Same with p from the mean softmax over a fixed ensemble (common random
// numbers across masks).
ValueFunction BnnLogOdds(const bnn::BnnModel& bnn, int label,
                         size_t num_samples = bnn::kDefaultPredictSamples,
                         uint64_t seed = 0);
ValueFunction EnsembleLogOdds(std::shared_ptr<const bnn::Ensemble> ensemble,
                              int label);

// v(x_T) for every mask, indexed by mask.
std::vector<double> EvaluateMasks(const MaskContext& ctx,
                                  const ValueFunction& value,
                                  size_t workers = 1);

struct InteractionTable {
  size_t n_active = 0;
  std::vector<double> values;  // I(S) at index mask(S)
  std::vector<double> raw;     // v(x_T) at index mask(T)
};

// In-place transforms over arrays of length 2^n.
void MobiusInPlace(std::span<double> values);
void ZetaInPlace(std::span<double> values);

// Throws ArgumentError unless raw.size() is 2^n with n <= 20.
InteractionTable HarsanyiTransform(std::span<const double> raw);
std::vector<double> ZetaReconstruct(const InteractionTable& table);

InteractionTable ComputeTable(const MaskContext& ctx, const ValueFunction& value,
                              size_t workers = 1);

inline int Order(uint64_t mask) { return __builtin_popcountll(mask); }

struct SalientSet {
  double threshold = kDefaultSalientThreshold;
  // (mask, I) sorted by |I| descending, ties by mask.
  std::vector<std::pair<uint64_t, double>> concepts;
  // v(x_T) minus the salient dividends contained in T, per mask.
  std::vector<double> residual;
};

// Salient = nonempty S with |I(S)| >= threshold * max nonempty |I|. An
// all-zero table yields no concepts. Throws ArgumentError unless
// 0 < threshold <= 1.
SalientSet ExtractSalient(const InteractionTable& table,
                          double threshold = kDefaultSalientThreshold);

// |I(S)| over nonempty S, descending. Length 2^n - 1.
std::vector<double> SparsityCurve(const InteractionTable& table);

// Nonempty masks ordered by |I| descending (ties by mask); position + 1 is
// the rank.
std::vector<uint64_t> RankConcepts(std::span<const double> magnitudes);

// 12 when n_total > 16, else n_total; a positive request wins.
size_t ResolveActiveCount(size_t n_total, size_t requested);

// Uniform sample without replacement from candidates (all of 0..n_total-1
// when empty), returned in ascending order. Throws ArgumentError when fewer
// than n_active candidates exist.
std::vector<size_t> SampleActiveVariables(size_t n_total, size_t n_active,
                                          std::span<const size_t> candidates,
                                          uint64_t seed);

// Row-major indices of the centered region_rows x region_cols block of a
// grid_rows x grid_cols grid.
std::vector<size_t> CentralRegion(size_t grid_rows, size_t grid_cols,
                                  size_t region_rows, size_t region_cols);

uint64_t MaskOf(const std::vector<size_t>& variables);

// CSV with columns mask_hex,order,v_raw,i_value after one '#' header line
// listing n_active, active indices, tau, seed and any extra key=value text.
std::string FormatTableCsv(const InteractionTable& table,
                           const std::vector<size_t>& active, double tau,
                           uint64_t seed, const std::string& extra = "");

}  // namespace bnnint::interaction

#endif  // BNNINT_INTERACTION_H_
