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


#include "bnnint/interaction.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <set>

#include "bnnint/error.h"
#include "bnnint/loss.h"
#include "bnnint/parallel.h"
#include "bnnint/random.h"

namespace bnnint::interaction {
namespace {

const double kMaxLogOdds = std::log((1.0 - kProbabilityClamp) / kProbabilityClamp);

size_t Log2Exact(size_t length) {
  if (length == 0 || (length & (length - 1)) != 0) {
    throw ArgumentError("table length " + std::to_string(length) +
                        " is not a power of two");
  }
  size_t n = 0;
  while ((size_t{1} << n) < length) ++n;
  if (n > kMaxActive) throw ArgumentError("more than 20 variables");
  return n;
}

void CheckLabel(int label, size_t classes) {
  if (label < 0 || static_cast<size_t>(label) >= classes) {
    throw ArgumentError("label " + std::to_string(label) + " out of range for " +
                        std::to_string(classes) + " classes");
  }
}

// log sum_{k != skip} exp(z_k), or -inf for a single class.
double LogSumExpExcept(std::span<const double> z, size_t skip) {
  double peak = -INFINITY;
  for (size_t k = 0; k < z.size(); ++k) {
    if (k != skip) peak = std::max(peak, z[k]);
  }
  if (peak == -INFINITY) return peak;
  double sum = 0.0;
  for (size_t k = 0; k < z.size(); ++k) {
    if (k != skip) sum += std::exp(z[k] - peak);
  }
  return peak + std::log(sum);
}

}  // namespace

double ReferenceValue(double x, double mean, double tau) {
  if (x > mean) return std::max(x - tau, mean);
  return std::min(x + tau, mean);
}

std::vector<double> ReferenceValues(std::span<const double> x,
                                    std::span<const double> means, double tau) {
  if (!(tau > 0.0)) throw ArgumentError("tau must be positive");
  if (x.size() != means.size()) throw ShapeError("x and means differ in length");
  std::vector<double> r(x.size());
  for (size_t i = 0; i < x.size(); ++i) r[i] = ReferenceValue(x[i], means[i], tau);
  return r;
}

std::vector<size_t> MaskContext::ActiveIndices() const {
  std::vector<size_t> out;
  for (const auto& g : groups) out.insert(out.end(), g.begin(), g.end());
  return out;
}

MaskContext MakeGroupedContext(std::span<const double> x,
                               std::span<const double> means, double tau,
                               std::vector<std::vector<size_t>> groups) {
  if (groups.size() > kMaxActive) {
    throw ArgumentError("at most 20 active variables are supported");
  }
  std::set<size_t> used;
  for (const auto& g : groups) {
    if (g.empty()) throw ArgumentError("empty variable group");
    for (size_t i : g) {
      if (i >= x.size()) throw ArgumentError("active index out of range");
      if (!used.insert(i).second) throw ArgumentError("input index used twice");
    }
  }
  MaskContext ctx;
  ctx.x.assign(x.begin(), x.end());
  ctx.means.assign(means.begin(), means.end());
  ctx.reference = ReferenceValues(x, means, tau);
  ctx.tau = tau;
  ctx.groups = std::move(groups);
  return ctx;
}

MaskContext MakeContext(std::span<const double> x, std::span<const double> means,
                        double tau, const std::vector<size_t>& active) {
  std::vector<std::vector<size_t>> groups;
  for (size_t i : active) groups.push_back({i});
  return MakeGroupedContext(x, means, tau, std::move(groups));
}

void MaskedInputInto(const MaskContext& ctx, uint64_t mask, std::span<double> out) {
  std::copy(ctx.reference.begin(), ctx.reference.end(), out.begin());
  for (size_t k = 0; k < ctx.groups.size(); ++k) {
    if ((mask >> k) & 1) {
      for (size_t i : ctx.groups[k]) out[i] = ctx.x[i];
    }
  }
}

std::vector<double> MaskedInput(const MaskContext& ctx, uint64_t mask) {
  if (mask >= ctx.num_masks()) throw ArgumentError("mask out of range");
  std::vector<double> out(ctx.x.size());
  MaskedInputInto(ctx, mask, out);
  return out;
}

double LogOdds(double p) { return LogOdds(p, 1.0 - p); }

double LogOdds(double p, double q) {
  const double lo = kProbabilityClamp;
  const double hi = 1.0 - kProbabilityClamp;
  if (p <= lo) return -kMaxLogOdds;
  if (p >= hi || q <= lo) return kMaxLogOdds;
  return std::log(p) - std::log(q);
}

ValueFunction MlpLogOdds(const nn::MlpModel& model, int label) {
  CheckLabel(label, model.output_dim());
  return [&model, label](std::span<const double> input) {
    nn::Evaluator eval(model);
    const auto z = eval.Logits(input);
    const double v = z[label] - LogSumExpExcept(z, label);
    return std::clamp(v, -kMaxLogOdds, kMaxLogOdds);
  };
}

ValueFunction EnsembleLogOdds(std::shared_ptr<const bnn::Ensemble> ensemble,
                              int label) {
  CheckLabel(label, ensemble->members().front().output_dim());
  return [ensemble = std::move(ensemble), label](std::span<const double> input) {
    const std::vector<double> p = ensemble->Predict(input);
    double q = 0.0;
    for (size_t k = 0; k < p.size(); ++k) {
      if (static_cast<int>(k) != label) q += p[k];
    }
    return LogOdds(p[label], q);
  };
}

ValueFunction BnnLogOdds(const bnn::BnnModel& bnn, int label, size_t num_samples,
                         uint64_t seed) {
  return EnsembleLogOdds(
      std::make_shared<const bnn::Ensemble>(bnn, num_samples, seed), label);
}

std::vector<double> EvaluateMasks(const MaskContext& ctx,
                                  const ValueFunction& value, size_t workers) {
  const size_t masks = ctx.num_masks();
  std::vector<double> raw(masks);
  constexpr size_t kChunk = 64;
  const size_t chunks = (masks + kChunk - 1) / kChunk;
  ParallelFor(
      chunks,
      [&](size_t c) {
        std::vector<double> input(ctx.x.size());
        const size_t end = std::min(masks, (c + 1) * kChunk);
        for (size_t m = c * kChunk; m < end; ++m) {
          MaskedInputInto(ctx, m, input);
          raw[m] = value(input);
        }
      },
      workers);
  return raw;
}

void MobiusInPlace(std::span<double> values) {
  const size_t length = values.size();
  Log2Exact(length);
  for (size_t bit = 1; bit < length; bit <<= 1) {
    for (size_t m = 0; m < length; ++m) {
      if (m & bit) values[m] -= values[m ^ bit];
    }
  }
}

void ZetaInPlace(std::span<double> values) {
  const size_t length = values.size();
  Log2Exact(length);
  for (size_t bit = 1; bit < length; bit <<= 1) {
    for (size_t m = 0; m < length; ++m) {
      if (m & bit) values[m] += values[m ^ bit];
    }
  }
}

InteractionTable HarsanyiTransform(std::span<const double> raw) {
  InteractionTable table;
  table.n_active = Log2Exact(raw.size());
  table.raw.assign(raw.begin(), raw.end());
  table.values = table.raw;
  MobiusInPlace(table.values);
  return table;
}

std::vector<double> ZetaReconstruct(const InteractionTable& table) {
  std::vector<double> out = table.values;
  ZetaInPlace(out);
  return out;
}

InteractionTable ComputeTable(const MaskContext& ctx, const ValueFunction& value,
                              size_t workers) {
  return HarsanyiTransform(EvaluateMasks(ctx, value, workers));
}

std::vector<uint64_t> RankConcepts(std::span<const double> magnitudes) {
  std::vector<uint64_t> order(magnitudes.size() - 1);
  std::iota(order.begin(), order.end(), uint64_t{1});
  std::stable_sort(order.begin(), order.end(), [&](uint64_t a, uint64_t b) {
    return std::abs(magnitudes[a]) > std::abs(magnitudes[b]);
  });
  return order;
}

SalientSet ExtractSalient(const InteractionTable& table, double threshold) {
  if (!(threshold > 0.0 && threshold <= 1.0)) {
    throw ArgumentError("salient threshold must lie in (0, 1]");
  }
  SalientSet set;
  set.threshold = threshold;
  double peak = 0.0;
  for (size_t m = 1; m < table.values.size(); ++m) {
    peak = std::max(peak, std::abs(table.values[m]));
  }
  std::vector<double> kept(table.values.size(), 0.0);
  if (peak > 0.0) {
    for (uint64_t m : RankConcepts(table.values)) {
      const double v = table.values[m];
      if (std::abs(v) < threshold * peak) break;
      set.concepts.emplace_back(m, v);
      kept[m] = v;
    }
  }
  ZetaInPlace(kept);
  set.residual.resize(table.raw.size());
  for (size_t m = 0; m < table.raw.size(); ++m) set.residual[m] = table.raw[m] - kept[m];
  return set;
}

std::vector<double> SparsityCurve(const InteractionTable& table) {
  std::vector<double> curve;
  curve.reserve(table.values.size() - 1);
  for (size_t m = 1; m < table.values.size(); ++m) {
    curve.push_back(std::abs(table.values[m]));
  }
  std::sort(curve.begin(), curve.end(), std::greater<double>());
  return curve;
}

size_t ResolveActiveCount(size_t n_total, size_t requested) {
  if (requested > 0) return requested;
  return n_total > 16 ? kDefaultSampledActive : n_total;
}

std::vector<size_t> SampleActiveVariables(size_t n_total, size_t n_active,
                                          std::span<const size_t> candidates,
                                          uint64_t seed) {
  std::vector<size_t> pool;
  if (candidates.empty()) {
    pool.resize(n_total);
    std::iota(pool.begin(), pool.end(), 0);
  } else {
    for (size_t i : candidates) {
      if (i >= n_total) throw ArgumentError("candidate index out of range");
    }
    pool.assign(candidates.begin(), candidates.end());
    std::sort(pool.begin(), pool.end());
    pool.erase(std::unique(pool.begin(), pool.end()), pool.end());
  }
  if (n_active > pool.size()) {
    throw ArgumentError("region has " + std::to_string(pool.size()) +
                        " variables, fewer than the " + std::to_string(n_active) +
                        " requested");
  }
  if (n_active > kMaxActive) throw ArgumentError("more than 20 active variables");
  Rng rng = MakeRng(DeriveSeed(seed, 0xac71));
  // Partial Fisher-Yates.
  for (size_t i = 0; i < n_active; ++i) {
    std::uniform_int_distribution<size_t> pick(i, pool.size() - 1);
    std::swap(pool[i], pool[pick(rng)]);
  }
  pool.resize(n_active);
  std::sort(pool.begin(), pool.end());
  return pool;
}

std::vector<size_t> CentralRegion(size_t grid_rows, size_t grid_cols,
                                  size_t region_rows, size_t region_cols) {
  if (region_rows > grid_rows || region_cols > grid_cols) {
    throw ArgumentError("region larger than grid");
  }
  const size_t top = (grid_rows - region_rows) / 2;
  const size_t left = (grid_cols - region_cols) / 2;
  std::vector<size_t> out;
  for (size_t r = top; r < top + region_rows; ++r) {
    for (size_t c = left; c < left + region_cols; ++c) out.push_back(r * grid_cols + c);
  }
  return out;
}

uint64_t MaskOf(const std::vector<size_t>& variables) {
  uint64_t mask = 0;
  for (size_t v : variables) mask |= uint64_t{1} << v;
  return mask;
}

std::string FormatTableCsv(const InteractionTable& table,
                           const std::vector<size_t>& active, double tau,
                           uint64_t seed, const std::string& extra) {
  std::string out = "# n_active=" + std::to_string(table.n_active) + " active=";
  for (size_t i = 0; i < active.size(); ++i) {
    if (i > 0) out += ';';
    out += std::to_string(active[i]);
  }
  char buffer[96];
  std::snprintf(buffer, sizeof(buffer), " tau=%.17g seed=%llu", tau,
                static_cast<unsigned long long>(seed));
  out += buffer;
  if (!extra.empty()) out += " " + extra;
  out += "\nmask_hex,order,v_raw,i_value\n";
  for (size_t m = 0; m < table.values.size(); ++m) {
    std::snprintf(buffer, sizeof(buffer), "0x%llx,%d,%.17g,%.17g\n",
                  static_cast<unsigned long long>(m), Order(m), table.raw[m],
                  table.values[m]);
    out += buffer;
  }
  return out;
}

}  // namespace bnnint::interaction
