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


#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "bnnint/bnn.h"
#include "bnnint/dataset.h"
#include "bnnint/error.h"
#include "bnnint/interaction.h"
#include "bnnint/loss.h"
#include "bnnint/train.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace bnnint {
namespace {

using interaction::HarsanyiTransform;
using interaction::InteractionTable;

// I(S) = sum over T subset of S of (-1)^{|S|-|T|} v(T), by enumeration.
std::vector<double> DirectDividends(const std::vector<double>& v) {
  std::vector<double> out(v.size(), 0.0);
  for (uint64_t s = 0; s < v.size(); ++s) {
    double sum = 0.0;
    for (uint64_t t = s;; t = (t - 1) & s) {
      const int sign = ((__builtin_popcountll(s) - __builtin_popcountll(t)) % 2) ? -1 : 1;
      sum += sign * v[t];
      if (t == 0) break;
    }
    out[s] = sum;
  }
  return out;
}

TEST(ReferenceValueTest, Examples) {
  EXPECT_DOUBLE_EQ(interaction::ReferenceValue(2.0, 0.0, 0.5), 1.5);
  EXPECT_DOUBLE_EQ(interaction::ReferenceValue(0.3, 0.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(interaction::ReferenceValue(-2.0, 0.0, 0.5), -1.5);
  EXPECT_DOUBLE_EQ(interaction::ReferenceValue(-0.1, 0.0, 0.5), 0.0);
  EXPECT_DOUBLE_EQ(interaction::ReferenceValue(0.7, 0.7, 0.5), 0.7);
}

TEST(ReferenceValueTest, LiesBetweenSampleAndMean) {
  const auto xs = testing::Normals(500, 1, 2.0);
  const auto means = testing::Normals(500, 2);
  for (size_t i = 0; i < xs.size(); ++i) {
    const double r = interaction::ReferenceValue(xs[i], means[i], 0.5);
    EXPECT_LE(std::min(xs[i], means[i]), r);
    EXPECT_GE(std::max(xs[i], means[i]), r);
    EXPECT_LE(std::abs(r - xs[i]), 0.5 + 1e-15);
  }
}

TEST(MaskTest, MaskedInputs) {
  const std::vector<double> x = {2.0, -3.0, 1.0};
  const std::vector<double> means = {0.0, 0.0, 0.0};
  const auto ctx = interaction::MakeContext(x, means, 0.5, {0, 1});
  EXPECT_EQ(interaction::MaskedInput(ctx, 0), (std::vector<double>{1.5, -2.5, 0.5}));
  EXPECT_EQ(interaction::MaskedInput(ctx, 3), (std::vector<double>{2.0, -3.0, 0.5}));
  EXPECT_EQ(interaction::MaskedInput(ctx, 1), (std::vector<double>{2.0, -2.5, 0.5}));
  EXPECT_EQ(ctx.num_masks(), 4u);
}

TEST(MaskTest, GroupsMaskTogether) {
  const std::vector<double> x = {2.0, 2.0, 2.0, 2.0};
  const std::vector<double> means(4, 0.0);
  const auto ctx = interaction::MakeGroupedContext(x, means, 1.0, {{0, 2}, {3}});
  EXPECT_EQ(interaction::MaskedInput(ctx, 1), (std::vector<double>{2.0, 1.0, 2.0, 1.0}));
  EXPECT_EQ(ctx.ActiveIndices(), (std::vector<size_t>{0, 2, 3}));
}

TEST(MaskTest, ContextErrors) {
  const std::vector<double> x(25, 1.0), means(25, 0.0);
  EXPECT_THROW(interaction::MakeContext(x, means, 0.0, {0}), ArgumentError);
  EXPECT_THROW(interaction::MakeContext(x, means, 0.5, {0, 0}), ArgumentError);
  EXPECT_THROW(interaction::MakeContext(x, means, 0.5, {25}), ArgumentError);
  std::vector<size_t> many(21);
  for (size_t i = 0; i < many.size(); ++i) many[i] = i;
  EXPECT_THROW(interaction::MakeContext(x, means, 0.5, many), ArgumentError);
}

TEST(LogOddsTest, Values) {
  EXPECT_EQ(interaction::LogOdds(0.5), 0.0);
  EXPECT_NEAR(interaction::LogOdds(0.9), std::log(9.0), 1e-12);
  EXPECT_NEAR(interaction::LogOdds(1.0), std::log((1 - 1e-7) / 1e-7), 1e-6);
  EXPECT_NEAR(interaction::LogOdds(0.0), -std::log((1 - 1e-7) / 1e-7), 1e-6);
}

TEST(LogOddsTest, ModelValueFunctions) {
  const std::vector<size_t> widths = {3, 8, 3};
  const auto dnn = nn::MlpModel::Initialize(widths, 4);
  const auto v = interaction::MlpLogOdds(dnn, 1);
  const std::vector<double> x = {0.2, -0.4, 1.0};
  const auto p = nn::Softmax(nn::Forward(dnn, Tensor::Vector(x)).logits().data());
  EXPECT_NEAR(v(x), std::log(p[1] / (1 - p[1])), 1e-12);
  EXPECT_THROW(interaction::MlpLogOdds(dnn, 3), ArgumentError);

  const auto b = bnn::BnnFromDnn(dnn, std::vector<double>{0.0, 0.0});
  const auto vb = interaction::BnnLogOdds(b, 1, 10, 7);
  for (uint64_t s = 0; s < 20; ++s) {
    const auto xs = testing::Normals(3, s);
    EXPECT_NEAR(vb(xs), v(xs), 1e-8);
  }
}

TEST(HarsanyiTest, Examples) {
  const auto table = HarsanyiTransform(std::vector<double>{0, 1, 2, 5});
  EXPECT_EQ(table.values, (std::vector<double>{0, 1, 2, 2}));
  EXPECT_EQ(interaction::ZetaReconstruct(table), (std::vector<double>{0, 1, 2, 5}));

  const auto constant = HarsanyiTransform(std::vector<double>(16, 3.5));
  EXPECT_EQ(constant.values[0], 3.5);
  for (size_t m = 1; m < 16; ++m) EXPECT_EQ(constant.values[m], 0.0);

  EXPECT_THROW(HarsanyiTransform(std::vector<double>(3, 0.0)), ArgumentError);
  EXPECT_THROW(HarsanyiTransform(std::vector<double>{}), ArgumentError);
}

TEST(HarsanyiTest, AdditiveFunctionsHaveOnlySingletons) {
  for (size_t n = 1; n <= 6; ++n) {
    const auto w = testing::Normals(n, n);
    std::vector<double> v(size_t{1} << n, 0.0);
    for (uint64_t t = 0; t < v.size(); ++t) {
      for (size_t i = 0; i < n; ++i) {
        if (t >> i & 1) v[t] += w[i];
      }
    }
    const auto direct = DirectDividends(v);
    const auto table = HarsanyiTransform(v);
    for (uint64_t s = 0; s < v.size(); ++s) {
      const double expected = interaction::Order(s) == 1 ? w[__builtin_ctzll(s)] : 0.0;
      EXPECT_NEAR(direct[s], expected, 1e-12);
      EXPECT_NEAR(table.values[s], expected, 1e-12);
    }
  }
}

TEST(HarsanyiTest, FastTransformMatchesDirectEnumeration) {
  for (uint64_t seed = 0; seed < 60; ++seed) {
    const size_t n = 1 + seed % 12;
    const auto v = testing::Normals(size_t{1} << n, seed);
    const auto direct = DirectDividends(v);
    const auto table = HarsanyiTransform(v);
    double scale = 1.0;
    for (double d : direct) scale = std::max(scale, std::abs(d));
    EXPECT_LE(testing::MaxAbsDiff(table.values, direct), 1e-12 * scale) << n;
  }
}

TEST(HarsanyiTest, RoundTripAndSingleConcept) {
  const auto values = testing::Normals(1024, 3);
  InteractionTable table;
  table.n_active = 10;
  table.values = values;
  const auto raw = interaction::ZetaReconstruct(table);
  EXPECT_LE(testing::MaxAbsDiff(HarsanyiTransform(raw).values, values), 1e-9);

  InteractionTable single;
  single.n_active = 3;
  single.values.assign(8, 0.0);
  single.values[0b011] = 2.5;
  const auto v = interaction::ZetaReconstruct(single);
  for (uint64_t t = 0; t < 8; ++t) EXPECT_EQ(v[t], (t & 0b011) == 0b011 ? 2.5 : 0.0);
}

TEST(HarsanyiTest, Linearity) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const auto v1 = testing::Normals(256, seed);
    const auto v2 = testing::Normals(256, seed + 50);
    const double a = 1.5, b = -0.25;
    std::vector<double> mix(256);
    for (size_t i = 0; i < 256; ++i) mix[i] = a * v1[i] + b * v2[i];
    const auto t1 = HarsanyiTransform(v1).values;
    const auto t2 = HarsanyiTransform(v2).values;
    const auto tm = HarsanyiTransform(mix).values;
    for (size_t i = 0; i < 256; ++i) EXPECT_NEAR(tm[i], a * t1[i] + b * t2[i], 1e-12);
  }
}

TEST(HarsanyiTest, DummyVariableHasZeroDividends) {
  for (uint64_t seed = 0; seed < 20; ++seed) {
    const size_t n = 2 + seed % 8;
    const size_t dummy = seed % n;
    const auto base = testing::Normals(size_t{1} << n, seed);
    std::vector<double> v(base.size());
    for (uint64_t t = 0; t < v.size(); ++t) v[t] = base[t & ~(uint64_t{1} << dummy)];
    const auto table = HarsanyiTransform(v);
    for (uint64_t s = 0; s < v.size(); ++s) {
      if (s >> dummy & 1) EXPECT_NEAR(table.values[s], 0.0, 1e-10);
    }
  }
}

TEST(SalientTest, ThresholdExtremes) {
  InteractionTable table;
  table.n_active = 3;
  table.values = {0.7, 1.0, -0.5, 0.0, 2.0, 0.0, 0.0, -2.0};
  table.raw = interaction::ZetaReconstruct(table);
  const auto all = interaction::ExtractSalient(table, 1e-9);
  EXPECT_EQ(all.concepts.size(), 4u);
  for (double r : all.residual) EXPECT_NEAR(r, 0.7, 1e-12);
  const auto top = interaction::ExtractSalient(table, 1.0);
  ASSERT_EQ(top.concepts.size(), 2u);
  EXPECT_EQ(top.concepts[0].first, 4u);
  EXPECT_EQ(top.concepts[1].first, 7u);
  EXPECT_THROW(interaction::ExtractSalient(table, 0.0), ArgumentError);

  InteractionTable zero;
  zero.n_active = 2;
  zero.values.assign(4, 0.0);
  zero.raw.assign(4, 0.0);
  const auto none = interaction::ExtractSalient(zero);
  EXPECT_TRUE(none.concepts.empty());
  for (double r : none.residual) EXPECT_EQ(r, 0.0);
}

TEST(SalientTest, ResidualIsRecomputable) {
  const auto raw = testing::Normals(64, 5);
  const auto table = HarsanyiTransform(raw);
  const auto salient = interaction::ExtractSalient(table, 0.3);
  for (uint64_t t = 0; t < 64; ++t) {
    double expected = raw[t];
    for (const auto& [mask, value] : salient.concepts) {
      if ((mask & t) == mask) expected -= value;
    }
    EXPECT_NEAR(salient.residual[t], expected, 1e-12);
  }
}

TEST(SparsityTest, DescendingAndPermutationInvariant) {
  const auto raw = testing::Normals(128, 8);
  const auto curve = interaction::SparsityCurve(HarsanyiTransform(raw));
  ASSERT_EQ(curve.size(), 127u);
  EXPECT_TRUE(std::is_sorted(curve.rbegin(), curve.rend()));

  // Relabel the variables by reversing bit order.
  std::vector<double> permuted(128);
  for (uint64_t t = 0; t < 128; ++t) {
    uint64_t p = 0;
    for (int i = 0; i < 7; ++i) {
      if (t >> i & 1) p |= uint64_t{1} << (6 - i);
    }
    permuted[p] = raw[t];
  }
  EXPECT_LE(testing::MaxAbsDiff(interaction::SparsityCurve(HarsanyiTransform(permuted)), curve),
            1e-12);
}

TEST(SamplingTest, ActiveVariables) {
  EXPECT_EQ(interaction::SampleActiveVariables(5, 5, {}, 3),
            (std::vector<size_t>{0, 1, 2, 3, 4}));
  const auto a = interaction::SampleActiveVariables(64, 12, {}, 9);
  EXPECT_EQ(a, interaction::SampleActiveVariables(64, 12, {}, 9));
  EXPECT_EQ(std::set<size_t>(a.begin(), a.end()).size(), 12u);
  EXPECT_TRUE(std::is_sorted(a.begin(), a.end()));

  const auto region = interaction::CentralRegion(8, 8, 6, 6);
  ASSERT_EQ(region.size(), 36u);
  for (size_t idx : region) {
    const size_t r = idx / 8, c = idx % 8;
    EXPECT_TRUE(r >= 1 && r <= 6 && c >= 1 && c <= 6) << idx;
  }
  const auto picked = interaction::SampleActiveVariables(64, 12, region, 2);
  for (size_t idx : picked) EXPECT_NE(std::find(region.begin(), region.end(), idx), region.end());
  EXPECT_THROW(interaction::SampleActiveVariables(64, 37, region, 2), ArgumentError);
  EXPECT_EQ(interaction::ResolveActiveCount(64, 0), 12u);
  EXPECT_EQ(interaction::ResolveActiveCount(10, 0), 10u);
  EXPECT_EQ(interaction::ResolveActiveCount(64, 5), 5u);
}

class TrainedModelTest : public ::testing::Test {
 protected:
  // Sparse-AND task with the default training settings of the harness.
  static void SetUpTestSuite() {
    SyntheticSpec spec;
    spec.num_features = 10;
    spec.num_rows = 2000;
    const auto split = SplitTrainTest(GenerateSynthetic(spec, 1), 0.25, 1);
    data_ = new Dataset(split.first);
    const std::vector<size_t> widths = {10, 32, 32, 2};
    nn::TrainConfig config;
    config.epochs = 100;
    config.batch_size = 64;
    config.seed = 1;
    model_ = new nn::MlpModel(
        nn::TrainDnn(nn::MlpModel::Initialize(widths, 1), *data_, config).model);
  }
  static void TearDownTestSuite() {
    delete model_;
    delete data_;
  }
  static interaction::MaskContext Context(size_t row) {
    const std::vector<double> x(data_->features.row(row).begin(),
                                data_->features.row(row).end());
    std::vector<size_t> active(10);
    for (size_t i = 0; i < 10; ++i) active[i] = i;
    return interaction::MakeContext(x, data_->FeatureMeans(), 0.5, active);
  }
  static nn::MlpModel* model_;
  static Dataset* data_;
};
nn::MlpModel* TrainedModelTest::model_ = nullptr;
Dataset* TrainedModelTest::data_ = nullptr;

TEST_F(TrainedModelTest, FaithfulReconstruction) {
  const auto ctx = Context(0);
  const auto v = interaction::MlpLogOdds(*model_, data_->labels[0]);
  const auto table = interaction::ComputeTable(ctx, v, 1);
  const auto rebuilt = interaction::ZetaReconstruct(table);
  for (uint64_t t = 0; t < ctx.num_masks(); ++t) {
    EXPECT_NEAR(rebuilt[t], v(interaction::MaskedInput(ctx, t)), 1e-9);
  }
  EXPECT_EQ(interaction::ComputeTable(ctx, v, 4).values, table.values);
}

// The I(empty) offset is not an interaction and is left out of the residual.
TEST_F(TrainedModelTest, SparseSalientSetExplainsOutputs) {
  for (size_t row = 0; row < 5; ++row) {
    const auto table = interaction::ComputeTable(
        Context(row), interaction::MlpLogOdds(*model_, data_->labels[row]));
    const auto salient = interaction::ExtractSalient(table);
    double max_v = 0.0, max_residual = 0.0;
    for (double v : table.raw) max_v = std::max(max_v, std::abs(v));
    for (uint64_t t = 0; t < table.raw.size(); ++t) {
      max_residual = std::max(max_residual, std::abs(salient.residual[t] - table.values[0]));
    }
    EXPECT_LT(salient.concepts.size(), 1023u / 4) << "row " << row;
    EXPECT_LE(max_residual / max_v, 0.1) << "row " << row;
  }
}

TEST(TableCsvTest, HeaderAndRows) {
  const auto table = HarsanyiTransform(std::vector<double>{0, 1, 2, 5});
  const std::string csv = interaction::FormatTableCsv(table, {3, 7}, 0.5, 11);
  EXPECT_EQ(csv.substr(0, 1), "#");
  EXPECT_NE(csv.find("mask_hex,order,v_raw,i_value"), std::string::npos);
  EXPECT_NE(csv.find("3;7"), std::string::npos);
}

}  // namespace
}  // namespace bnnint
