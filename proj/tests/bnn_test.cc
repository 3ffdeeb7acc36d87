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


#include <cmath>
#include <filesystem>
#include <numeric>
#include <random>
#include <vector>

#include "bnnint/bnn.h"
#include "bnnint/checkpoint.h"
#include "bnnint/error.h"
#include "bnnint/loss.h"
#include "bnnint/random.h"
#include "bnnint/train.h"
#include "gtest/gtest.h"
#include "test_util.h"

namespace bnnint {
namespace {

using bnn::BnnModel;
using bnn::MeanFieldLayer;

MeanFieldLayer ScalarLayer(double mu, double sigma) {
  MeanFieldLayer mf;
  mf.weight_mean = Tensor::Matrix(1, 1, {mu});
  mf.weight_rho = Tensor::Matrix(1, 1, {bnn::InverseSoftplus(sigma)});
  mf.bias_mean = Tensor::Vector({0.0});
  mf.bias_rho = Tensor::Vector({bnn::InverseSoftplus(0.0)});
  mf.activation = nn::Activation::kIdentity;
  return mf;
}

TEST(SoftplusTest, InverseAndFloor) {
  for (double s : {1e-6, 0.05, 1.0, 7.0, 50.0}) {
    EXPECT_NEAR(bnn::Softplus(bnn::InverseSoftplus(s)), s, 1e-12 * std::max(1.0, s));
  }
  EXPECT_EQ(bnn::Sigma(-1e4), bnn::kSigmaFloor);
  EXPECT_GT(bnn::Sigma(-30.0), 0.0);
}

TEST(KlTest, ClosedFormValues) {
  EXPECT_EQ(bnn::KlTerm(0.0, 1.0), 0.0);
  EXPECT_DOUBLE_EQ(bnn::KlTerm(1.0, 1.0), 0.5);
  const BnnModel prior({ScalarLayer(0.0, 1.0)});
  // Bias at the floor contributes; check only the weight term.
  EXPECT_NEAR(bnn::KlTerm(0.0, bnn::Sigma(prior.layer(0).weight_rho[0])), 0.0, 1e-12);
}

TEST(KlTest, NonNegativeAndZeroOnlyAtPrior) {
  const auto mus = testing::Uniforms(1000, 1, -3.0, 3.0);
  const auto sigmas = testing::Uniforms(1000, 2, 0.01, 4.0);
  for (size_t i = 0; i < mus.size(); ++i) {
    EXPECT_GE(bnn::KlTerm(mus[i], sigmas[i]), 0.0);
  }
  EXPECT_GT(bnn::KlTerm(1e-3, 1.0), 0.0);
  EXPECT_GT(bnn::KlTerm(0.0, 1.001), 0.0);
}

TEST(KlTest, MatchesMonteCarlo) {
  const auto mus = testing::Uniforms(5, 3, 0.5, 1.5);
  const auto sigmas = testing::Uniforms(5, 4, 0.2, 0.6);
  Rng rng = MakeRng(77);
  std::normal_distribution<double> normal;
  for (size_t i = 0; i < mus.size(); ++i) {
    constexpr int kDraws = 1000000;
    double sum = 0.0;
    for (int d = 0; d < kDraws; ++d) {
      const double z = normal(rng);
      const double w = mus[i] + sigmas[i] * z;
      // log q(w) - log p(w); the 2 pi terms cancel.
      sum += -std::log(sigmas[i]) - 0.5 * z * z + 0.5 * w * w;
    }
    const double exact = bnn::KlTerm(mus[i], sigmas[i]);
    EXPECT_NEAR(sum / kDraws, exact, 0.01 * exact) << i;
  }
}

TEST(SampleTest, ZeroVarianceEqualsMean) {
  const std::vector<size_t> widths = {4, 6, 3};
  const auto b = BnnModel::Initialize(widths, 5, 0.0);
  const auto sample = bnn::SampleWeights(b, 9);
  const auto mean = bnn::DnnFromBnnMean(b);
  for (size_t l = 0; l < mean.num_layers(); ++l) {
    EXPECT_LE(testing::MaxAbsDiff(sample.layer(l).weight.data(),
                                  mean.layer(l).weight.data()),
              1e-10);
  }
  EXPECT_EQ(bnn::SampleWeights(b, 9), sample);
}

TEST(SampleTest, EmpiricalMomentsMatch) {
  BnnModel b({ScalarLayer(1.0, 0.1)});
  constexpr int kDraws = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int d = 0; d < kDraws; ++d) {
    const double w = bnn::SampleWeights(b, DeriveSeed(3, d)).layer(0).weight[0];
    sum += w;
    sum2 += w * w;
  }
  const double mean = sum / kDraws;
  const double var = (sum2 - kDraws * mean * mean) / (kDraws - 1);
  EXPECT_NEAR(mean, 1.0, 0.01);
  EXPECT_NEAR(var, 0.01, 0.02 * 0.01);
}

TEST(ElboTest, EmptyBatchAndPriorKl) {
  const Dataset data = testing::TwoBlobs(10, 1, 1.0, 1);
  BnnModel b({ScalarLayer(0.0, 1.0)});
  EXPECT_THROW(bnn::ElboLoss(b, data, {}, 1.0, 0), ArgumentError);
}

TEST(ElboTest, ComposesLikelihoodAndKl) {
  const Dataset data = testing::TwoBlobs(16, 3, 1.0, 2);
  const std::vector<size_t> widths = {3, 5, 2};
  const auto b = BnnModel::Initialize(widths, 1, 1e-9);
  std::vector<size_t> rows(16);
  std::iota(rows.begin(), rows.end(), 0);
  const auto mean = bnn::DnnFromBnnMean(b);
  double nll = 0.0;
  for (size_t r : rows) {
    nll += nn::SoftmaxCrossEntropy(data.labels[r])(
               nn::Forward(mean, Tensor::Vector({data.features.row(r).begin(),
                                                 data.features.row(r).end()}))
                   .logits()
                   .data())
               .value;
  }
  const double kl = bnn::KlToStandardNormal(b);
  EXPECT_NEAR(bnn::ElboLoss(b, data, rows, 0.25, 4), nll + 0.25 * kl, 1e-6 * kl);
}

TEST(TrainBnnTest, SeparableTaskReachesHighAccuracy) {
  const Dataset data = testing::TwoBlobs(200, 2, 3.0, 8);
  const std::vector<size_t> widths = {2, 8, 2};
  const auto init = BnnModel::Initialize(widths, 3);
  bnn::BnnTrainConfig config;
  config.train.epochs = 200;
  config.train.batch_size = 20;
  config.train.learning_rate = 1e-3;
  config.train.seed = 4;
  const auto result = bnn::TrainBnn(init, data, config);
  EXPECT_GE(result.epoch_accuracy.back(), 0.95);
}

TEST(TrainBnnTest, DeterministicGivenSeed) {
  const Dataset data = testing::TwoBlobs(60, 2, 1.0, 8);
  const std::vector<size_t> widths = {2, 4, 2};
  const auto init = BnnModel::Initialize(widths, 3);
  bnn::BnnTrainConfig config;
  config.train.epochs = 5;
  config.train.batch_size = 16;
  config.train.seed = 4;
  EXPECT_EQ(bnn::TrainBnn(init, data, config).model, bnn::TrainBnn(init, data, config).model);
}

TEST(TrainBnnTest, ZeroKlAndFloorSigmaFollowsDnnTrajectory) {
  const Dataset data = testing::TwoBlobs(64, 3, 1.0, 9);
  const std::vector<size_t> widths = {3, 6, 2};
  const auto init = BnnModel::Initialize(widths, 2, 0.0);
  bnn::BnnTrainConfig config;
  config.train.epochs = 10;
  config.train.batch_size = 16;
  config.train.learning_rate = 1e-2;
  config.train.seed = 5;
  config.kl_weight = 0.0;
  const auto b = bnn::TrainBnn(init, data, config);
  const auto d = nn::TrainDnn(bnn::DnnFromBnnMean(init), data, config.train);
  const auto mean = bnn::DnnFromBnnMean(b.model);
  for (size_t l = 0; l < mean.num_layers(); ++l) {
    EXPECT_LE(testing::MaxAbsDiff(mean.layer(l).weight.data(),
                                  d.model.layer(l).weight.data()),
              1e-6);
  }
}

TEST(PredictTest, ValidDistributionAndOrderInvariance) {
  const std::vector<size_t> widths = {4, 8, 3};
  const auto b = BnnModel::Initialize(widths, 7, 0.3);
  const auto x = testing::Normals(4, 1);
  const auto p = bnn::BnnPredict(b, x, 10, 3);
  double total = 0.0;
  for (double v : p) {
    EXPECT_GE(v, 0.0);
    total += v;
  }
  EXPECT_NEAR(total, 1.0, 1e-12);

  const auto single = bnn::BnnPredict(b, x, 1, 3);
  const auto member = bnn::SampleWeights(b, bnn::MemberSeed(3, 0));
  const auto expected =
      nn::Softmax(nn::Forward(member, Tensor::Vector(x)).logits().data());
  EXPECT_LE(testing::MaxAbsDiff(single, expected), 1e-15);

  bnn::Ensemble ensemble(b, 10, 3);
  std::vector<double> reversed(3, 0.0);
  const auto& members = ensemble.members();
  for (size_t k = members.size(); k-- > 0;) {
    const auto q = nn::Softmax(nn::Forward(members[k], Tensor::Vector(x)).logits().data());
    for (size_t c = 0; c < 3; ++c) reversed[c] += q[c] / members.size();
  }
  EXPECT_LE(testing::MaxAbsDiff(reversed, p), 1e-15);
  EXPECT_THROW(bnn::BnnPredict(b, x, 0, 3), ArgumentError);
}

TEST(PredictTest, ZeroVarianceMatchesMeanNetwork) {
  const std::vector<size_t> widths = {5, 16, 16, 3};
  const auto b = BnnModel::Initialize(widths, 4, 0.0);
  const auto mean = bnn::DnnFromBnnMean(b);
  for (uint64_t s = 0; s < 100; ++s) {
    const auto x = testing::Normals(5, 100 + s, 2.0);
    const auto sample = bnn::SampleWeights(b, s);
    const auto a = nn::Forward(sample, Tensor::Vector(x)).logits();
    const auto m = nn::Forward(mean, Tensor::Vector(x)).logits();
    EXPECT_LE(testing::MaxAbsDiff(a.data(), m.data()), 1e-10);
    const auto p = bnn::BnnPredict(b, x, 10, s);
    EXPECT_LE(testing::MaxAbsDiff(p, nn::Softmax(m.data())), 1e-10);
  }
}

TEST(ConversionTest, PredictionApproachesMeanAsSigmaShrinks) {
  const std::vector<size_t> widths = {4, 16, 3};
  const auto base = BnnModel::Initialize(widths, 6, 0.1);
  const auto mean = bnn::DnnFromBnnMean(base);
  const auto x = testing::Normals(4, 2);
  const auto target = nn::Softmax(nn::Forward(mean, Tensor::Vector(x)).logits().data());
  double previous = 1e300;
  for (double sigma : {0.1, 0.01, 0.001}) {
    const std::vector<double> v(mean.num_layers(), sigma * sigma);
    const auto b = bnn::BnnFromDnn(mean, v);
    const double diff = testing::MaxAbsDiff(bnn::BnnPredict(b, x, 10, 1), target);
    EXPECT_LT(diff, previous) << sigma;
    previous = diff;
  }
}

TEST(ConversionTest, RoundTripsAndLayerVariances) {
  const std::vector<size_t> widths = {3, 5, 2};
  const auto dnn = nn::MlpModel::Initialize(widths, 8);
  const std::vector<double> v = {0.04, 0.01};
  const auto b = bnn::BnnFromDnn(dnn, v);
  EXPECT_EQ(bnn::DnnFromBnnMean(b), dnn);
  const auto extracted = bnn::MeanLayerVariances(b);
  for (size_t l = 0; l < v.size(); ++l) EXPECT_NEAR(extracted[l], v[l], 1e-14);
  for (double rho : b.layer(0).bias_rho.values()) {
    EXPECT_NEAR(bnn::Sigma(rho), bnn::kSigmaFloor, 1e-18);
  }

  // Extraction is the plain mean of sigma^2 over each weight matrix.
  const auto trained = BnnModel::Initialize(widths, 1, 0.2);
  BnnModel varied = trained;
  auto rho = varied.mutable_layer(0).weight_rho.data();
  const auto offsets = testing::Uniforms(rho.size(), 5, -1.0, 1.0);
  double expected = 0.0;
  for (size_t i = 0; i < rho.size(); ++i) {
    rho[i] += offsets[i];
    const double s = std::log1p(std::exp(rho[i]));
    expected += s * s;
  }
  expected /= static_cast<double>(rho.size());
  EXPECT_DOUBLE_EQ(bnn::MeanLayerVariances(varied)[0], expected);

  EXPECT_THROW(bnn::BnnFromDnn(dnn, std::vector<double>{-1.0, 0.0}), ArgumentError);
  EXPECT_THROW(bnn::BnnFromDnn(dnn, std::vector<double>{0.0}), ArgumentError);
}

TEST(ConversionTest, ZeroVarianceBehavesLikeDnn) {
  const std::vector<size_t> widths = {3, 7, 2};
  const auto dnn = nn::MlpModel::Initialize(widths, 8);
  const auto b = bnn::BnnFromDnn(dnn, std::vector<double>{0.0, 0.0});
  for (uint64_t s = 0; s < 10; ++s) {
    const auto x = testing::Normals(3, s);
    EXPECT_LE(testing::MaxAbsDiff(
                  bnn::BnnPredict(b, x, 5, s),
                  nn::Softmax(nn::Forward(dnn, Tensor::Vector(x)).logits().data())),
              1e-12);
  }
}

TEST(ConversionTest, LinearModelVarianceIncrease) {
  const nn::MlpModel linear({testing::Layer(1, 3, {0.5, -1.0, 2.0}, {0.3},
                                            nn::Activation::kIdentity)});
  const double sigma = 0.05;
  const auto b = bnn::BnnFromDnn(linear, std::vector<double>{sigma * sigma});
  const std::vector<double> x = {1.0, -2.0, 0.5};
  constexpr int kDraws = 100000;
  double sum = 0.0, sum2 = 0.0;
  for (int d = 0; d < kDraws; ++d) {
    const double z = nn::Forward(bnn::SampleWeights(b, DeriveSeed(11, d)), Tensor::Vector(x))
                         .logits()[0];
    sum += z;
    sum2 += z * z;
  }
  const double mean = sum / kDraws;
  const double var = (sum2 - kDraws * mean * mean) / (kDraws - 1);
  const double expected = (1.0 + 4.0 + 0.25) * sigma * sigma;
  EXPECT_NEAR(var, expected, 0.02 * expected);
}

TEST(CheckpointTest, BnnRoundTripAndMeanLoad) {
  const std::vector<size_t> widths = {3, 4, 2};
  const auto b = BnnModel::Initialize(widths, 12, 0.07);
  EXPECT_EQ(ParseBnn(SerializeBnn(b)), b);
  const auto path = std::filesystem::temp_directory_path() / "bnnint_bnn_test.ckpt";
  SaveBnn(b, path.string());
  EXPECT_TRUE(IsBnnCheckpoint(path.string()));
  EXPECT_EQ(LoadBnn(path.string()), b);
  EXPECT_EQ(LoadAsMlp(path.string()), bnn::DnnFromBnnMean(b));
  std::filesystem::remove(path);
}

}  // namespace
}  // namespace bnnint
