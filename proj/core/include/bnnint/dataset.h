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

// Labeled classification data, synthetic generators and CSV ingestion.

#ifndef BNNINT_DATASET_H_
#define BNNINT_DATASET_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bnnint/tensor.h"

namespace bnnint {

struct Dataset {
  Tensor features;  // rows x num_features
  std::vector<int> labels;
  int num_classes = 0;
  // Statistics the features were normalized with (empty if raw).
  std::vector<double> column_means;
  std::vector<double> column_stddevs;
  std::string split = "train";
  // Ground-truth concepts of the sparse-AND generator, as feature indices.
  std::vector<std::vector<size_t>> planted_concepts;

  size_t rows() const { return labels.size(); }
  size_t num_features() const { return features.cols(); }
  // Column means of the current feature values.
  std::vector<double> FeatureMeans() const;
  // Copy of the selected rows (statistics and planted concepts carried over).
  Dataset Subset(const std::vector<size_t>& rows) const;
};

struct NormalizationStats {
  std::vector<double> means;
  std::vector<double> stddevs;  // population; a constant column keeps 1
};

NormalizationStats ComputeNormalization(const Tensor& features);

// x <- (x - mean) / stddev, recording the stats on the dataset.
void Normalize(const NormalizationStats& stats, Dataset* dataset);

// Seeded shuffle, then the first round(rows * (1 - test_fraction)) rows form
// the train split. Both splits are normalized with train statistics.
std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& raw,
                                           double test_fraction,
                                           uint64_t seed);

enum class GeneratorKind { kGaussianBlobs, kSparseAnd };

GeneratorKind ParseGeneratorKind(const std::string& name);
std::string GeneratorName(GeneratorKind kind);

struct SyntheticSpec {
  GeneratorKind kind = GeneratorKind::kSparseAnd;
  size_t num_features = 10;
  size_t num_rows = 2000;
  // Gaussian blobs: unit-variance clusters around centers drawn at distance
  // separation / 2 from the origin.
  int num_classes = 2;
  double separation = 6.0;
  // Sparse-AND: features are standard normal. Concept k contributes
  // weight_k * prod_{i in S_k} x_i, which is positive exactly when the signs
  // of its features agree (an AND over sign literals). The label is drawn
  // from Bernoulli(sigmoid(gain * sum_k weight_k prod_{i in S_k} x_i)).
  std::vector<std::vector<size_t>> planted = {{0, 1}, {2, 3, 4}};
  std::vector<double> planted_weights;  // empty: all 1
  double gain = 4.0;
};

// Raw (unnormalized) samples. Throws ArgumentError on an invalid spec,
// including num_features > 20.
Dataset GenerateSynthetic(const SyntheticSpec& spec, uint64_t seed);

// Header row, numeric feature columns, last column a non-negative integer
// label. Returns raw values; throws ParseError with the line number.
Dataset ReadCsv(const std::string& path);

// ReadCsv followed by normalization with the file's own statistics.
Dataset IngestCsv(const std::string& path);

// Writes features and labels with a header f0..f{n-1},label. Values are
// printed with 17 significant digits so ReadCsv restores them exactly.
void WriteCsv(const Dataset& dataset, const std::string& path);

}  // namespace bnnint

#endif  // BNNINT_DATASET_H_
