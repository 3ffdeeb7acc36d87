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

#include "bnnint/dataset.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <set>
#include <sstream>

#include "bnnint/error.h"
#include "bnnint/random.h"

namespace bnnint {
namespace {

constexpr size_t kMaxFeatures = 20;

std::string Trim(const std::string& s) {
  size_t begin = 0;
  size_t end = s.size();
  while (begin < end && std::isspace(static_cast<unsigned char>(s[begin]))) ++begin;
  while (end > begin && std::isspace(static_cast<unsigned char>(s[end - 1]))) --end;
  return s.substr(begin, end - begin);
}

std::vector<std::string> SplitCells(const std::string& line) {
  std::vector<std::string> cells;
  std::stringstream stream(line);
  std::string cell;
  while (std::getline(stream, cell, ',')) cells.push_back(Trim(cell));
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

bool ParseDouble(const std::string& text, double* value) {
  if (text.empty()) return false;
  const char* begin = text.data();
  if (*begin == '+') ++begin;
  auto [ptr, ec] = std::from_chars(begin, text.data() + text.size(), *value);
  return ec == std::errc() && ptr == text.data() + text.size() &&
         std::isfinite(*value);
}

}  // namespace

std::vector<double> Dataset::FeatureMeans() const {
  return ComputeNormalization(features).means;
}

Dataset Dataset::Subset(const std::vector<size_t>& rows) const {
  Dataset out;
  const size_t n = num_features();
  std::vector<double> values;
  values.reserve(rows.size() * n);
  for (size_t r : rows) {
    if (r >= this->rows()) throw ArgumentError("subset row out of range");
    auto row = features.row(r);
    values.insert(values.end(), row.begin(), row.end());
    out.labels.push_back(labels[r]);
  }
  out.features = Tensor({rows.size(), n}, std::move(values));
  out.num_classes = num_classes;
  out.column_means = column_means;
  out.column_stddevs = column_stddevs;
  out.split = split;
  out.planted_concepts = planted_concepts;
  return out;
}

NormalizationStats ComputeNormalization(const Tensor& features) {
  const size_t rows = features.rows();
  const size_t cols = features.cols();
  NormalizationStats stats;
  stats.means.assign(cols, 0.0);
  stats.stddevs.assign(cols, 0.0);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) stats.means[c] += features.at(r, c);
  }
  for (double& m : stats.means) m /= static_cast<double>(rows);
  for (size_t r = 0; r < rows; ++r) {
    for (size_t c = 0; c < cols; ++c) {
      const double d = features.at(r, c) - stats.means[c];
      stats.stddevs[c] += d * d;
    }
  }
  for (double& s : stats.stddevs) {
    s = std::sqrt(s / static_cast<double>(rows));
    if (!(s > 0.0)) s = 1.0;
  }
  return stats;
}

void Normalize(const NormalizationStats& stats, Dataset* dataset) {
  const size_t cols = dataset->num_features();
  if (stats.means.size() != cols || stats.stddevs.size() != cols) {
    throw ShapeError("normalization stats do not match feature count");
  }
  for (size_t r = 0; r < dataset->rows(); ++r) {
    auto row = dataset->features.row(r);
    for (size_t c = 0; c < cols; ++c) {
      row[c] = (row[c] - stats.means[c]) / stats.stddevs[c];
    }
  }
  dataset->column_means = stats.means;
  dataset->column_stddevs = stats.stddevs;
}

std::pair<Dataset, Dataset> SplitTrainTest(const Dataset& raw,
                                           double test_fraction,
                                           uint64_t seed) {
  if (!(test_fraction > 0.0 && test_fraction < 1.0)) {
    throw ArgumentError("test fraction must lie in (0, 1)");
  }
  std::vector<size_t> order(raw.rows());
  std::iota(order.begin(), order.end(), 0);
  Rng rng = MakeRng(DeriveSeed(seed, 0x5911));
  std::shuffle(order.begin(), order.end(), rng);
  const size_t train_rows = static_cast<size_t>(
      std::llround(static_cast<double>(raw.rows()) * (1.0 - test_fraction)));
  if (train_rows == 0 || train_rows == raw.rows()) {
    throw ArgumentError("split leaves an empty train or test set");
  }
  std::vector<size_t> train_idx(order.begin(), order.begin() + train_rows);
  std::vector<size_t> test_idx(order.begin() + train_rows, order.end());
  Dataset train = raw.Subset(train_idx);
  Dataset test = raw.Subset(test_idx);
  train.split = "train";
  test.split = "test";
  const NormalizationStats stats = ComputeNormalization(train.features);
  Normalize(stats, &train);
  Normalize(stats, &test);
  return {std::move(train), std::move(test)};
}

GeneratorKind ParseGeneratorKind(const std::string& name) {
  if (name == "gaussian-blobs") return GeneratorKind::kGaussianBlobs;
  if (name == "sparse-and") return GeneratorKind::kSparseAnd;
  throw ArgumentError("unknown generator '" + name +
                      "' (expected gaussian-blobs or sparse-and)");
}

std::string GeneratorName(GeneratorKind kind) {
  return kind == GeneratorKind::kGaussianBlobs ? "gaussian-blobs" : "sparse-and";
}

Dataset GenerateSynthetic(const SyntheticSpec& spec, uint64_t seed) {
  const size_t n = spec.num_features;
  if (n == 0 || n > kMaxFeatures) {
    throw ArgumentError("synthetic data needs 1..20 features");
  }
  if (spec.num_rows < 2) throw ArgumentError("need at least 2 rows");
  Rng rng = MakeRng(DeriveSeed(seed, 0xda7a));
  std::normal_distribution<double> normal(0.0, 1.0);
  Dataset data;
  data.features = Tensor({spec.num_rows, n});
  data.labels.resize(spec.num_rows);

  if (spec.kind == GeneratorKind::kGaussianBlobs) {
    if (spec.num_classes < 2) throw ArgumentError("blobs need >= 2 classes");
    if (!(spec.separation >= 0.0)) throw ArgumentError("negative separation");
    std::vector<std::vector<double>> centers(spec.num_classes);
    for (auto& center : centers) {
      double norm = 0.0;
      center.resize(n);
      for (double& c : center) {
        c = normal(rng);
        norm += c * c;
      }
      norm = std::sqrt(norm);
      for (double& c : center) c *= 0.5 * spec.separation / norm;
    }
    std::uniform_int_distribution<int> pick(0, spec.num_classes - 1);
    for (size_t r = 0; r < spec.num_rows; ++r) {
      const int label = pick(rng);
      data.labels[r] = label;
      for (size_t c = 0; c < n; ++c) {
        data.features.at(r, c) = centers[label][c] + normal(rng);
      }
    }
    data.num_classes = spec.num_classes;
    return data;
  }

  if (spec.planted.empty()) throw ArgumentError("sparse-AND needs planted concepts");
  std::set<std::vector<size_t>> seen;
  for (const auto& concept_set : spec.planted) {
    if (concept_set.empty()) throw ArgumentError("empty planted concept");
    std::vector<size_t> sorted = concept_set;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) {
      throw ArgumentError("planted concept repeats a feature");
    }
    if (sorted.back() >= n) throw ArgumentError("planted feature index out of range");
    if (!seen.insert(sorted).second) throw ArgumentError("duplicate planted concept");
  }
  std::vector<double> weights = spec.planted_weights;
  if (weights.empty()) weights.assign(spec.planted.size(), 1.0);
  if (weights.size() != spec.planted.size()) {
    throw ArgumentError("planted_weights must match planted concepts");
  }
  std::uniform_real_distribution<double> uniform(0.0, 1.0);
  for (size_t r = 0; r < spec.num_rows; ++r) {
    auto row = data.features.row(r);
    for (double& v : row) v = normal(rng);
    double score = 0.0;
    for (size_t k = 0; k < spec.planted.size(); ++k) {
      double product = weights[k];
      for (size_t i : spec.planted[k]) product *= row[i];
      score += product;
    }
    const double p = 1.0 / (1.0 + std::exp(-spec.gain * score));
    data.labels[r] = uniform(rng) < p ? 1 : 0;
  }
  data.num_classes = 2;
  for (const auto& concept_set : spec.planted) {
    std::vector<size_t> sorted = concept_set;
    std::sort(sorted.begin(), sorted.end());
    data.planted_concepts.push_back(std::move(sorted));
  }
  return data;
}

Dataset ReadCsv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::string line;
  size_t line_no = 0;
  std::vector<std::string> header;
  while (std::getline(in, line)) {
    ++line_no;
    if (!Trim(line).empty()) {
      header = SplitCells(Trim(line));
      break;
    }
  }
  if (header.empty()) throw ParseError("empty file " + path, line_no);
  if (header.size() < 2) {
    throw ParseError("need at least one feature column and a label", line_no);
  }
  const size_t n = header.size() - 1;
  std::vector<double> values;
  std::vector<int> labels;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line);
    if (trimmed.empty()) continue;
    std::vector<std::string> cells = SplitCells(trimmed);
    if (cells.size() != header.size()) {
      throw ParseError("expected " + std::to_string(header.size()) +
                           " cells, found " + std::to_string(cells.size()),
                       line_no);
    }
    for (size_t c = 0; c < n; ++c) {
      double v = 0.0;
      if (!ParseDouble(cells[c], &v)) {
        throw ParseError("non-numeric cell '" + cells[c] + "'", line_no);
      }
      values.push_back(v);
    }
    int label = -1;
    const std::string& cell = cells.back();
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), label);
    if (ec != std::errc() || ptr != cell.data() + cell.size() || label < 0) {
      throw ParseError("unknown label '" + cell + "'", line_no);
    }
    labels.push_back(label);
  }
  if (labels.empty()) throw ParseError("no data rows in " + path, line_no);
  Dataset data;
  data.features = Tensor({labels.size(), n}, std::move(values));
  data.num_classes = *std::max_element(labels.begin(), labels.end()) + 1;
  if (data.num_classes < 2) data.num_classes = 2;
  data.labels = std::move(labels);
  return data;
}

Dataset IngestCsv(const std::string& path) {
  Dataset data = ReadCsv(path);
  Normalize(ComputeNormalization(data.features), &data);
  return data;
}

void WriteCsv(const Dataset& dataset, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw ArgumentError("cannot write " + path);
  const size_t n = dataset.num_features();
  for (size_t c = 0; c < n; ++c) out << 'f' << c << ',';
  out << "label\n";
  char buffer[32];
  for (size_t r = 0; r < dataset.rows(); ++r) {
    for (size_t c = 0; c < n; ++c) {
      std::snprintf(buffer, sizeof(buffer), "%.17g", dataset.features.at(r, c));
      out << buffer << ',';
    }
    out << dataset.labels[r] << '\n';
  }
}

}  // namespace bnnint
