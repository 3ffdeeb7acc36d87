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


#include "bnnint/checkpoint.h"

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <utility>
#include <vector>

#include "bnnint/error.h"

namespace bnnint {
namespace {

constexpr char kMlpMagic[] = "bnnint-mlp";
constexpr char kBnnMagic[] = "bnnint-bnn";
constexpr char kVersion[] = "v1";

void AppendValues(const char* key, const Tensor& t, std::string* out) {
  *out += key;
  char buffer[48];
  for (double v : t.data()) {
    std::snprintf(buffer, sizeof(buffer), " %a", v);
    *out += buffer;
  }
  *out += '\n';
}

const char* ActivationName(nn::Activation a) {
  return a == nn::Activation::kRelu ? "relu" : "identity";
}

// Line-oriented reader that tracks line numbers for diagnostics.
class Reader {
 public:
  explicit Reader(const std::string& text) : stream_(text) {}

  std::vector<std::string> NextLine() {
    std::string line;
    while (std::getline(stream_, line)) {
      ++line_;
      std::istringstream tokens(line);
      std::vector<std::string> out;
      std::string token;
      while (tokens >> token) out.push_back(token);
      if (!out.empty()) return out;
    }
    throw ParseError("unexpected end of checkpoint", line_);
  }

  [[noreturn]] void Fail(const std::string& what) const {
    throw ParseError(what, line_);
  }

  size_t ParseCount(const std::string& token) const {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(token.c_str(), &end, 10);
    if (end == token.c_str() || *end != '\0' || v == 0) {
      Fail("expected a positive integer, got '" + token + "'");
    }
    return static_cast<size_t>(v);
  }

  Tensor ReadValues(const char* key, std::vector<size_t> shape) {
    const std::vector<std::string> tokens = NextLine();
    if (tokens[0] != key) Fail(std::string("expected '") + key + "'");
    size_t expected = 1;
    for (size_t e : shape) expected *= e;
    if (tokens.size() - 1 != expected) {
      Fail(std::string("'") + key + "' has wrong number of values");
    }
    std::vector<double> values;
    values.reserve(expected);
    for (size_t i = 1; i < tokens.size(); ++i) {
      char* end = nullptr;
      const double v = std::strtod(tokens[i].c_str(), &end);
      if (end == tokens[i].c_str() || *end != '\0') {
        Fail("malformed number '" + tokens[i] + "'");
      }
      values.push_back(v);
    }
    return Tensor(std::move(shape), std::move(values));
  }

 private:
  std::istringstream stream_;
  size_t line_ = 0;
};

struct LayerHeader {
  size_t in = 0;
  size_t out = 0;
  nn::Activation activation = nn::Activation::kRelu;
};

size_t ReadPreamble(Reader& reader, const char* magic) {
  std::vector<std::string> tokens = reader.NextLine();
  if (tokens.size() != 2 || tokens[0] != magic) {
    reader.Fail(std::string("not a ") + magic + " checkpoint");
  }
  if (tokens[1] != kVersion) reader.Fail("unsupported version " + tokens[1]);
  tokens = reader.NextLine();
  if (tokens.size() != 2 || tokens[0] != "layers") reader.Fail("expected 'layers'");
  return reader.ParseCount(tokens[1]);
}

LayerHeader ReadLayerHeader(Reader& reader) {
  const std::vector<std::string> tokens = reader.NextLine();
  if (tokens.size() != 4 || tokens[0] != "layer") reader.Fail("expected 'layer'");
  LayerHeader h;
  h.in = reader.ParseCount(tokens[1]);
  h.out = reader.ParseCount(tokens[2]);
  if (tokens[3] == "relu") {
    h.activation = nn::Activation::kRelu;
  } else if (tokens[3] == "identity") {
    h.activation = nn::Activation::kIdentity;
  } else {
    reader.Fail("unknown activation '" + tokens[3] + "'");
  }
  return h;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& text, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ArgumentError("cannot write " + path);
  out << text;
}

}  // namespace

std::string SerializeMlp(const nn::MlpModel& model) {
  std::string out = std::string(kMlpMagic) + " " + kVersion + "\n";
  out += "layers " + std::to_string(model.num_layers()) + "\n";
  for (const nn::DenseLayer& layer : model.layers()) {
    out += "layer " + std::to_string(layer.in_dim()) + " " +
           std::to_string(layer.out_dim()) + " " +
           ActivationName(layer.activation) + "\n";
    AppendValues("weight", layer.weight, &out);
    AppendValues("bias", layer.bias, &out);
  }
  return out;
}

std::string SerializeBnn(const bnn::BnnModel& model) {
  std::string out = std::string(kBnnMagic) + " " + kVersion + "\n";
  out += "layers " + std::to_string(model.num_layers()) + "\n";
  for (const bnn::MeanFieldLayer& layer : model.layers()) {
    out += "layer " + std::to_string(layer.in_dim()) + " " +
           std::to_string(layer.out_dim()) + " " +
           ActivationName(layer.activation) + "\n";
    AppendValues("weight_mean", layer.weight_mean, &out);
    AppendValues("weight_rho", layer.weight_rho, &out);
    AppendValues("bias_mean", layer.bias_mean, &out);
    AppendValues("bias_rho", layer.bias_rho, &out);
  }
  return out;
}

nn::MlpModel ParseMlp(const std::string& text) {
  Reader reader(text);
  const size_t num_layers = ReadPreamble(reader, kMlpMagic);
  std::vector<nn::DenseLayer> layers;
  for (size_t l = 0; l < num_layers; ++l) {
    const LayerHeader h = ReadLayerHeader(reader);
    nn::DenseLayer layer;
    layer.weight = reader.ReadValues("weight", {h.out, h.in});
    layer.bias = reader.ReadValues("bias", {h.out});
    layer.activation = h.activation;
    layers.push_back(std::move(layer));
  }
  try {
    return nn::MlpModel(std::move(layers));
  } catch (const ShapeError& e) {
    throw ParseError(std::string("invalid model: ") + e.what());
  }
}

bnn::BnnModel ParseBnn(const std::string& text) {
  Reader reader(text);
  const size_t num_layers = ReadPreamble(reader, kBnnMagic);
  std::vector<bnn::MeanFieldLayer> layers;
  for (size_t l = 0; l < num_layers; ++l) {
    const LayerHeader h = ReadLayerHeader(reader);
    bnn::MeanFieldLayer layer;
    layer.weight_mean = reader.ReadValues("weight_mean", {h.out, h.in});
    layer.weight_rho = reader.ReadValues("weight_rho", {h.out, h.in});
    layer.bias_mean = reader.ReadValues("bias_mean", {h.out});
    layer.bias_rho = reader.ReadValues("bias_rho", {h.out});
    layer.activation = h.activation;
    layers.push_back(std::move(layer));
  }
  try {
    return bnn::BnnModel(std::move(layers));
  } catch (const ShapeError& e) {
    throw ParseError(std::string("invalid model: ") + e.what());
  }
}

void SaveMlp(const nn::MlpModel& model, const std::string& path) {
  WriteFile(SerializeMlp(model), path);
}

void SaveBnn(const bnn::BnnModel& model, const std::string& path) {
  WriteFile(SerializeBnn(model), path);
}

nn::MlpModel LoadMlp(const std::string& path) { return ParseMlp(ReadFile(path)); }

bnn::BnnModel LoadBnn(const std::string& path) { return ParseBnn(ReadFile(path)); }

bool IsBnnCheckpoint(const std::string& path) {
  return ReadFile(path).rfind(kBnnMagic, 0) == 0;
}

nn::MlpModel LoadAsMlp(const std::string& path) {
  const std::string text = ReadFile(path);
  if (text.rfind(kBnnMagic, 0) == 0) return bnn::DnnFromBnnMean(ParseBnn(text));
  return ParseMlp(text);
}

}  // namespace bnnint
