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


#include "bnnint/config.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include "bnnint/error.h"
#include "bnnint/random.h"

namespace bnnint::harness {
namespace {

std::string Trim(const std::string& s) {
  const size_t begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const size_t end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

std::vector<std::string> Split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string part;
  std::istringstream in(s);
  while (std::getline(in, part, sep)) out.push_back(Trim(part));
  return out;
}

[[noreturn]] void Bad(const std::string& key, const std::string& value) {
  throw ArgumentError("invalid value '" + value + "' for " + key);
}

uint64_t ToU64(const std::string& key, const std::string& value) {
  uint64_t out = 0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size()) Bad(key, value);
  return out;
}

size_t ToSize(const std::string& key, const std::string& value) {
  return static_cast<size_t>(ToU64(key, value));
}

double ToDouble(const std::string& key, const std::string& value) {
  double out = 0.0;
  auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || !std::isfinite(out)) {
    Bad(key, value);
  }
  return out;
}

std::vector<size_t> ToSizeList(const std::string& key, const std::string& value) {
  std::vector<size_t> out;
  if (value.empty()) return out;
  for (const std::string& part : Split(value, ',')) out.push_back(ToSize(key, part));
  return out;
}

std::string Num(double v) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", v);
  return buffer;
}

std::string SizeList(const std::vector<size_t>& values, char sep = ',') {
  std::string out;
  for (size_t i = 0; i < values.size(); ++i) {
    if (i > 0) out += sep;
    out += std::to_string(values[i]);
  }
  return out;
}

struct Entry {
  std::string help;
  std::function<void(const std::string&, ExperimentConfig*)> set;
  std::function<std::string(const ExperimentConfig&)> get;
  bool hashed = true;
};

template <typename T>
Entry SizeEntry(std::string help, T ExperimentConfig::*field) {
  return {std::move(help),
          [field](const std::string& v, ExperimentConfig* c) {
            c->*field = ToSize("value", v);
          },
          [field](const ExperimentConfig& c) { return std::to_string(c.*field); }};
}

Entry DoubleEntry(std::string help, double ExperimentConfig::*field) {
  return {std::move(help),
          [field](const std::string& v, ExperimentConfig* c) {
            c->*field = ToDouble("value", v);
          },
          [field](const ExperimentConfig& c) { return Num(c.*field); }};
}

Entry SeedEntry(std::string stage, std::optional<uint64_t> ExperimentConfig::*field) {
  return {"seed of the " + stage + " stage (default derived from seed)",
          [field](const std::string& v, ExperimentConfig* c) {
            c->*field = ToU64("value", v);
          },
          [stage](const ExperimentConfig& c) { return std::to_string(c.Seed(stage)); }};
}

const std::map<std::string, Entry>& Entries() {
  static const std::map<std::string, Entry> entries = [] {
    std::map<std::string, Entry> e;
    e["generator"] = {"synthetic generator: sparse-and or gaussian-blobs",
                      [](const std::string& v, ExperimentConfig* c) {
                        c->data.kind = ParseGeneratorKind(v);
                      },
                      [](const ExperimentConfig& c) { return GeneratorName(c.data.kind); }};
    e["data_csv"] = {"CSV file to use instead of the generator",
                     [](const std::string& v, ExperimentConfig* c) { c->data_csv = v; },
                     [](const ExperimentConfig& c) { return c.data_csv; }};
    e["num_features"] = {"synthetic feature count (<= 20)",
                         [](const std::string& v, ExperimentConfig* c) {
                           c->data.num_features = ToSize("num_features", v);
                         },
                         [](const ExperimentConfig& c) {
                           return std::to_string(c.data.num_features);
                         }};
    e["num_rows"] = {"synthetic row count",
                     [](const std::string& v, ExperimentConfig* c) {
                       c->data.num_rows = ToSize("num_rows", v);
                     },
                     [](const ExperimentConfig& c) { return std::to_string(c.data.num_rows); }};
    e["num_classes"] = {"classes of the gaussian-blobs generator",
                        [](const std::string& v, ExperimentConfig* c) {
                          c->data.num_classes = static_cast<int>(ToSize("num_classes", v));
                        },
                        [](const ExperimentConfig& c) {
                          return std::to_string(c.data.num_classes);
                        }};
    e["separation"] = {"distance between blob centers",
                       [](const std::string& v, ExperimentConfig* c) {
                         c->data.separation = ToDouble("separation", v);
                       },
                       [](const ExperimentConfig& c) { return Num(c.data.separation); }};
    e["planted"] = {"sparse-and concepts, e.g. 0,1;2,3,4",
                    [](const std::string& v, ExperimentConfig* c) {
                      c->data.planted.clear();
                      for (const std::string& group : Split(v, ';')) {
                        c->data.planted.push_back(ToSizeList("planted", group));
                      }
                    },
                    [](const ExperimentConfig& c) {
                      std::string out;
                      for (size_t k = 0; k < c.data.planted.size(); ++k) {
                        if (k > 0) out += ';';
                        out += SizeList(c.data.planted[k]);
                      }
                      return out;
                    }};
    e["planted_weights"] = {"weights of the planted concepts (default all 1)",
                            [](const std::string& v, ExperimentConfig* c) {
                              c->data.planted_weights.clear();
                              if (v.empty()) return;
                              for (const std::string& w : Split(v, ',')) {
                                c->data.planted_weights.push_back(
                                    ToDouble("planted_weights", w));
                              }
                            },
                            [](const ExperimentConfig& c) {
                              std::string out;
                              for (size_t k = 0; k < c.data.planted_weights.size(); ++k) {
                                if (k > 0) out += ',';
                                out += Num(c.data.planted_weights[k]);
                              }
                              return out;
                            }};
    e["gain"] = {"label sharpness of the sparse-and generator",
                 [](const std::string& v, ExperimentConfig* c) {
                   c->data.gain = ToDouble("gain", v);
                 },
                 [](const ExperimentConfig& c) { return Num(c.data.gain); }};
    e["test_fraction"] = DoubleEntry("held-out fraction", &ExperimentConfig::test_fraction);
    e["hidden"] = {"hidden layer widths, e.g. 32,32",
                   [](const std::string& v, ExperimentConfig* c) {
                     c->hidden = ToSizeList("hidden", v);
                   },
                   [](const ExperimentConfig& c) { return SizeList(c.hidden); }};
    e["dnn_lr"] = DoubleEntry("DNN Adam learning rate", &ExperimentConfig::dnn_lr);
    e["dnn_epochs"] = SizeEntry("DNN epochs", &ExperimentConfig::dnn_epochs);
    e["dnn_batch"] = SizeEntry("DNN batch size (0: automatic)", &ExperimentConfig::dnn_batch);
    e["bnn_lr"] = DoubleEntry("BNN Adam learning rate", &ExperimentConfig::bnn_lr);
    e["bnn_epochs"] = SizeEntry("BNN epochs", &ExperimentConfig::bnn_epochs);
    e["bnn_batch"] = SizeEntry("BNN batch size (0: automatic)", &ExperimentConfig::bnn_batch);
    e["bnn_mc_samples"] =
        SizeEntry("weight samples per BNN step", &ExperimentConfig::bnn_mc_samples);
    e["bnn_kl_weight"] = {"KL weight, or auto for 1 / batches",
                          [](const std::string& v, ExperimentConfig* c) {
                            if (v == "auto") {
                              c->bnn_kl_weight.reset();
                            } else {
                              c->bnn_kl_weight = ToDouble("bnn_kl_weight", v);
                            }
                          },
                          [](const ExperimentConfig& c) {
                            return c.bnn_kl_weight ? Num(*c.bnn_kl_weight)
                                                   : std::string("auto");
                          }};
    e["bnn_init_sigma"] =
        DoubleEntry("initial BNN weight sigma", &ExperimentConfig::bnn_init_sigma);
    e["predict_samples"] =
        SizeEntry("networks averaged in BNN prediction", &ExperimentConfig::predict_samples);
    e["matched_accuracy_tolerance"] =
        DoubleEntry("allowed train-accuracy gap of matched checkpoints",
                    &ExperimentConfig::matched_accuracy_tolerance);
    e["tau"] = DoubleEntry("reference-value distance", &ExperimentConfig::tau);
    e["n_active"] = SizeEntry("active variables (0: automatic)", &ExperimentConfig::n_active);
    e["salient_threshold"] =
        DoubleEntry("salient ratio to the largest |I|", &ExperimentConfig::salient_threshold);
    e["strength_samples"] =
        SizeEntry("samples for order strength", &ExperimentConfig::strength_samples);
    e["noise_sigma"] = DoubleEntry("input-noise sigma", &ExperimentConfig::noise_sigma);
    e["noise_draws"] = SizeEntry("input-noise draws", &ExperimentConfig::noise_draws);
    e["weight_draws"] = SizeEntry("BNN weight draws", &ExperimentConfig::weight_draws);
    e["metric_samples"] =
        SizeEntry("samples for variance/stability", &ExperimentConfig::metric_samples);
    e["surrogate_steps"] = SizeEntry("optimizer steps per layer",
                                     &ExperimentConfig::surrogate_steps);
    e["surrogate_lr"] = DoubleEntry("surrogate learning rate", &ExperimentConfig::surrogate_lr);
    e["surrogate_draws"] =
        SizeEntry("MC draws per KL estimate", &ExperimentConfig::surrogate_draws);
    e["surrogate_samples"] =
        SizeEntry("inputs in the surrogate fit", &ExperimentConfig::surrogate_samples);
    e["pgd_eps"] = DoubleEntry("PGD l-infinity budget", &ExperimentConfig::pgd_eps);
    e["pgd_steps"] = SizeEntry("PGD steps", &ExperimentConfig::pgd_steps);
    e["pgd_step"] = DoubleEntry("PGD step size", &ExperimentConfig::pgd_step);
    e["attack_samples"] =
        SizeEntry("test rows attacked (0: all)", &ExperimentConfig::attack_samples);
    e["oracle_draws"] = SizeEntry("MC draws per oracle check", &ExperimentConfig::oracle_draws);
    e["seed"] = {"master seed",
                 [](const std::string& v, ExperimentConfig* c) { c->seed = ToU64("seed", v); },
                 [](const ExperimentConfig& c) { return std::to_string(c.seed); }};
    e["seed_data"] = SeedEntry("data", &ExperimentConfig::seed_data);
    e["seed_dnn"] = SeedEntry("dnn", &ExperimentConfig::seed_dnn);
    e["seed_bnn"] = SeedEntry("bnn", &ExperimentConfig::seed_bnn);
    e["seed_interaction"] = SeedEntry("interaction", &ExperimentConfig::seed_interaction);
    e["seed_metrics"] = SeedEntry("metrics", &ExperimentConfig::seed_metrics);
    e["seed_surrogate"] = SeedEntry("surrogate", &ExperimentConfig::seed_surrogate);
    e["seed_attack"] = SeedEntry("attack", &ExperimentConfig::seed_attack);
    e["seed_oracle"] = SeedEntry("oracle", &ExperimentConfig::seed_oracle);
    e["output_dir"] = {"directory for reports",
                       [](const std::string& v, ExperimentConfig* c) { c->output_dir = v; },
                       [](const ExperimentConfig& c) { return c.output_dir; }, false};
    e["workers"] = {"worker threads (0: BNNINT_WORKERS or hardware)",
                    [](const std::string& v, ExperimentConfig* c) {
                      c->workers = ToSize("workers", v);
                    },
                    [](const ExperimentConfig& c) { return std::to_string(c.workers); },
                    false};
    return e;
  }();
  return entries;
}

const std::vector<std::string>& StageNames() {
  static const std::vector<std::string> names = {
      "data", "dnn", "bnn", "interaction", "metrics", "surrogate", "attack", "oracle"};
  return names;
}

}  // namespace

uint64_t ExperimentConfig::Seed(const std::string& stage) const {
  const std::map<std::string, const std::optional<uint64_t>*> fields = {
      {"data", &seed_data},       {"dnn", &seed_dnn},
      {"bnn", &seed_bnn},         {"interaction", &seed_interaction},
      {"metrics", &seed_metrics}, {"surrogate", &seed_surrogate},
      {"attack", &seed_attack},   {"oracle", &seed_oracle}};
  const auto it = fields.find(stage);
  if (it == fields.end()) throw ArgumentError("unknown stage '" + stage + "'");
  if (it->second->has_value()) return **it->second;
  const auto& names = StageNames();
  const size_t index = static_cast<size_t>(
      std::find(names.begin(), names.end(), stage) - names.begin());
  return DeriveSeed(seed, 0x57a9e, index) >> 1;
}

const std::vector<ConfigKey>& ConfigKeys() {
  static const std::vector<ConfigKey> keys = [] {
    std::vector<ConfigKey> out;
    for (const auto& [name, entry] : Entries()) out.push_back({name, entry.help});
    return out;
  }();
  return keys;
}

void SetConfigValue(const std::string& key, const std::string& value,
                    ExperimentConfig* config) {
  const auto it = Entries().find(key);
  if (it == Entries().end()) throw ArgumentError("unknown config key '" + key + "'");
  try {
    it->second.set(Trim(value), config);
  } catch (const ArgumentError& e) {
    throw ArgumentError("invalid value '" + value + "' for " + key + ": " + e.what());
  }
}

std::string GetConfigValue(const std::string& key, const ExperimentConfig& config) {
  const auto it = Entries().find(key);
  if (it == Entries().end()) throw ArgumentError("unknown config key '" + key + "'");
  return it->second.get(config);
}

ExperimentConfig ParseConfig(const std::string& text) {
  ExperimentConfig config;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string trimmed = Trim(line.substr(0, line.find('#')));
    if (trimmed.empty()) continue;
    const size_t eq = trimmed.find('=');
    if (eq == std::string::npos) throw ParseError("expected key = value", line_no);
    const std::string key = Trim(trimmed.substr(0, eq));
    const std::string value = Trim(trimmed.substr(eq + 1));
    try {
      SetConfigValue(key, value, &config);
    } catch (const ArgumentError& e) {
      throw ParseError(e.what(), line_no);
    }
  }
  return config;
}

ExperimentConfig LoadConfig(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return ParseConfig(buffer.str());
}

void ValidateConfig(const ExperimentConfig& c) {
  auto require = [](bool ok, const std::string& what) {
    if (!ok) throw ArgumentError(what);
  };
  require(c.test_fraction > 0.0 && c.test_fraction < 1.0, "test_fraction must lie in (0, 1)");
  require(c.dnn_lr > 0.0 && c.bnn_lr > 0.0, "learning rates must be positive");
  require(c.dnn_epochs >= 1 && c.bnn_epochs >= 1, "epochs must be >= 1");
  require(c.bnn_mc_samples >= 1, "bnn_mc_samples must be >= 1");
  require(!c.bnn_kl_weight || *c.bnn_kl_weight >= 0.0, "bnn_kl_weight must be >= 0");
  require(c.bnn_init_sigma > 0.0, "bnn_init_sigma must be positive");
  require(c.predict_samples >= 1, "predict_samples must be >= 1");
  require(c.tau > 0.0, "tau must be positive");
  require(c.n_active <= 20, "n_active must be <= 20");
  require(c.salient_threshold > 0.0 && c.salient_threshold <= 1.0,
          "salient_threshold must lie in (0, 1]");
  require(c.noise_sigma > 0.0 && c.noise_sigma < c.tau, "noise_sigma must lie in (0, tau)");
  require(c.noise_draws >= 2 && c.weight_draws >= 2, "need at least 2 draws");
  require(c.surrogate_draws >= 2, "surrogate_draws must be >= 2");
  require(c.strength_samples >= 1 && c.metric_samples >= 1 && c.surrogate_samples >= 1,
          "sample counts must be >= 1");
  require(c.pgd_eps >= 0.0 && c.pgd_step >= 0.0, "PGD settings must be non-negative");
  for (size_t w : c.hidden) require(w >= 1, "hidden widths must be positive");
}

std::string CanonicalConfig(const ExperimentConfig& config) {
  std::string out;
  for (const auto& [name, entry] : Entries()) {
    out += name + " = " + entry.get(config) + "\n";
  }
  return out;
}

std::string ConfigHash(const ExperimentConfig& config) {
  uint64_t hash = 0xcbf29ce484222325ULL;
  for (const auto& [name, entry] : Entries()) {
    if (!entry.hashed) continue;
    const std::string line = name + "=" + entry.get(config) + "\n";
    for (unsigned char ch : line) {
      hash ^= ch;
      hash *= 0x100000001b3ULL;
    }
  }
  char buffer[20];
  std::snprintf(buffer, sizeof(buffer), "%016llx", static_cast<unsigned long long>(hash));
  return buffer;
}

}  // namespace bnnint::harness
