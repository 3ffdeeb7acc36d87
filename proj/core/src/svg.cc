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


#include "bnnint/svg.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <limits>
#include <map>

#include "bnnint/error.h"
#include "bnnint/report.h"

namespace bnnint::plot {
namespace {

constexpr double kWidth = 640.0;
constexpr double kHeight = 400.0;
constexpr double kLeft = 70.0;
constexpr double kRight = 150.0;
constexpr double kTop = 40.0;
constexpr double kBottom = 50.0;

const char* const kColors[] = {"#1f77b4", "#d62728", "#2ca02c",
                               "#9467bd", "#ff7f0e", "#8c564b"};

std::string Fixed(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.2f", v);
  return buffer;
}

std::string Short(double v) {
  char buffer[32];
  std::snprintf(buffer, sizeof(buffer), "%.3g", v);
  return buffer;
}

std::string Escape(const std::string& text) {
  std::string out;
  for (char c : text) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      default: out += c;
    }
  }
  return out;
}

struct Range {
  double lo = std::numeric_limits<double>::infinity();
  double hi = -std::numeric_limits<double>::infinity();

  void Add(double v) {
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  bool empty() const { return !(lo <= hi); }
  void Pad() {
    if (empty()) {
      lo = 0.0;
      hi = 1.0;
    } else if (hi == lo) {
      lo -= 0.5;
      hi += 0.5;
    }
  }
};

bool Usable(double y, bool log_y) { return std::isfinite(y) && (!log_y || y > 0.0); }

}  // namespace

std::string RenderSvg(const PlotSpec& spec) {
  Range xr, yr;
  for (const Series& s : spec.series) {
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !Usable(s.y[i], spec.log_y)) continue;
      xr.Add(s.x[i]);
      yr.Add(spec.log_y ? std::log10(s.y[i]) : s.y[i]);
    }
  }
  if (spec.has_reference && Usable(spec.reference_y, spec.log_y)) {
    yr.Add(spec.log_y ? std::log10(spec.reference_y) : spec.reference_y);
  }
  xr.Pad();
  yr.Pad();

  const double plot_w = kWidth - kLeft - kRight;
  const double plot_h = kHeight - kTop - kBottom;
  auto px = [&](double x) { return kLeft + (x - xr.lo) / (xr.hi - xr.lo) * plot_w; };
  auto py = [&](double y) {
    return kTop + plot_h - (y - yr.lo) / (yr.hi - yr.lo) * plot_h;
  };

  std::string out;
  out += "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" + Fixed(kWidth) +
         "\" height=\"" + Fixed(kHeight) + "\" viewBox=\"0 0 " + Fixed(kWidth) + " " +
         Fixed(kHeight) + "\">\n";
  out += "<title>" + Escape(spec.title) + "</title>\n";
  out += "<desc>" + Escape(spec.description) + "</desc>\n";
  out += "<rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n";
  out += "<text x=\"" + Fixed(kLeft) + "\" y=\"24\" font-family=\"sans-serif\" "
         "font-size=\"15\">" + Escape(spec.title) + "</text>\n";
  out += "<rect x=\"" + Fixed(kLeft) + "\" y=\"" + Fixed(kTop) + "\" width=\"" +
         Fixed(plot_w) + "\" height=\"" + Fixed(plot_h) +
         "\" fill=\"none\" stroke=\"black\"/>\n";

  constexpr int kTicks = 5;
  for (int t = 0; t <= kTicks; ++t) {
    const double fy = yr.lo + (yr.hi - yr.lo) * t / kTicks;
    const double y = py(fy);
    const double label = spec.log_y ? std::pow(10.0, fy) : fy;
    out += "<line x1=\"" + Fixed(kLeft - 4) + "\" y1=\"" + Fixed(y) + "\" x2=\"" +
           Fixed(kLeft) + "\" y2=\"" + Fixed(y) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + Fixed(kLeft - 6) + "\" y=\"" + Fixed(y + 4) +
           "\" text-anchor=\"end\" font-family=\"sans-serif\" font-size=\"10\">" +
           Short(label) + "</text>\n";
    const double fx = xr.lo + (xr.hi - xr.lo) * t / kTicks;
    const double x = px(fx);
    out += "<line x1=\"" + Fixed(x) + "\" y1=\"" + Fixed(kTop + plot_h) + "\" x2=\"" +
           Fixed(x) + "\" y2=\"" + Fixed(kTop + plot_h + 4) + "\" stroke=\"black\"/>\n";
    out += "<text x=\"" + Fixed(x) + "\" y=\"" + Fixed(kTop + plot_h + 16) +
           "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"10\">" +
           Short(fx) + "</text>\n";
  }
  out += "<text x=\"" + Fixed(kLeft + plot_w / 2) + "\" y=\"" + Fixed(kHeight - 12) +
         "\" text-anchor=\"middle\" font-family=\"sans-serif\" font-size=\"12\">" +
         Escape(spec.x_label) + "</text>\n";
  out += "<text transform=\"translate(16 " + Fixed(kTop + plot_h / 2) +
         ") rotate(-90)\" text-anchor=\"middle\" font-family=\"sans-serif\" "
         "font-size=\"12\">" +
         Escape(spec.y_label + (spec.log_y ? " (log scale)" : "")) + "</text>\n";

  if (spec.has_reference && Usable(spec.reference_y, spec.log_y)) {
    const double y = py(spec.log_y ? std::log10(spec.reference_y) : spec.reference_y);
    out += "<line x1=\"" + Fixed(kLeft) + "\" y1=\"" + Fixed(y) + "\" x2=\"" +
           Fixed(kLeft + plot_w) + "\" y2=\"" + Fixed(y) +
           "\" stroke=\"gray\" stroke-dasharray=\"4 3\"/>\n";
  }

  for (size_t k = 0; k < spec.series.size(); ++k) {
    const Series& s = spec.series[k];
    const std::string color = kColors[k % std::size(kColors)];
    std::string points;
    for (size_t i = 0; i < s.x.size() && i < s.y.size(); ++i) {
      if (!std::isfinite(s.x[i]) || !Usable(s.y[i], spec.log_y)) continue;
      const double y = spec.log_y ? std::log10(s.y[i]) : s.y[i];
      if (!points.empty()) points += ' ';
      points += Fixed(px(s.x[i])) + "," + Fixed(py(y));
    }
    if (!points.empty()) {
      out += "<polyline fill=\"none\" stroke=\"" + color +
             "\" stroke-width=\"1.5\" points=\"" + points + "\"/>\n";
    }
    const double ly = kTop + 14.0 + 18.0 * static_cast<double>(k);
    out += "<line x1=\"" + Fixed(kLeft + plot_w + 10) + "\" y1=\"" + Fixed(ly) +
           "\" x2=\"" + Fixed(kLeft + plot_w + 30) + "\" y2=\"" + Fixed(ly) +
           "\" stroke=\"" + color + "\" stroke-width=\"2\"/>\n";
    out += "<text x=\"" + Fixed(kLeft + plot_w + 34) + "\" y=\"" + Fixed(ly + 4) +
           "\" font-family=\"sans-serif\" font-size=\"11\">" + Escape(s.label) +
           "</text>\n";
  }
  out += "</svg>\n";
  return out;
}

const std::vector<std::string>& PlotInputs() {
  static const std::vector<std::string> inputs = {"sparsity.csv", "metrics.csv",
                                                  "strength.csv"};
  return inputs;
}

std::vector<std::string> EmitPlots(const std::string& bundle_dir) {
  const std::filesystem::path dir(bundle_dir);
  std::string missing;
  for (const std::string& name : PlotInputs()) {
    if (!report::FileExists((dir / name).string())) {
      missing += (missing.empty() ? "" : ", ") + (dir / name).string();
    }
  }
  if (!missing.empty()) throw ArgumentError("missing plot inputs: " + missing);

  auto join = [](const std::vector<std::string>& lines) {
    std::string out;
    for (const std::string& line : lines) out += (out.empty() ? "" : "; ") + line;
    return out;
  };
  std::vector<std::string> written;
  auto emit = [&](const std::string& name, const PlotSpec& spec) {
    const std::string path = (dir / name).string();
    report::WriteFile(path, RenderSvg(spec));
    written.push_back(path);
  };

  {
    const report::CsvTable t = report::ReadCsvTable((dir / "sparsity.csv").string());
    PlotSpec spec;
    spec.title = "Interaction strengths sorted in descending order";
    spec.x_label = "rank";
    spec.y_label = "|I(S)|";
    spec.description = join(t.comments);
    const std::vector<double> rank = t.Numbers("rank");
    for (const std::string& column : t.columns) {
      if (column == "rank") continue;
      spec.series.push_back({column, rank, t.Numbers(column)});
    }
    emit("sparsity.svg", spec);
  }
  {
    const report::CsvTable t = report::ReadCsvTable((dir / "metrics.csv").string());
    const auto names = t.Strings("metric_name");
    const auto orders = t.Numbers("order");
    const auto values = t.Numbers("value");
    std::map<std::string, Series> by_name;
    for (size_t r = 0; r < names.size(); ++r) {
      Series& s = by_name[names[r]];
      s.label = names[r];
      s.x.push_back(orders[r]);
      s.y.push_back(values[r]);
    }
    PlotSpec variance;
    variance.title = "Variance of interactions by order";
    variance.x_label = "order s";
    variance.y_label = "V(s)";
    variance.log_y = true;
    variance.description = join(t.comments);
    PlotSpec stability = variance;
    stability.title = "Relative stability of interactions by order";
    stability.y_label = "K(s)";
    for (const auto& [name, series] : by_name) {
      if (name.rfind("V_", 0) == 0) variance.series.push_back(series);
      if (name.rfind("K_", 0) == 0 && name.rfind("K_flagged_", 0) != 0) {
        stability.series.push_back(series);
      }
    }
    emit("variance.svg", variance);
    emit("stability.svg", stability);
  }
  {
    const report::CsvTable t = report::ReadCsvTable((dir / "strength.csv").string());
    const auto names = t.Strings("comparison");
    const auto orders = t.Numbers("order");
    const auto ratios = t.Numbers("ratio");
    std::map<std::string, Series> by_name;
    for (size_t r = 0; r < names.size(); ++r) {
      Series& s = by_name[names[r]];
      s.label = names[r];
      s.x.push_back(orders[r]);
      s.y.push_back(ratios[r]);
    }
    PlotSpec spec;
    spec.title = "Interaction strength ratio BNN / DNN by order";
    spec.x_label = "order s";
    spec.y_label = "strength ratio";
    spec.has_reference = true;
    spec.reference_y = 1.0;
    spec.description = join(t.comments);
    for (const auto& [name, series] : by_name) spec.series.push_back(series);
    emit("strength.svg", spec);
  }
  return written;
}

}  // namespace bnnint::plot
