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


// Standalone SVG line plots rendered from report CSV files.

#ifndef BNNINT_SVG_H_
#define BNNINT_SVG_H_

#include <string>
#include <vector>

namespace bnnint::plot {

struct Series {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

struct PlotSpec {
  std::string title;
  std::string x_label;
  std::string y_label;
  bool log_y = false;
  // Drawn as a dashed horizontal line when set.
  bool has_reference = false;
  double reference_y = 0.0;
  // Free text placed in the <desc> element.
  std::string description;
  std::vector<Series> series;
};

// Deterministic SVG text. Points that are not finite, or not positive on a
// log axis, are left out.
std::string RenderSvg(const PlotSpec& spec);

// Input CSVs EmitPlots reads from a report directory.
const std::vector<std::string>& PlotInputs();

// Writes sparsity.svg, variance.svg, stability.svg and strength.svg next to
// their CSV inputs and returns the written paths. Throws ArgumentError naming
// every missing input.
std::vector<std::string> EmitPlots(const std::string& bundle_dir);

}  // namespace bnnint::plot

#endif  // BNNINT_SVG_H_
