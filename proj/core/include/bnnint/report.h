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


// Plain-text report files: number formatting, CSV reading and writing.

#ifndef BNNINT_REPORT_H_
#define BNNINT_REPORT_H_

#include <string>
#include <vector>

namespace bnnint::report {

// 17 significant digits, so values survive a text round trip.
std::string FormatNumber(double value);

std::string ReadFile(const std::string& path);
// Creates parent directories as needed.
void WriteFile(const std::string& path, const std::string& text);
bool FileExists(const std::string& path);

struct CsvTable {
  std::vector<std::string> comments;  // '#' lines, without the marker
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  // Throws ArgumentError for an unknown column.
  size_t Column(const std::string& name) const;
  // Throws ParseError if a cell is not a number.
  std::vector<double> Numbers(const std::string& column) const;
  std::vector<std::string> Strings(const std::string& column) const;
};

// Comma-separated, no quoting. Lines starting with '#' before the header are
// comments. Throws ParseError with the line number on ragged rows.
CsvTable ParseCsv(const std::string& text);
CsvTable ReadCsvTable(const std::string& path);

// Optional "# header" line, then the columns and rows.
std::string FormatCsv(const std::string& header,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<std::string>>& rows);

}  // namespace bnnint::report

#endif  // BNNINT_REPORT_H_
