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


#include "bnnint/report.h"

#include <charconv>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "bnnint/error.h"

namespace bnnint::report {
namespace {

std::vector<std::string> SplitLine(const std::string& line) {
  std::vector<std::string> out;
  size_t start = 0;
  while (true) {
    const size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(line.substr(start));
      return out;
    }
    out.push_back(line.substr(start, comma - start));
    start = comma + 1;
  }
}

}  // namespace

std::string FormatNumber(double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.17g", value);
  return buffer;
}

std::string ReadFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void WriteFile(const std::string& path, const std::string& text) {
  const std::filesystem::path p(path);
  if (p.has_parent_path()) std::filesystem::create_directories(p.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ArgumentError("cannot write " + path);
  out << text;
  if (!out) throw ArgumentError("write failed for " + path);
}

bool FileExists(const std::string& path) {
  return std::filesystem::is_regular_file(path);
}

size_t CsvTable::Column(const std::string& name) const {
  for (size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] == name) return c;
  }
  throw ArgumentError("no column '" + name + "'");
}

std::vector<double> CsvTable::Numbers(const std::string& column) const {
  const size_t c = Column(column);
  std::vector<double> out;
  out.reserve(rows.size());
  for (size_t r = 0; r < rows.size(); ++r) {
    const std::string& cell = rows[r][c];
    double value = 0.0;
    auto [ptr, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), value);
    if (ec != std::errc() || ptr != cell.data() + cell.size()) {
      char* end = nullptr;
      value = std::strtod(cell.c_str(), &end);
      if (cell.empty() || end != cell.c_str() + cell.size()) {
        throw ParseError("non-numeric cell '" + cell + "' in column " + column,
                         r + 2 + comments.size());
      }
    }
    out.push_back(value);
  }
  return out;
}

std::vector<std::string> CsvTable::Strings(const std::string& column) const {
  const size_t c = Column(column);
  std::vector<std::string> out;
  for (const auto& row : rows) out.push_back(row[c]);
  return out;
}

CsvTable ParseCsv(const std::string& text) {
  CsvTable table;
  std::istringstream in(text);
  std::string line;
  size_t line_no = 0;
  bool have_header = false;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!have_header && !line.empty() && line[0] == '#') {
      table.comments.push_back(line.size() > 1 && line[1] == ' ' ? line.substr(2)
                                                                 : line.substr(1));
      continue;
    }
    if (line.empty()) continue;
    std::vector<std::string> cells = SplitLine(line);
    if (!have_header) {
      table.columns = std::move(cells);
      have_header = true;
      continue;
    }
    if (cells.size() != table.columns.size()) {
      throw ParseError("expected " + std::to_string(table.columns.size()) +
                           " cells, found " + std::to_string(cells.size()),
                       line_no);
    }
    table.rows.push_back(std::move(cells));
  }
  if (!have_header) throw ParseError("missing header row", line_no);
  return table;
}

CsvTable ReadCsvTable(const std::string& path) { return ParseCsv(ReadFile(path)); }

std::string FormatCsv(const std::string& header,
                      const std::vector<std::string>& columns,
                      const std::vector<std::vector<std::string>>& rows) {
  std::string out = header.empty() ? "" : "# " + header + "\n";
  auto append = [&out](const std::vector<std::string>& cells) {
    for (size_t c = 0; c < cells.size(); ++c) {
      if (c > 0) out += ',';
      out += cells[c];
    }
    out += '\n';
  };
  append(columns);
  for (const auto& row : rows) append(row);
  return out;
}

}  // namespace bnnint::report
