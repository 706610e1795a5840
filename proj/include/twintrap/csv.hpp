// Copyright 2026 The twintrap Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <system_error>
#include <variant>
#include <vector>

namespace twintrap::csv {

/// Shortest decimal that parses back to exactly `x`, independent of locale.
inline std::string format(double x) {
  if (std::isnan(x)) return "nan";
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return {buf, res.ptr};
}

inline double parse_double(std::string_view s) {
  if (s == "nan") return std::numeric_limits<double>::quiet_NaN();
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  double x = 0.0;
  const auto res = std::from_chars(s.data(), s.data() + s.size(), x);
  if (res.ec != std::errc{} || res.ptr != s.data() + s.size()) {
    throw std::invalid_argument("not a number: '" + std::string(s) + "'");
  }
  return x;
}

/// A cell is numeric or a bare label (labels must not contain commas or
/// parse as numbers).
using Cell = std::variant<double, std::string>;

inline std::string format(const Cell& c) {
  if (const auto* x = std::get_if<double>(&c)) return format(*x);
  return std::get<std::string>(c);
}

inline Cell parse_cell(std::string_view s) {
  try {
    return parse_double(s);
  } catch (const std::invalid_argument&) {
    return std::string(s);
  }
}

struct Table {
  std::vector<std::string> header;
  std::vector<std::vector<Cell>> rows;

  std::size_t column(std::string_view name) const {
    for (std::size_t i = 0; i < header.size(); ++i) {
      if (header[i] == name) return i;
    }
    throw std::out_of_range("no column '" + std::string(name) + "'");
  }
};

inline void write(std::ostream& os, const Table& t) {
  for (std::size_t i = 0; i < t.header.size(); ++i) os << (i ? "," : "") << t.header[i];
  os << '\n';
  for (const auto& row : t.rows) {
    if (row.size() != t.header.size()) throw std::invalid_argument("csv row width differs from header");
    for (std::size_t i = 0; i < row.size(); ++i) os << (i ? "," : "") << format(row[i]);
    os << '\n';
  }
}

inline std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    const auto pos = line.find(',', start);
    out.push_back(line.substr(start, pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

inline Table read(std::istream& is) {
  Table t;
  std::string line;
  if (!std::getline(is, line)) throw std::runtime_error("csv: missing header");
  for (auto f : split(line)) t.header.emplace_back(f);
  std::size_t lineno = 1;
  while (std::getline(is, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto fields = split(line);
    if (fields.size() != t.header.size()) {
      throw std::runtime_error("csv line " + std::to_string(lineno) + ": expected " +
                               std::to_string(t.header.size()) + " fields");
    }
    auto& row = t.rows.emplace_back();
    row.reserve(fields.size());
    for (auto f : fields) row.push_back(parse_cell(f));
  }
  return t;
}

inline void write_file(const std::string& path, const Table& t) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path + "' for writing");
  write(os, t);
  os.flush();
  if (!os) throw std::runtime_error("write failed for '" + path + "'");
}

inline Table read_file(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw std::runtime_error("cannot open '" + path + "'");
  return read(is);
}

}  // namespace twintrap::csv
