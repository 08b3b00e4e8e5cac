// Copyright 2026 The vcd Authors
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

#include <cerrno>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <istream>
#include <string>
#include <string_view>
#include <vector>

#include "vcd/error.hpp"

// Minimal CSV for the tool's own tables: no quoting, so ids may not contain
// commas, quotes or line breaks.
namespace vcd::csv {

inline const std::string& check_field(const std::string& s) {
  require(s.find_first_of(",\"\r\n") == std::string::npos, ErrorCode::kInvariant,
          "field '" + s + "' cannot be written to CSV");
  return s;
}

inline std::string fixed(double v, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*f", decimals, v);
  return buf;
}

// Shortest text that parses back to exactly `v`.
inline std::string exact(double v) {
  char buf[64];
  for (int prec = 1; prec <= 17; ++prec) {
    std::snprintf(buf, sizeof buf, "%.*g", prec, v);
    if (std::strtod(buf, nullptr) == v) break;
  }
  return buf;
}

inline double to_double(const std::string& s, const std::string& where) {
  errno = 0;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(!s.empty() && end == s.c_str() + s.size() && errno != ERANGE && std::isfinite(v),
          ErrorCode::kParse, where + ": '" + s + "' is not a finite number");
  return v;
}

inline std::vector<std::string> split(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  for (;;) {
    const auto pos = line.find(',', start);
    out.emplace_back(line.substr(start, pos == std::string_view::npos ? pos : pos - start));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return out;
}

struct Row {
  std::vector<std::string> fields;
  std::string where;  // "file:line" for error messages
};

// Reads a table whose first line must equal `header`. Blank lines are skipped.
inline std::vector<Row> read_table(std::istream& in, const std::string& source,
                                   const std::vector<std::string>& header) {
  std::vector<Row> rows;
  std::string line;
  int lineno = 0;
  bool seen_header = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split(line);
    const auto where = source + ":" + std::to_string(lineno);
    if (!seen_header) {
      require(fields == header, ErrorCode::kParse, where + ": unexpected header '" + line + "'");
      seen_header = true;
      continue;
    }
    require(fields.size() == header.size(), ErrorCode::kParse,
            where + ": expected " + std::to_string(header.size()) + " fields, got " +
                std::to_string(fields.size()));
    rows.push_back({std::move(fields), where});
  }
  require(seen_header, ErrorCode::kParse, source + ": missing header");
  return rows;
}

}  // namespace vcd::csv
