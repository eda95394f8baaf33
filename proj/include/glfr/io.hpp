#pragma once

// Reading one numeric column from a text file. Whitespace files contribute
// every token; CSV files contribute one column, chosen by header name or
// defaulting to the first. Lines starting with '#' are comments.

#include <cmath>
#include <cstddef>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "glfr/error.hpp"

namespace glfr::io {

enum class Format { whitespace, csv };

struct DataSet {
  std::vector<double> values;
  std::string label;
};

namespace detail {

inline std::string where(const std::string& path, std::size_t line, std::size_t col) {
  return path + ":" + std::to_string(line) + ":" + std::to_string(col);
}

inline double parse_value(const std::string& tok, const std::string& path, std::size_t line, std::size_t col) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (used == 0 || used != tok.size() || !std::isfinite(v)) {
    throw Error(ErrorCode::parse, where(path, line, col) + ": not a number '" + tok + "'");
  }
  if (!(v > 0.0)) throw Error(ErrorCode::nonpositive_value, where(path, line, col) + ": value must be positive");
  return v;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r"), e = s.find_last_not_of(" \t\r");
  return b == std::string::npos ? std::string{} : s.substr(b, e - b + 1);
}

inline bool is_number(const std::string& s) {
  std::size_t used = 0;
  try {
    std::stod(s, &used);
  } catch (const std::exception&) {
    return false;
  }
  return used == s.size();
}

}  // namespace detail

/// Parses text already in memory; `path` is only used in diagnostics.
inline DataSet parse(std::istream& in, Format format, const std::string& path, const std::string& column = {}) {
  DataSet ds;
  ds.label = path;
  std::string line;
  std::size_t lineno = 0;
  bool header_seen = false;
  std::size_t col_index = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string t = detail::trim(line);
    if (t.empty() || t[0] == '#') continue;
    if (format == Format::whitespace) {
      std::size_t pos = 0;
      while (pos < line.size()) {
        const auto b = line.find_first_not_of(" \t\r", pos);
        if (b == std::string::npos) break;
        const auto e = line.find_first_of(" \t\r", b);
        const std::string tok = line.substr(b, e == std::string::npos ? std::string::npos : e - b);
        ds.values.push_back(detail::parse_value(tok, path, lineno, b + 1));
        pos = e == std::string::npos ? line.size() : e;
      }
      continue;
    }
    std::vector<std::string> cells;
    std::vector<std::size_t> starts;
    {
      std::size_t start = 0;
      while (true) {
        const auto c = line.find(',', start);
        cells.push_back(detail::trim(line.substr(start, c == std::string::npos ? std::string::npos : c - start)));
        starts.push_back(start + 1);
        if (c == std::string::npos) break;
        start = c + 1;
      }
    }
    if (!header_seen) {
      header_seen = true;
      if (!detail::is_number(cells[0])) {
        if (!column.empty()) {
          std::size_t k = 0;
          while (k < cells.size() && cells[k] != column) ++k;
          if (k == cells.size()) throw Error(ErrorCode::parse, detail::where(path, lineno, 1) + ": no column '" + column + "'");
          col_index = k;
        }
        continue;
      }
      if (!column.empty()) throw Error(ErrorCode::parse, path + ": column '" + column + "' requested but no header");
    }
    if (col_index >= cells.size()) {
      throw Error(ErrorCode::parse, detail::where(path, lineno, line.size() + 1) + ": missing column");
    }
    ds.values.push_back(detail::parse_value(cells[col_index], path, lineno, starts[col_index]));
  }
  if (ds.values.empty()) throw Error(ErrorCode::empty_file, path + ": no data values");
  return ds;
}

inline DataSet ingest(const std::string& path, Format format = Format::whitespace, const std::string& column = {}) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::io, path + ": cannot open file");
  return parse(in, format, path, column);
}

/// Picks the format from the extension: ".csv" means CSV, anything else whitespace.
inline Format guess_format(const std::string& path) {
  return path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0 ? Format::csv : Format::whitespace;
}

}  // namespace glfr::io
