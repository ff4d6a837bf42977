#pragma once

#include <algorithm>
#include <charconv>
#include <fstream>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include "rjm/types.hpp"

namespace rjm {

// Shortest round-trip decimal form; reading the text back recovers the exact
// double, which is what keeps file output byte-reproducible.
inline std::string format_double(double v) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

inline double parse_double(const std::string& s, const std::string& context) {
  double v = 0.0;
  const char* begin = s.data();
  const char* end = s.data() + s.size();
  const auto res = std::from_chars(begin, end, v);
  if (res.ec != std::errc() || res.ptr != end) {
    throw io_error(context + ": cannot parse '" + s + "' as a number");
  }
  return v;
}

struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  Index column(const std::string& name, const std::string& context) const {
    for (size_t j = 0; j < header.size(); ++j) {
      if (header[j] == name) return static_cast<Index>(j);
    }
    throw io_error(context + ": missing required column '" + name + "'");
  }
};

// Comma-separated, mandatory header, '.' decimal, no quoting or escapes. A
// field that needs a comma does not belong in these files.
inline CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw io_error("read_csv: cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      if (in.peek() == EOF) break;  // tolerate one trailing newline
      throw io_error("read_csv: '" + path + "' line " + std::to_string(line_no) + " is empty");
    }
    std::vector<std::string> fields;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    if (line_no == 1) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size()) {
        throw io_error("read_csv: '" + path + "' line " + std::to_string(line_no) + " has " +
                       std::to_string(fields.size()) + " fields, header has " +
                       std::to_string(t.header.size()));
      }
      t.rows.push_back(std::move(fields));
    }
  }
  if (t.header.empty()) throw io_error("read_csv: '" + path + "' has no header row");
  return t;
}

namespace detail {

// Maps a header to the feature columns x1..xp plus optional named columns,
// rejecting anything unrecognized.
inline std::vector<Index> feature_columns(const CsvTable& t, const std::string& path,
                                          bool require_response) {
  Index y_col = -1, z_col = -1;
  std::vector<std::pair<int, Index>> xs;  // feature number -> column index
  for (size_t j = 0; j < t.header.size(); ++j) {
    const std::string& h = t.header[j];
    if (h == "y") {
      y_col = static_cast<Index>(j);
    } else if (h == "z") {
      z_col = static_cast<Index>(j);
    } else if (h.size() >= 2 && h[0] == 'x') {
      int num = 0;
      const auto res = std::from_chars(h.data() + 1, h.data() + h.size(), num);
      if (res.ec != std::errc() || res.ptr != h.data() + h.size() || num < 1) {
        throw io_error("'" + path + "': unrecognized column '" + h + "'");
      }
      xs.emplace_back(num, static_cast<Index>(j));
    } else {
      throw io_error("'" + path + "': unrecognized column '" + h +
                     "' (expected x1..xp, y, z)");
    }
  }
  if (xs.empty()) throw io_error("'" + path + "': no feature columns x1..xp found");
  std::sort(xs.begin(), xs.end());
  for (size_t k = 0; k < xs.size(); ++k) {
    if (xs[k].first != static_cast<int>(k) + 1) {
      throw io_error("'" + path + "': feature columns must be consecutive x1..xp; missing x" +
                     std::to_string(k + 1));
    }
  }
  if (require_response && (y_col < 0 || z_col < 0)) {
    throw io_error("'" + path + "': columns y and z are required");
  }
  std::vector<Index> cols;
  cols.reserve(xs.size());
  for (const auto& [num, j] : xs) cols.push_back(j);
  return cols;
}

}  // namespace detail

/// Reads a modeling dataset from CSV with columns x1..xp, y, z (any column
/// order, no extras). Values must parse as numbers; z must be 0 or 1.
inline Dataset dataset_from_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const auto cols = detail::feature_columns(t, path, true);
  const Index y_col = t.column("y", "'" + path + "'");
  const Index z_col = t.column("z", "'" + path + "'");
  const Index n = static_cast<Index>(t.rows.size());
  if (n == 0) throw io_error("'" + path + "': no data rows");
  Matrix X(n, static_cast<Index>(cols.size()));
  Vector y(n), z(n);
  for (Index i = 0; i < n; ++i) {
    const auto& row = t.rows[i];
    const std::string ctx = "'" + path + "' row " + std::to_string(i + 2);
    for (size_t j = 0; j < cols.size(); ++j) {
      X(i, static_cast<Index>(j)) = parse_double(row[cols[j]], ctx);
    }
    y(i) = parse_double(row[y_col], ctx);
    z(i) = parse_double(row[z_col], ctx);
  }
  return Dataset(std::move(X), std::move(y), std::move(z));
}

/// Reads prediction features: columns x1..xp, with y and z tolerated (and
/// ignored) so a modeling CSV can be scored directly.
inline Matrix features_from_csv(const std::string& path) {
  const CsvTable t = read_csv(path);
  const auto cols = detail::feature_columns(t, path, false);
  const Index n = static_cast<Index>(t.rows.size());
  if (n == 0) throw io_error("'" + path + "': no data rows");
  Matrix X(n, static_cast<Index>(cols.size()));
  for (Index i = 0; i < n; ++i) {
    const std::string ctx = "'" + path + "' row " + std::to_string(i + 2);
    for (size_t j = 0; j < cols.size(); ++j) {
      X(i, static_cast<Index>(j)) = parse_double(t.rows[i][cols[j]], ctx);
    }
  }
  return X;
}

inline void write_dataset_csv(const std::string& path, const Dataset& d) {
  std::ofstream out(path);
  if (!out) throw io_error("write_dataset_csv: cannot open '" + path + "'");
  for (Index j = 0; j < d.p(); ++j) out << "x" << (j + 1) << ",";
  out << "y,z\n";
  for (Index i = 0; i < d.n(); ++i) {
    for (Index j = 0; j < d.p(); ++j) out << format_double(d.X()(i, j)) << ",";
    out << format_double(d.y()(i)) << "," << (d.group_one(i) ? "1" : "0") << "\n";
  }
  if (!out) throw io_error("write_dataset_csv: write to '" + path + "' failed");
}

}  // namespace rjm
