#pragma once

#include <algorithm>
#include <cctype>
#include <charconv>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <fmt/format.h>

#include "meanrev/errors.hpp"
#include "meanrev/timeseries.hpp"

namespace meanrev::csv {

inline std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

inline std::vector<std::string> split_line(std::string_view line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const std::size_t comma = line.find(',', start);
    out.emplace_back(trim(line.substr(start, comma == std::string_view::npos ? line.npos : comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc() && ptr == s.data() + s.size();
}

/// Shortest representation that round-trips.
inline std::string format_double(double x) { return fmt::format("{}", x); }

/// Header row with labels; optional leading date column; one asset per
/// remaining column. Missing or non-numeric cells are rejected.
inline SamplePath read_sample_path(std::istream& in) {
  std::string line;
  std::vector<std::vector<std::string>> rows;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    rows.push_back(split_line(line));
  }
  if (rows.size() < 2) throw ParseError("CSV needs a header row and at least one data row");
  const std::vector<std::string>& header = rows[0];

  std::string first = header[0];
  std::transform(first.begin(), first.end(), first.begin(),
                 [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  double probe = 0.0;
  const bool has_date = first == "date" || !parse_double(rows[1][0], probe);
  const std::size_t off = has_date ? 1 : 0;
  if (header.size() <= off) throw ParseError("CSV has no asset columns");

  std::vector<std::string> labels(header.begin() + static_cast<std::ptrdiff_t>(off), header.end());
  const auto t = static_cast<Index>(rows.size() - 1);
  const auto n = static_cast<Index>(labels.size());
  Matrix values(t, n);
  std::vector<std::string> dates;
  for (Index r = 0; r < t; ++r) {
    const auto& row = rows[static_cast<std::size_t>(r) + 1];
    if (static_cast<Index>(row.size()) != n + static_cast<Index>(off)) {
      throw ParseError(fmt::format("CSV row {} has {} fields, expected {}", r + 2, row.size(), n + off));
    }
    if (has_date) dates.push_back(row[0]);
    for (Index j = 0; j < n; ++j) {
      const std::string& cell = row[static_cast<std::size_t>(j) + off];
      if (cell.empty()) throw ParseError(fmt::format("missing value at row {}, column {}", r + 2, j + off + 1));
      if (!parse_double(cell, values(r, j))) {
        throw ParseError(fmt::format("non-numeric value '{}' at row {}, column {}", cell, r + 2, j + off + 1));
      }
    }
  }
  try {
    return SamplePath(std::move(values), std::move(labels), std::move(dates));
  } catch (const std::invalid_argument& e) {
    throw ParseError(std::string("invalid sample path: ") + e.what());
  }
}

inline SamplePath load_sample_path(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open data file " + file);
  return read_sample_path(in);
}

inline void write_sample_path(std::ostream& out, const SamplePath& path) {
  const bool has_date = !path.dates().empty();
  if (has_date) out << "date,";
  for (std::size_t j = 0; j < path.labels().size(); ++j) {
    out << (j ? "," : "") << path.labels()[j];
  }
  out << '\n';
  for (Index r = 0; r < path.length(); ++r) {
    if (has_date) out << path.dates()[static_cast<std::size_t>(r)] << ',';
    for (Index j = 0; j < path.assets(); ++j) {
      out << (j ? "," : "") << format_double(path.values()(r, j));
    }
    out << '\n';
  }
}

/// Sidecar file "asset_label,group_label". A header row is optional.
inline std::vector<std::pair<std::string, std::string>> read_groups(std::istream& in) {
  std::vector<std::pair<std::string, std::string>> out;
  std::string line;
  bool first = true;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (trim(line).empty()) continue;
    const auto f = split_line(line);
    if (f.size() != 2) throw ParseError("group file rows must be asset_label,group_label");
    if (first && f[0] == "asset_label") {
      first = false;
      continue;
    }
    first = false;
    out.emplace_back(f[0], f[1]);
  }
  return out;
}

inline std::vector<std::pair<std::string, std::string>> load_groups(const std::string& file) {
  std::ifstream in(file);
  if (!in) throw ParseError("cannot open group file " + file);
  return read_groups(in);
}

/// Column indices per group label (groups ordered by label, indices ascending).
/// Without an assignment every asset lands in group "all".
inline std::map<std::string, std::vector<int>> group_indices(
    const SamplePath& path, const std::vector<std::pair<std::string, std::string>>& assignment) {
  std::map<std::string, std::vector<int>> groups;
  if (assignment.empty()) {
    auto& all = groups["all"];
    for (Index j = 0; j < path.assets(); ++j) all.push_back(static_cast<int>(j));
    return groups;
  }
  std::map<std::string, int> col;
  for (std::size_t j = 0; j < path.labels().size(); ++j) col[path.labels()[j]] = static_cast<int>(j);
  for (const auto& [asset, group] : assignment) {
    const auto it = col.find(asset);
    if (it == col.end()) throw ParseError("group file names unknown asset '" + asset + "'");
    groups[group].push_back(it->second);
  }
  for (auto& [g, idx] : groups) {
    std::sort(idx.begin(), idx.end());
    idx.erase(std::unique(idx.begin(), idx.end()), idx.end());
  }
  return groups;
}

}  // namespace meanrev::csv
