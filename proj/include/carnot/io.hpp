#pragma once

// Point files (headerless CSV), group-spec documents (JSON) and key: value
// reports.

#include "carnot/group.hpp"

#include <json.hpp>

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <ostream>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

namespace carnot {

/// An input path that does not exist or cannot be opened.
class MissingFile : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline std::string fmt_double(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

inline std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw MissingFile("cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

namespace detail {

inline std::string_view trim(std::string_view s) {
  const auto ws = " \t\r";
  const auto a = s.find_first_not_of(ws);
  if (a == std::string_view::npos) return {};
  return s.substr(a, s.find_last_not_of(ws) - a + 1);
}

inline bool parse_double(std::string_view s, double& out) {
  s = trim(s);
  if (!s.empty() && s.front() == '+') s.remove_prefix(1);
  if (s.empty()) return false;
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), out);
  return ec == std::errc{} && ptr == s.data() + s.size() && std::isfinite(out);
}

}  // namespace detail

/// Comma-separated doubles, e.g. "0.1,-2,3e-4".
inline std::vector<double> parse_vector(std::string_view text) {
  std::vector<double> out;
  std::size_t start = 0;
  while (true) {
    const auto comma = text.find(',', start);
    double x = 0.0;
    if (!detail::parse_double(text.substr(start, comma - start), x)) {
      throw MalformedInput("not a list of numbers: " + std::string(text));
    }
    out.push_back(x);
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

/// One point per row, dim() columns in layer order; blank lines and lines
/// starting with '#' are skipped.
/// Errors name the 1-based row.
inline std::vector<GroupElement> parse_points(const AlgebraPtr& alg, std::string_view text) {
  std::vector<GroupElement> pts;
  std::size_t row = 0, pos = 0;
  while (pos <= text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    const auto line = detail::trim(text.substr(pos, nl - pos));
    ++row;
    pos = nl + 1;
    if (line.empty() || line.front() == '#') continue;
    std::vector<double> v;
    try {
      v = parse_vector(line);
    } catch (const MalformedInput&) {
      throw MalformedInput("row " + std::to_string(row) + ": not a list of numbers");
    }
    if (static_cast<int>(v.size()) != alg->dim()) {
      throw MalformedInput("row " + std::to_string(row) + ": expected " + std::to_string(alg->dim()) +
                           " columns, found " + std::to_string(v.size()));
    }
    pts.emplace_back(alg, Coords(v.begin(), v.end()));
  }
  return pts;
}

inline std::vector<GroupElement> read_points(const AlgebraPtr& alg, const std::string& path) {
  return parse_points(alg, read_file(path));
}

inline void write_points(std::ostream& out, const std::vector<GroupElement>& pts) {
  for (const auto& p : pts) {
    for (int j = 0; j < p.dim(); ++j) out << (j ? "," : "") << fmt_double(p[j]);
    out << '\n';
  }
}

/// {"builtin": "heisenberg(1)"} or
/// {"layers": [2, 1], "brackets": [{"a": 0, "b": 1, "coeffs": [0, 0, 1]}],
///  "fill_antisymmetric": true, "name": "..."}.
/// The result must pass validate().
inline AlgebraPtr parse_group_spec(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw MalformedInput(std::string("group spec is not valid JSON: ") + e.what());
  }
  if (!doc.is_object()) throw MalformedInput("group spec must be an object");
  AlgebraPtr alg;
  try {
    if (doc.contains("builtin")) {
      if (doc.contains("layers") || doc.contains("brackets")) {
        throw MalformedInput("group spec mixes builtin with layers/brackets");
      }
      alg = builtin(doc.at("builtin").get<std::string>());
    } else {
      auto layers = doc.at("layers").get<std::vector<int>>();
      std::vector<BracketRecord> records;
      for (const auto& r : doc.value("brackets", nlohmann::json::array())) {
        records.push_back({r.at("a").get<int>(), r.at("b").get<int>(), r.at("coeffs").get<std::vector<double>>()});
      }
      alg = StratifiedAlgebra::from_records(std::move(layers), records, doc.value("fill_antisymmetric", true),
                                            doc.value("name", std::string("custom")));
    }
  } catch (const nlohmann::json::exception& e) {
    throw MalformedInput(std::string("group spec: ") + e.what());
  } catch (const InvalidArgument& e) {
    throw MalformedInput(e.what());
  }
  const auto report = validate(*alg);
  if (!report.ok()) {
    const auto& v = report.violations.front();
    std::string basis;
    for (int b : v.basis) basis += (basis.empty() ? "" : ",") + std::to_string(b);
    throw MalformedInput(std::string("group spec fails validation: ") + to_string(v.kind) + " at (" + basis + ")");
  }
  return alg;
}

inline AlgebraPtr read_group_spec(const std::string& path) { return parse_group_spec(read_file(path)); }

/// Ordered key: value lines; numbers printed with 17 significant digits so
/// reports are bit-reproducible.
class Report {
 public:
  Report& add(std::string key, std::string value) {
    entries_.emplace_back(std::move(key), std::move(value));
    return *this;
  }
  Report& add(std::string key, double value) { return add(std::move(key), fmt_double(value)); }
  Report& add(std::string key, std::size_t value) { return add(std::move(key), std::to_string(value)); }
  Report& add(std::string key, int value) { return add(std::move(key), std::to_string(value)); }
  Report& add(std::string key, bool value) { return add(std::move(key), std::string(value ? "true" : "false")); }
  Report& add(std::string key, const char* value) { return add(std::move(key), std::string(value)); }
  Report& add(std::string key, const std::vector<double>& v) {
    std::string s;
    for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + fmt_double(v[i]);
    return add(std::move(key), std::move(s));
  }

  const std::vector<std::pair<std::string, std::string>>& entries() const { return entries_; }

  void write(std::ostream& out) const {
    for (const auto& [k, v] : entries_) out << k << ": " << v << '\n';
  }

 private:
  std::vector<std::pair<std::string, std::string>> entries_;
};

/// Parses the key: value lines of a report; "# key: value" comment lines
/// count too, anything else is skipped.
inline std::vector<std::pair<std::string, std::string>> parse_report(std::string_view text) {
  std::vector<std::pair<std::string, std::string>> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    auto nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    auto line = text.substr(pos, nl - pos);
    pos = nl + 1;
    if (line.starts_with("# ")) line.remove_prefix(2);
    const auto sep = line.find(": ");
    if (sep == std::string_view::npos || sep == 0) continue;
    out.emplace_back(std::string(line.substr(0, sep)), std::string(line.substr(sep + 2)));
  }
  return out;
}

}  // namespace carnot
