/*
 * Copyright 2026 The repscope Authors.
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

// ReportDocument and its canonical JSON encoding.
//
// Canonical form: object keys sorted, two-space indentation, every real
// printed with 17 significant digits ("%.17g") so that reloading is exact and
// identical documents serialize to identical bytes.

#ifndef REPSCOPE_REPORT_HPP_
#define REPSCOPE_REPORT_HPP_

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <nlohmann/json.hpp>

#include "repscope/error.hpp"
#include "repscope/io.hpp"

namespace repscope {

inline constexpr const char* kToolVersion = "0.3.0";

using Cell = std::variant<double, std::string>;

struct Table {
  std::vector<std::string> columns;
  std::vector<std::vector<Cell>> rows;

  void add_row(std::vector<Cell> row) {
    if (row.size() != columns.size()) {
      throw ValidationError("table row has " + std::to_string(row.size()) + " cells, expected " +
                            std::to_string(columns.size()));
    }
    rows.push_back(std::move(row));
  }

  /// Index of `name` in `columns`, or -1.
  int column(const std::string& name) const {
    for (std::size_t i = 0; i < columns.size(); ++i) {
      if (columns[i] == name) return static_cast<int>(i);
    }
    return -1;
  }

  bool operator==(const Table&) const = default;
};

using Metric = std::variant<double, std::vector<double>, Table>;

struct InputDigest {
  std::string role;
  std::string digest;
  bool operator==(const InputDigest&) const = default;
};

struct Provenance {
  std::string command;
  std::string timestamp;
  bool operator==(const Provenance&) const = default;
};

struct ReportDocument {
  std::string tool_version = kToolVersion;
  std::vector<InputDigest> inputs;
  std::map<std::string, Metric> metrics;
  std::map<std::string, std::string> metadata;
  std::map<std::string, std::string> config;
  Provenance provenance;

  /// Adds a metric; names must be unique within a document.
  void add(const std::string& name, Metric value) {
    if (!metrics.emplace(name, std::move(value)).second) {
      throw ValidationError("duplicate metric name '" + name + "'");
    }
  }

  /// Copies every metric, metadata entry and input of `other` under
  /// `prefix` + name.
  void merge(const ReportDocument& other, const std::string& prefix = {}) {
    for (const auto& [k, v] : other.metrics) add(prefix + k, v);
    for (const auto& [k, v] : other.metadata) metadata[prefix + k] = v;
    for (const auto& in : other.inputs) {
      bool seen = false;
      for (const auto& mine : inputs) seen = seen || mine == in;
      if (!seen) inputs.push_back(in);
    }
  }

  double scalar(const std::string& name) const {
    auto it = metrics.find(name);
    if (it == metrics.end()) throw ValidationError("report has no metric '" + name + "'");
    if (auto* d = std::get_if<double>(&it->second)) return *d;
    throw ValidationError("metric '" + name + "' is not a scalar");
  }

  const Table& table(const std::string& name) const {
    auto it = metrics.find(name);
    if (it == metrics.end()) throw ValidationError("report has no metric '" + name + "'");
    if (auto* t = std::get_if<Table>(&it->second)) return *t;
    throw ValidationError("metric '" + name + "' is not a table");
  }

  bool operator==(const ReportDocument&) const = default;
};

/// ISO-8601 UTC timestamp. Honors SOURCE_DATE_EPOCH for reproducible output.
inline std::string provenance_timestamp() {
  std::time_t t = 0;
  if (const char* env = std::getenv("SOURCE_DATE_EPOCH"); env && *env) {
    t = static_cast<std::time_t>(std::strtoll(env, nullptr, 10));
  } else {
    t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  }
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

namespace detail {

inline std::string format_real(double v) {
  if (!std::isfinite(v)) throw ValidationError("cannot serialize a non-finite value to JSON");
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

inline void emit(const nlohmann::json& j, std::string& out, int indent) {
  const std::string pad(static_cast<std::size_t>(indent) * 2, ' ');
  const std::string inner(static_cast<std::size_t>(indent + 1) * 2, ' ');
  switch (j.type()) {
    case nlohmann::json::value_t::object: {
      if (j.empty()) {
        out += "{}";
        return;
      }
      out += "{\n";
      bool first = true;
      for (auto it = j.begin(); it != j.end(); ++it) {  // std::map: sorted keys
        if (!first) out += ",\n";
        first = false;
        out += inner + nlohmann::json(it.key()).dump() + ": ";
        emit(it.value(), out, indent + 1);
      }
      out += "\n" + pad + "}";
      return;
    }
    case nlohmann::json::value_t::array: {
      if (j.empty()) {
        out += "[]";
        return;
      }
      // Arrays of scalars stay on one line; nested arrays get one line each.
      bool flat = true;
      for (const auto& e : j) flat = flat && !e.is_structured();
      if (flat) {
        out += "[";
        for (std::size_t i = 0; i < j.size(); ++i) {
          if (i) out += ", ";
          emit(j[i], out, indent + 1);
        }
        out += "]";
        return;
      }
      out += "[\n";
      for (std::size_t i = 0; i < j.size(); ++i) {
        if (i) out += ",\n";
        out += inner;
        emit(j[i], out, indent + 1);
      }
      out += "\n" + pad + "]";
      return;
    }
    case nlohmann::json::value_t::number_float:
      out += format_real(j.get<double>());
      return;
    default:
      out += j.dump();
  }
}

inline nlohmann::json cell_to_json(const Cell& c) {
  if (auto* d = std::get_if<double>(&c)) return *d;
  return std::get<std::string>(c);
}

inline Cell cell_from_json(const nlohmann::json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number()) return j.get<double>();
  throw FormatError("table cell must be a number or a string");
}

}  // namespace detail

inline nlohmann::json to_json(const ReportDocument& r) {
  using nlohmann::json;
  json metrics = json::object();
  for (const auto& [name, m] : r.metrics) {
    if (auto* d = std::get_if<double>(&m)) {
      metrics[name] = *d;
    } else if (auto* v = std::get_if<std::vector<double>>(&m)) {
      json arr = json::array();
      for (double x : *v) arr.push_back(x);
      metrics[name] = arr;
    } else {
      const auto& t = std::get<Table>(m);
      json rows = json::array();
      for (const auto& row : t.rows) {
        json jr = json::array();
        for (const auto& c : row) jr.push_back(detail::cell_to_json(c));
        rows.push_back(jr);
      }
      metrics[name] = json{{"columns", t.columns}, {"rows", rows}};
    }
  }
  json inputs = json::array();
  for (const auto& in : r.inputs) inputs.push_back(json{{"role", in.role}, {"digest", in.digest}});
  return json{{"tool_version", r.tool_version},
              {"inputs", inputs},
              {"metrics", metrics},
              {"metadata", r.metadata},
              {"config", r.config},
              {"provenance", json{{"command", r.provenance.command},
                                  {"timestamp", r.provenance.timestamp}}}};
}

inline ReportDocument from_json(const nlohmann::json& j) {
  ReportDocument r;
  try {
    r.tool_version = j.at("tool_version").get<std::string>();
    for (const auto& in : j.at("inputs")) {
      r.inputs.push_back({in.at("role").get<std::string>(), in.at("digest").get<std::string>()});
    }
    for (auto it = j.at("metrics").begin(); it != j.at("metrics").end(); ++it) {
      const auto& v = it.value();
      if (v.is_number()) {
        r.metrics.emplace(it.key(), v.get<double>());
      } else if (v.is_array()) {
        r.metrics.emplace(it.key(), v.get<std::vector<double>>());
      } else if (v.is_object()) {
        Table t;
        t.columns = v.at("columns").get<std::vector<std::string>>();
        for (const auto& row : v.at("rows")) {
          std::vector<Cell> cells;
          for (const auto& c : row) cells.push_back(detail::cell_from_json(c));
          t.add_row(std::move(cells));
        }
        r.metrics.emplace(it.key(), std::move(t));
      } else {
        throw FormatError("metric '" + it.key() + "' has an unsupported JSON type");
      }
    }
    r.metadata = j.at("metadata").get<std::map<std::string, std::string>>();
    r.config = j.at("config").get<std::map<std::string, std::string>>();
    r.provenance.command = j.at("provenance").at("command").get<std::string>();
    r.provenance.timestamp = j.at("provenance").at("timestamp").get<std::string>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("malformed report document: ") + e.what());
  }
  return r;
}

inline std::string to_canonical_json(const ReportDocument& r) {
  std::string out;
  detail::emit(to_json(r), out, 0);
  out += "\n";
  return out;
}

inline std::string csv_escape(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

/// Plot-ready CSV: scalars first as `metric,value`, then one block per
/// vector or table, each introduced by a `# <name>` line.
inline std::string to_csv(const ReportDocument& r) {
  std::string out = "metric,value\n";
  for (const auto& [name, m] : r.metrics) {
    if (auto* d = std::get_if<double>(&m)) out += csv_escape(name) + "," + detail::format_real(*d) + "\n";
  }
  for (const auto& [name, m] : r.metrics) {
    if (auto* v = std::get_if<std::vector<double>>(&m)) {
      out += "\n# " + name + "\nindex,value\n";
      for (std::size_t i = 0; i < v->size(); ++i) {
        out += std::to_string(i) + "," + detail::format_real((*v)[i]) + "\n";
      }
    } else if (auto* t = std::get_if<Table>(&m)) {
      out += "\n# " + name + "\n";
      for (std::size_t i = 0; i < t->columns.size(); ++i) {
        out += (i ? "," : "") + csv_escape(t->columns[i]);
      }
      out += "\n";
      for (const auto& row : t->rows) {
        for (std::size_t i = 0; i < row.size(); ++i) {
          if (i) out += ",";
          if (auto* d = std::get_if<double>(&row[i])) {
            out += detail::format_real(*d);
          } else {
            out += csv_escape(std::get<std::string>(row[i]));
          }
        }
        out += "\n";
      }
    }
  }
  return out;
}

inline void save_report(const ReportDocument& r, const std::filesystem::path& path) {
  io::write_text(path, to_canonical_json(r));
}

inline ReportDocument load_report(const std::filesystem::path& path) {
  return from_json(io::read_json(path));
}

}  // namespace repscope

#endif  // REPSCOPE_REPORT_HPP_
