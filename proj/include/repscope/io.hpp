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

// File-level loaders: matrices with JSON sidecars, checkpoint directories,
// concept manifests and baseline accuracy CSVs.

#ifndef REPSCOPE_IO_HPP_
#define REPSCOPE_IO_HPP_

#include <openssl/evp.h>

#include <array>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "repscope/error.hpp"
#include "repscope/npy.hpp"
#include "repscope/types.hpp"

namespace repscope::io {

namespace fs = std::filesystem;
using json = nlohmann::json;

/// Optional metadata stored next to `<stem>.npy` as `<stem>.json`.
struct Sidecar {
  std::optional<std::vector<std::int64_t>> labels;
  std::string layer_name;
  std::string source_id;
  std::vector<std::string> class_names;
  std::optional<double> temperature;
};

inline json read_json(const fs::path& path) {
  const std::string text = npy::read_file_bytes(path);
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw FormatError(path.string() + ": invalid JSON: " + e.what());
  }
}

inline void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

inline fs::path sidecar_path(const fs::path& npy_path) {
  fs::path p = npy_path;
  return p.replace_extension(".json");
}

inline Sidecar parse_sidecar(const json& j, const std::string& origin) {
  Sidecar s;
  if (!j.is_object()) throw FormatError(origin + ": sidecar must be a JSON object");
  try {
    if (j.contains("labels")) s.labels = j.at("labels").get<std::vector<std::int64_t>>();
    if (j.contains("layer_name")) s.layer_name = j.at("layer_name").get<std::string>();
    if (j.contains("source_id")) s.source_id = j.at("source_id").get<std::string>();
    if (j.contains("class_names")) s.class_names = j.at("class_names").get<std::vector<std::string>>();
    if (j.contains("temperature")) s.temperature = j.at("temperature").get<double>();
  } catch (const json::exception& e) {
    throw FormatError(origin + ": bad sidecar field: " + e.what());
  }
  return s;
}

inline Sidecar read_sidecar(const fs::path& npy_path) {
  const fs::path p = sidecar_path(npy_path);
  if (!fs::exists(p)) return {};
  return parse_sidecar(read_json(p), p.string());
}

/// Reads a rank-2 NPY file into f64. Throws FormatError, ShapeError or
/// ValidationError (non-finite entries).
inline Matrix read_matrix(const fs::path& path) {
  const Tensor t = npy::read(path);
  if (!all_finite(t.values.data(), t.values.size())) {
    throw ValidationError(path.string() + ": array contains non-finite entries");
  }
  return npy::to_matrix(t, path.string());
}

inline ActivationMatrix load_activations(const fs::path& path) {
  Matrix m = read_matrix(path);
  Sidecar s = read_sidecar(path);
  std::string source = s.source_id.empty() ? path.stem().string() : s.source_id;
  return ActivationMatrix(std::move(m), std::move(s.labels), std::move(s.layer_name),
                          std::move(source));
}

inline ClassifierHead load_head(const fs::path& path) {
  Matrix m = read_matrix(path);
  Sidecar s = read_sidecar(path);
  return ClassifierHead(std::move(m), s.temperature, std::move(s.class_names));
}

/// Writes `<path>` and, when any metadata is set, the sidecar next to it.
inline void save_matrix(const fs::path& path, const Matrix& m, DType dtype = DType::kFloat64,
                        const Sidecar& meta = {}) {
  npy::write(path, npy::from_matrix(m, dtype));
  json j = json::object();
  if (meta.labels) j["labels"] = *meta.labels;
  if (!meta.layer_name.empty()) j["layer_name"] = meta.layer_name;
  if (!meta.source_id.empty()) j["source_id"] = meta.source_id;
  if (!meta.class_names.empty()) j["class_names"] = meta.class_names;
  if (meta.temperature) j["temperature"] = *meta.temperature;
  if (!j.empty()) write_text(sidecar_path(path), j.dump(2) + "\n");
}

/// Labels from a standalone JSON file: either `[int...]` or an object with a
/// "labels" field (the sidecar schema).
inline std::vector<std::int64_t> load_labels(const fs::path& path) {
  const json j = read_json(path);
  try {
    if (j.is_array()) return j.get<std::vector<std::int64_t>>();
    return j.at("labels").get<std::vector<std::int64_t>>();
  } catch (const json::exception& e) {
    throw FormatError(path.string() + ": expected a label list: " + e.what());
  }
}

inline ActivationMatrix with_labels(const ActivationMatrix& acts, std::vector<std::int64_t> labels) {
  return ActivationMatrix(acts.data(), std::move(labels), acts.layer_name(), acts.source_id());
}

// ---------------------------------------------------------------------------
// Checkpoint directories: index.json + one NPY per tensor.

inline CheckpointTensorMap load_checkpoint(const fs::path& dir) {
  const fs::path index_path = dir / "index.json";
  const json index = read_json(index_path);
  CheckpointTensorMap out;
  if (!index.is_object() || !index.contains("tensors") || !index["tensors"].is_array()) {
    throw FormatError(index_path.string() + ": expected {\"tensors\": [...]}");
  }
  for (const auto& entry : index["tensors"]) {
    std::string name, file;
    std::vector<std::int64_t> shape;
    try {
      name = entry.at("name").get<std::string>();
      file = entry.at("file").get<std::string>();
      shape = entry.at("shape").get<std::vector<std::int64_t>>();
    } catch (const json::exception& e) {
      throw FormatError(index_path.string() + ": bad tensor entry: " + e.what());
    }
    const fs::path tensor_path = dir / file;
    if (!fs::exists(tensor_path)) {
      throw ConsistencyError(index_path.string() + ": tensor '" + name + "' lists file '" + file +
                             "' which does not exist");
    }
    Tensor t = npy::read(tensor_path);
    if (t.shape != shape) {
      throw ConsistencyError("tensor '" + name + "': file shape " + npy::detail::shape_literal(t.shape) +
                             " does not match index shape " + npy::detail::shape_literal(shape));
    }
    if (!all_finite(t.values.data(), t.values.size())) {
      throw ValidationError("tensor '" + name + "' contains non-finite entries");
    }
    if (!out.emplace(name, std::move(t)).second) {
      throw ConsistencyError(index_path.string() + ": duplicate tensor name '" + name + "'");
    }
  }
  return out;
}

inline std::string tensor_file_name(const std::string& name) {
  std::string s;
  for (char c : name) {
    const bool ok = std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_' || c == '-';
    s.push_back(ok ? c : '_');
  }
  if (s.empty() || s.front() == '.') s.insert(s.begin(), '_');
  return s;
}

inline void save_checkpoint(const fs::path& dir, const CheckpointTensorMap& tensors) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory '" + dir.string() + "': " + ec.message());
  json entries = json::array();
  std::set<std::string> used;
  for (const auto& [name, tensor] : tensors) {
    std::string base = tensor_file_name(name);
    std::string file = base + ".npy";
    for (int k = 1; used.count(file); ++k) file = base + "_" + std::to_string(k) + ".npy";
    used.insert(file);
    npy::write(dir / file, tensor);
    entries.push_back({{"name", name}, {"shape", tensor.shape}, {"file", file}});
  }
  write_text(dir / "index.json", json{{"tensors", entries}}.dump(2) + "\n");
}

// ---------------------------------------------------------------------------
// Concept manifests.

inline ConceptManifest parse_manifest(const json& j, const std::string& origin) {
  ConceptManifest m;
  try {
    for (const auto& c : j.at("concepts")) {
      Concept concept_entry;
      concept_entry.id = c.at("id").get<std::int64_t>();
      concept_entry.name = c.value("name", std::string{});
      concept_entry.positive = c.at("pos").get<std::vector<std::int64_t>>();
      concept_entry.negative = c.at("neg").get<std::vector<std::int64_t>>();
      m.concepts.push_back(std::move(concept_entry));
    }
  } catch (const json::exception& e) {
    throw FormatError(origin + ": bad concept manifest: " + e.what());
  }
  std::set<std::int64_t> ids;
  for (const auto& c : m.concepts) {
    if (!ids.insert(c.id).second) {
      throw ValidationError(origin + ": duplicate concept id " + std::to_string(c.id));
    }
  }
  return m;
}

inline ConceptManifest load_manifest(const fs::path& path) {
  return parse_manifest(read_json(path), path.string());
}

// ---------------------------------------------------------------------------
// Baseline pool CSV: header `model_id,acc_in,acc_shift`.

inline std::vector<AccuracyRecord> parse_baselines_csv(const std::string& text,
                                                       const std::string& origin) {
  std::istringstream in(text);
  std::string line;
  std::vector<AccuracyRecord> out;
  int col_id = -1, col_in = -1, col_shift = -1;
  std::size_t line_no = 0;
  auto split = [](const std::string& l) {
    std::vector<std::string> cells;
    std::string cell;
    std::istringstream ls(l);
    while (std::getline(ls, cell, ',')) {
      while (!cell.empty() && std::isspace(static_cast<unsigned char>(cell.back()))) cell.pop_back();
      std::size_t b = 0;
      while (b < cell.size() && std::isspace(static_cast<unsigned char>(cell[b]))) ++b;
      cells.push_back(cell.substr(b));
    }
    return cells;
  };
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    const auto cells = split(line);
    if (col_id < 0) {
      for (int i = 0; i < static_cast<int>(cells.size()); ++i) {
        if (cells[i] == "model_id") col_id = i;
        if (cells[i] == "acc_in") col_in = i;
        if (cells[i] == "acc_shift") col_shift = i;
      }
      if (col_id < 0 || col_in < 0 || col_shift < 0) {
        throw FormatError(origin + ": header must contain model_id,acc_in,acc_shift");
      }
      continue;
    }
    const int needed = std::max({col_id, col_in, col_shift});
    if (static_cast<int>(cells.size()) <= needed) {
      throw FormatError(origin + ":" + std::to_string(line_no) + ": too few columns");
    }
    AccuracyRecord r;
    r.model_id = cells[col_id];
    try {
      std::size_t used = 0;
      r.acc_in = std::stod(cells[col_in], &used);
      if (used != cells[col_in].size()) throw std::invalid_argument("trailing");
      r.acc_shift = std::stod(cells[col_shift], &used);
      if (used != cells[col_shift].size()) throw std::invalid_argument("trailing");
    } catch (const std::exception&) {
      throw FormatError(origin + ":" + std::to_string(line_no) + ": non-numeric accuracy");
    }
    out.push_back(std::move(r));
  }
  if (col_id < 0) throw FormatError(origin + ": empty baseline CSV");
  return out;
}

inline std::vector<AccuracyRecord> load_baselines(const fs::path& path) {
  return parse_baselines_csv(npy::read_file_bytes(path), path.string());
}

// ---------------------------------------------------------------------------
// Content digests.

inline std::string sha256_hex(std::string_view bytes) {
  std::array<unsigned char, EVP_MAX_MD_SIZE> md{};
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), md.data(), &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  out.reserve(len * 2);
  for (unsigned int i = 0; i < len; ++i) {
    out.push_back(kHex[md[i] >> 4]);
    out.push_back(kHex[md[i] & 0xF]);
  }
  return out;
}

/// "sha256:<hex>" of a file's bytes; for a directory, of its index.json and
/// every regular file listed in sorted order.
inline std::string file_digest(const fs::path& path) {
  if (fs::is_directory(path)) {
    std::vector<fs::path> files;
    for (const auto& e : fs::directory_iterator(path)) {
      if (e.is_regular_file()) files.push_back(e.path());
    }
    std::sort(files.begin(), files.end());
    std::string acc;
    for (const auto& f : files) {
      acc += f.filename().string();
      acc.push_back('\0');
      acc += sha256_hex(npy::read_file_bytes(f));
    }
    return "sha256:" + sha256_hex(acc);
  }
  return "sha256:" + sha256_hex(npy::read_file_bytes(path));
}

}  // namespace repscope::io

#endif  // REPSCOPE_IO_HPP_
