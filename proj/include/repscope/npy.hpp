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

// Reader and writer for NPY version 1.0 files holding little-endian float32
// or float64 arrays in C order. Anything else is rejected.
//
// Layout: "\x93NUMPY" | major=1 | minor=0 | uint16 LE header length |
// ASCII python dict literal {'descr': '<f8', 'fortran_order': False,
// 'shape': (3, 4), } padded with spaces and terminated by '\n' | payload.

#ifndef REPSCOPE_NPY_HPP_
#define REPSCOPE_NPY_HPP_

#include <bit>
#include <cctype>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iterator>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "repscope/error.hpp"
#include "repscope/types.hpp"

namespace repscope::npy {

static_assert(std::endian::native == std::endian::little,
              "NPY payloads are read in place; big-endian hosts are not supported");

inline constexpr char kMagic[] = "\x93NUMPY";
inline constexpr std::size_t kMagicSize = 6;
inline constexpr std::size_t kPreambleSize = kMagicSize + 2 + 2;

namespace detail {

// Minimal tokenizer for the python dict literal in an NPY header.
class HeaderParser {
 public:
  explicit HeaderParser(std::string_view text) : text_(text) {}

  struct Header {
    std::string descr;
    bool fortran_order = false;
    std::vector<std::int64_t> shape;
    bool has_descr = false, has_order = false, has_shape = false;
  };

  Header parse() {
    Header h;
    expect('{');
    while (true) {
      skip_ws();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      const std::string key = parse_string();
      expect(':');
      if (key == "descr") {
        h.descr = parse_string();
        h.has_descr = true;
      } else if (key == "fortran_order") {
        h.fortran_order = parse_bool();
        h.has_order = true;
      } else if (key == "shape") {
        h.shape = parse_tuple();
        h.has_shape = true;
      } else {
        throw FormatError("unexpected key '" + key + "' in NPY header");
      }
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != '}') {
        fail("expected ',' or '}'");
      }
    }
    skip_ws();
    if (pos_ != text_.size()) fail("trailing characters after header dict");
    if (!h.has_descr || !h.has_order || !h.has_shape) {
      throw FormatError("NPY header is missing one of descr, fortran_order, shape");
    }
    return h;
  }

 private:
  [[noreturn]] void fail(const std::string& what) const {
    throw FormatError("malformed NPY header at offset " + std::to_string(pos_) + ": " + what);
  }

  char peek() const { return pos_ < text_.size() ? text_[pos_] : '\0'; }

  void skip_ws() {
    while (pos_ < text_.size() && std::isspace(static_cast<unsigned char>(text_[pos_]))) ++pos_;
  }

  void expect(char c) {
    skip_ws();
    if (peek() != c) fail(std::string("expected '") + c + "'");
    ++pos_;
  }

  std::string parse_string() {
    skip_ws();
    const char quote = peek();
    if (quote != '\'' && quote != '"') fail("expected quoted string");
    const auto end = text_.find(quote, pos_ + 1);
    if (end == std::string_view::npos) fail("unterminated string");
    std::string out(text_.substr(pos_ + 1, end - pos_ - 1));
    pos_ = end + 1;
    return out;
  }

  bool parse_bool() {
    skip_ws();
    if (text_.substr(pos_, 4) == "True") {
      pos_ += 4;
      return true;
    }
    if (text_.substr(pos_, 5) == "False") {
      pos_ += 5;
      return false;
    }
    fail("expected True or False");
  }

  std::vector<std::int64_t> parse_tuple() {
    expect('(');
    std::vector<std::int64_t> dims;
    while (true) {
      skip_ws();
      if (peek() == ')') {
        ++pos_;
        return dims;
      }
      if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected dimension");
      std::int64_t v = 0;
      while (std::isdigit(static_cast<unsigned char>(peek()))) {
        v = v * 10 + (text_[pos_] - '0');
        if (v > (std::int64_t{1} << 48)) fail("dimension too large");
        ++pos_;
      }
      dims.push_back(v);
      skip_ws();
      if (peek() == ',') {
        ++pos_;
      } else if (peek() != ')') {
        fail("expected ',' or ')'");
      }
    }
  }

  std::string_view text_;
  std::size_t pos_ = 0;
};

inline std::string shape_literal(const std::vector<std::int64_t>& shape) {
  std::string s = "(";
  for (std::size_t i = 0; i < shape.size(); ++i) {
    if (i) s += ", ";
    s += std::to_string(shape[i]);
  }
  if (shape.size() == 1) s += ",";
  return s + ")";
}

}  // namespace detail

/// Parses an in-memory NPY image.
inline Tensor parse(std::string_view bytes, const std::string& origin = "<memory>") {
  if (bytes.size() < kPreambleSize || bytes.substr(0, kMagicSize) != std::string_view(kMagic, kMagicSize)) {
    throw FormatError(origin + ": not an NPY file (bad magic)");
  }
  const auto major = static_cast<unsigned char>(bytes[6]);
  const auto minor = static_cast<unsigned char>(bytes[7]);
  if (major != 1 || minor != 0) {
    throw FormatError(origin + ": unsupported NPY version " + std::to_string(major) + "." +
                      std::to_string(minor) + " (only 1.0 is accepted)");
  }
  const std::size_t header_len = static_cast<unsigned char>(bytes[8]) |
                                 (static_cast<std::size_t>(static_cast<unsigned char>(bytes[9])) << 8);
  if (bytes.size() < kPreambleSize + header_len) {
    throw FormatError(origin + ": truncated NPY header");
  }
  std::string_view header_text = bytes.substr(kPreambleSize, header_len);
  // The header ends with '\n' and may be padded with spaces before it.
  while (!header_text.empty() && (header_text.back() == '\n' || header_text.back() == ' ')) {
    header_text.remove_suffix(1);
  }
  const auto header = detail::HeaderParser(header_text).parse();

  Tensor t;
  std::size_t width = 0;
  if (header.descr == "<f4") {
    t.dtype = DType::kFloat32;
    width = 4;
  } else if (header.descr == "<f8") {
    t.dtype = DType::kFloat64;
    width = 8;
  } else {
    throw FormatError(origin + ": unsupported dtype '" + header.descr +
                      "' (expected '<f4' or '<f8')");
  }
  if (header.fortran_order) throw FormatError(origin + ": Fortran-ordered arrays are not supported");
  t.shape = header.shape;

  const std::size_t count = t.element_count();
  const std::string_view payload = bytes.substr(kPreambleSize + header_len);
  if (payload.size() != count * width) {
    throw FormatError(origin + ": payload holds " + std::to_string(payload.size()) +
                      " bytes, header implies " + std::to_string(count * width));
  }
  t.values.resize(count);
  if (t.dtype == DType::kFloat64) {
    std::memcpy(t.values.data(), payload.data(), count * 8);
  } else {
    for (std::size_t i = 0; i < count; ++i) {
      float f;
      std::memcpy(&f, payload.data() + i * 4, 4);
      t.values[i] = static_cast<double>(f);
    }
  }
  return t;
}

inline std::string read_file_bytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("error while reading '" + path.string() + "'");
  return bytes;
}

inline Tensor read(const std::filesystem::path& path) {
  return parse(read_file_bytes(path), path.string());
}

/// Serializes a tensor in its own dtype. Float64 values narrowed to float32
/// are rounded to nearest.
inline std::string serialize(const Tensor& t) {
  if (t.values.size() != t.element_count()) {
    throw ShapeError("tensor holds " + std::to_string(t.values.size()) +
                     " values but its shape implies " + std::to_string(t.element_count()));
  }
  const bool f32 = t.dtype == DType::kFloat32;
  std::string header = std::string("{'descr': '") + (f32 ? "<f4" : "<f8") +
                       "', 'fortran_order': False, 'shape': " + detail::shape_literal(t.shape) +
                       ", }";
  // Pad so that the payload starts on a 64-byte boundary.
  std::size_t total = kPreambleSize + header.size() + 1;
  header.append((64 - total % 64) % 64, ' ');
  header.push_back('\n');
  if (header.size() > 0xFFFF) throw ShapeError("NPY v1.0 header too long for this shape");

  std::string out(kMagic, kMagicSize);
  out.push_back(1);
  out.push_back(0);
  out.push_back(static_cast<char>(header.size() & 0xFF));
  out.push_back(static_cast<char>((header.size() >> 8) & 0xFF));
  out += header;
  const std::size_t offset = out.size();
  const std::size_t width = f32 ? 4 : 8;
  out.resize(offset + t.values.size() * width);
  if (f32) {
    for (std::size_t i = 0; i < t.values.size(); ++i) {
      const auto f = static_cast<float>(t.values[i]);
      std::memcpy(out.data() + offset + i * 4, &f, 4);
    }
  } else {
    std::memcpy(out.data() + offset, t.values.data(), t.values.size() * 8);
  }
  return out;
}

inline void write(const std::filesystem::path& path, const Tensor& t) {
  const std::string bytes = serialize(t);
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("error while writing '" + path.string() + "'");
}

inline Tensor from_matrix(const Matrix& m, DType dtype = DType::kFloat64) {
  Tensor t;
  t.shape = {static_cast<std::int64_t>(m.rows()), static_cast<std::int64_t>(m.cols())};
  t.values.assign(m.data(), m.data() + m.size());
  t.dtype = dtype;
  return t;
}

/// Rank-2 view of a tensor as a row-major matrix. Throws ShapeError otherwise.
inline Matrix to_matrix(const Tensor& t, const std::string& origin = "<tensor>") {
  if (t.shape.size() != 2) {
    throw ShapeError(origin + ": expected a rank-2 array, got rank " +
                     std::to_string(t.shape.size()));
  }
  Matrix m(t.shape[0], t.shape[1]);
  std::copy(t.values.begin(), t.values.end(), m.data());
  return m;
}

}  // namespace repscope::npy

#endif  // REPSCOPE_NPY_HPP_
