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

#ifndef REPSCOPE_ERROR_HPP_
#define REPSCOPE_ERROR_HPP_

#include <stdexcept>
#include <string>

namespace repscope {

/// Base class of every error raised by the toolkit. The CLI maps any
/// `Error` to exit code 1.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Malformed file contents (bad NPY magic, unparsable header, bad JSON).
class FormatError : public Error {
 public:
  using Error::Error;
};

/// Array rank or dimensions do not match what the caller requires.
class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Input violates a documented precondition (range, finiteness, flags).
class ValidationError : public Error {
 public:
  using Error::Error;
};

/// Input is well-formed but the quantity is mathematically undefined
/// (constant row, zero vector, singular fit, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

/// Several inputs disagree with each other (index vs files, name sets).
class ConsistencyError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

}  // namespace repscope

#endif  // REPSCOPE_ERROR_HPP_
