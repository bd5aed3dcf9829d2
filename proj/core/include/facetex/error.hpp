// Copyright 2026 The facetex Authors.
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

#ifndef FACETEX_ERROR_HPP_
#define FACETEX_ERROR_HPP_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace facetex {

// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Operand shapes do not conform.
class ShapeError : public Error {
 public:
  using Error::Error;
};

// A value is outside the domain of an operation (division by zero, sqrt of a
// negative number, non-unit normal, non-finite coordinate).
class DomainError : public Error {
 public:
  using Error::Error;
};

// Misuse of the autodiff tape (detached loss, repeated backward, ...).
class TapeError : public Error {
 public:
  using Error::Error;
};

// Malformed binary or text file. `offset()` is the byte offset at which the
// problem was detected.
class ParseError : public Error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const noexcept { return offset_; }

 private:
  std::size_t offset_;
};

// Structurally valid data that violates a semantic invariant.
class ValidationError : public Error {
 public:
  using Error::Error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Divergence, NaN losses, empty coverage and similar run-time numeric failures.
class NumericError : public Error {
 public:
  using Error::Error;
};

}  // namespace facetex

#endif  // FACETEX_ERROR_HPP_
