// Copyright 2026 The ulab Authors.
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

#ifndef ULAB_ERRORS_H_
#define ULAB_ERRORS_H_

#include <cstddef>
#include <stdexcept>
#include <string>

namespace ulab {

// Caller violated a documented precondition (bad size, empty batch, ...).
class UsageError : public std::invalid_argument {
 public:
  explicit UsageError(const std::string& what) : std::invalid_argument(what) {}
};

// A value lies outside its domain, e.g. a token id >= |V|.
class InputDomainError : public std::out_of_range {
 public:
  explicit InputDomainError(const std::string& what)
      : std::out_of_range(what) {}
};

// Data failed validation against a schema or vocabulary.
class ValidationError : public std::runtime_error {
 public:
  explicit ValidationError(const std::string& what)
      : std::runtime_error(what) {}
};

// Operation is not defined for this configuration.
class UnsupportedError : public std::runtime_error {
 public:
  explicit UnsupportedError(const std::string& what)
      : std::runtime_error(what) {}
};

class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t line);

  // 1-based line number, 0 when not line-oriented.
  std::size_t line() const { return line_; }

 private:
  std::size_t line_;
};

class NumericDivergenceError : public std::runtime_error {
 public:
  NumericDivergenceError(const std::string& what, long epoch);

  long epoch() const { return epoch_; }

 private:
  long epoch_;
};

}  // namespace ulab

#endif  // ULAB_ERRORS_H_
