// Copyright 2026 The qtp Authors
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

#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace qtp {

/// Base class of every error raised by the engine.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A composite Hilbert space would exceed the configured dimension cap.
class DimensionError : public Error {
 public:
  using Error::Error;
};

/// An operation was called outside its precondition (bad input data).
class DomainError : public Error {
 public:
  using Error::Error;
};

/// A physical validity condition failed. `condition` names it, e.g. "nons2".
class ValidationError : public Error {
 public:
  ValidationError(std::string condition, const std::string& message)
      : Error(message), condition_(std::move(condition)) {}
  const std::string& condition() const { return condition_; }

 private:
  std::string condition_;
};

/// Malformed input file. Carries the source, line and field where known.
class ParseError : public Error {
 public:
  ParseError(std::string source, int line, std::string field, const std::string& message)
      : Error(format(source, line, field, message)),
        source_(std::move(source)),
        line_(line),
        field_(std::move(field)) {}

  const std::string& source() const { return source_; }
  int line() const { return line_; }
  const std::string& field() const { return field_; }

 private:
  static std::string format(const std::string& source, int line, const std::string& field,
                            const std::string& message) {
    std::string out = source;
    if (line > 0) out += ":" + std::to_string(line);
    if (!field.empty()) out += " [" + field + "]";
    return out + ": " + message;
  }

  std::string source_;
  int line_;
  std::string field_;
};

/// Non-fatal diagnostics accumulated during a computation.
class Warnings {
 public:
  void add(std::string message) { messages_.push_back(std::move(message)); }
  const std::vector<std::string>& messages() const { return messages_; }
  bool empty() const { return messages_.empty(); }
  void merge(const Warnings& other) {
    messages_.insert(messages_.end(), other.messages_.begin(), other.messages_.end());
  }

 private:
  std::vector<std::string> messages_;
};

}  // namespace qtp
