// Copyright 2026 The cpr Authors
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

namespace cpr {

// Base class for every error raised by the library. The CLI maps the
// concrete subclasses onto process exit codes.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Invalid or inconsistent configuration (bad flag, missing input file,
// mismatched artifact stamps).
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Malformed input data. Carries the source name and 1-based line number
// when the failure can be pinned to a line.
class DataError : public Error {
 public:
  explicit DataError(const std::string& message);
  DataError(const std::string& source, std::size_t line,
            const std::string& message);

  std::size_t line() const { return line_; }

 private:
  std::size_t line_ = 0;
};

// A computation that could not complete (non-finite objective, exhausted
// search budget, internal invariant violated).
class RuntimeFailure : public Error {
 public:
  using Error::Error;
};

}  // namespace cpr
