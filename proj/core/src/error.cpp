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
#include "cpr/error.hpp"

namespace cpr {

DataError::DataError(const std::string& message) : Error(message) {}

DataError::DataError(const std::string& source, std::size_t line,
                     const std::string& message)
    : Error(source + ":" + std::to_string(line) + ": " + message),
      line_(line) {}

}  // namespace cpr
