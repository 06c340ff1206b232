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

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "cpr/graph.hpp"

namespace cpr {

// A sequence of signed relations read in source -> target direction.
struct RelationPath {
  std::vector<SignedRelation> steps;

  std::size_t length() const { return steps.size(); }
  bool empty() const { return steps.empty(); }

  // The same path walked from the other end: reversed, each step inverted.
  RelationPath reversed() const;

  friend auto operator<=>(const RelationPath&, const RelationPath&) = default;
  friend bool operator==(const RelationPath&, const RelationPath&) = default;
};

using PathSet = std::set<RelationPath>;

enum class PathStyle {
  kAscii,    // "r1->r2^-1", the on-disk form
  kDisplay,  // "r1 → r2⁻¹", for reports
};

std::string render_relation(const SymbolTables& symbols, SignedRelation rel,
                            PathStyle style = PathStyle::kAscii);
std::string render_path(const SymbolTables& symbols, const RelationPath& path,
                        PathStyle style = PathStyle::kAscii);

// Inverse of render_path(kAscii). Throws DataError on an unknown relation.
RelationPath parse_path(const SymbolTables& symbols, std::string_view text);

// Path sets serialize as ';'-joined ascii paths; the empty set is "".
std::string render_path_set(const SymbolTables& symbols, const PathSet& paths);
PathSet parse_path_set(const SymbolTables& symbols, std::string_view text);

}  // namespace cpr
