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
#include "cpr/path.hpp"

#include <algorithm>

#include "cpr/error.hpp"

namespace cpr {

namespace {

constexpr std::string_view kAsciiArrow = "->";
constexpr std::string_view kAsciiInverse = "^-1";
constexpr std::string_view kDisplayArrow = " → ";
constexpr std::string_view kDisplayInverse = "⁻¹";

}  // namespace

RelationPath RelationPath::reversed() const {
  RelationPath out;
  out.steps.reserve(steps.size());
  for (auto it = steps.rbegin(); it != steps.rend(); ++it) {
    out.steps.push_back(it->inverse());
  }
  return out;
}

std::string render_relation(const SymbolTables& symbols, SignedRelation rel,
                            PathStyle style) {
  std::string out = symbols.relation_name(rel.relation);
  if (rel.inverted) {
    out += style == PathStyle::kAscii ? kAsciiInverse : kDisplayInverse;
  }
  return out;
}

std::string render_path(const SymbolTables& symbols, const RelationPath& path,
                        PathStyle style) {
  const auto arrow = style == PathStyle::kAscii ? kAsciiArrow : kDisplayArrow;
  std::string out;
  for (std::size_t i = 0; i < path.steps.size(); ++i) {
    if (i > 0) out += arrow;
    out += render_relation(symbols, path.steps[i], style);
  }
  return out;
}

RelationPath parse_path(const SymbolTables& symbols, std::string_view text) {
  RelationPath path;
  while (!text.empty()) {
    const auto pos = text.find(kAsciiArrow);
    std::string_view token = text.substr(0, pos);
    text = pos == std::string_view::npos ? std::string_view{}
                                         : text.substr(pos + kAsciiArrow.size());
    bool inverted = false;
    if (token.ends_with(kAsciiInverse) &&
        !symbols.find_relation(token).has_value()) {
      token.remove_suffix(kAsciiInverse.size());
      inverted = true;
    }
    auto rel = symbols.find_relation(token);
    if (!rel) {
      throw DataError("unknown relation '" + std::string(token) + "' in path");
    }
    path.steps.push_back({*rel, inverted});
  }
  if (path.steps.empty()) throw DataError("empty relation path");
  return path;
}

std::string render_path_set(const SymbolTables& symbols, const PathSet& paths) {
  std::string out;
  for (const auto& p : paths) {
    if (!out.empty()) out += ';';
    out += render_path(symbols, p);
  }
  return out;
}

PathSet parse_path_set(const SymbolTables& symbols, std::string_view text) {
  PathSet out;
  while (!text.empty()) {
    const auto pos = text.find(';');
    out.insert(parse_path(symbols, text.substr(0, pos)));
    if (pos == std::string_view::npos) break;
    text = text.substr(pos + 1);
  }
  return out;
}

}  // namespace cpr
