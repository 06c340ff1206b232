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
#include "cpr/graph.hpp"

#include <fstream>
#include <istream>
#include <sstream>
#include <stdexcept>

#include "cpr/error.hpp"
#include "cpr/random.hpp"

namespace cpr {

std::size_t TripleHash::operator()(const Triple& t) const noexcept {
  std::uint64_t h = mix64(to_index(t.head));
  h = mix64(h ^ to_index(t.relation));
  h = mix64(h ^ to_index(t.tail));
  return static_cast<std::size_t>(h);
}

std::uint32_t InternTable::intern(std::string_view name) {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  const auto id = static_cast<std::uint32_t>(names_.size());
  names_.emplace_back(name);
  index_.emplace(names_.back(), id);
  return id;
}

std::optional<std::uint32_t> InternTable::find(std::string_view name) const {
  if (auto it = index_.find(name); it != index_.end()) return it->second;
  return std::nullopt;
}

std::optional<EntityId> SymbolTables::find_entity(std::string_view name) const {
  if (auto id = entities.find(name)) return EntityId{*id};
  return std::nullopt;
}

std::optional<RelationId> SymbolTables::find_relation(
    std::string_view name) const {
  if (auto id = relations.find(name)) return RelationId{*id};
  return std::nullopt;
}

namespace {

std::string_view trim_line_end(std::string_view line) {
  while (!line.empty() && (line.back() == '\r' || line.back() == '\n')) {
    line.remove_suffix(1);
  }
  return line;
}

bool is_blank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

}  // namespace

TripleFile parse_triples(std::istream& in, std::string_view source_name,
                         TripleFormat format) {
  auto symbols = std::make_shared<SymbolTables>();
  TripleFile out;
  std::unordered_set<Triple, TripleHash> seen;
  const std::string source(source_name);

  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view line = trim_line_end(raw);
    if (is_blank(line) || line.front() == '#') continue;

    std::string_view fields[3];
    std::size_t count = 0;
    std::size_t start = 0;
    while (true) {
      const auto pos = line.find(format.delimiter, start);
      const auto field = line.substr(start, pos == std::string_view::npos
                                                ? std::string_view::npos
                                                : pos - start);
      if (count < 3) fields[count] = field;
      ++count;
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    if (count != 3) {
      throw DataError(source, line_no,
                      "expected 3 fields, found " + std::to_string(count));
    }
    for (const auto& f : fields) {
      if (f.empty()) throw DataError(source, line_no, "empty field");
    }
    const Triple t{EntityId{symbols->entities.intern(fields[0])},
                   RelationId{symbols->relations.intern(fields[1])},
                   EntityId{symbols->entities.intern(fields[2])}};
    if (seen.insert(t).second) {
      out.triples.push_back(t);
    } else {
      ++out.duplicate_lines;
    }
  }
  if (out.triples.empty()) {
    throw DataError(source + ": no triples found");
  }
  out.symbols = std::move(symbols);
  return out;
}

TripleFile load_triples(const std::filesystem::path& path,
                        TripleFormat format) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open triple file " + path.string());
  return parse_triples(in, path.string(), format);
}

KnowledgeGraph KnowledgeGraph::build(
    std::shared_ptr<const SymbolTables> symbols,
    std::span<const Triple> triples, bool add_inverse) {
  if (!symbols) throw std::invalid_argument("symbol tables are required");
  KnowledgeGraph g;
  g.symbols_ = std::move(symbols);
  g.add_inverse_ = add_inverse;

  const std::size_t n = g.symbols_->entities.size();
  const std::size_t m = g.symbols_->relations.size();
  g.triples_.reserve(triples.size());
  g.triple_set_.reserve(triples.size());
  for (const Triple& t : triples) {
    if (to_index(t.head) >= n || to_index(t.tail) >= n ||
        to_index(t.relation) >= m) {
      throw DataError("triple refers to an unknown entity or relation");
    }
    if (g.triple_set_.insert(t).second) g.triples_.push_back(t);
  }

  std::vector<std::size_t> counts(n + 1, 0);
  for (const Triple& t : g.triples_) {
    ++counts[to_index(t.head) + 1];
    if (add_inverse) ++counts[to_index(t.tail) + 1];
  }
  g.offsets_.assign(n + 1, 0);
  for (std::size_t i = 0; i < n; ++i) {
    g.offsets_[i + 1] = g.offsets_[i] + counts[i + 1];
  }
  g.edges_.resize(g.offsets_[n]);
  std::vector<std::size_t> cursor(g.offsets_.begin(), g.offsets_.end() - 1);
  for (const Triple& t : g.triples_) {
    g.edges_[cursor[to_index(t.head)]++] = Edge{t.tail, {t.relation, false}};
    if (add_inverse) {
      g.edges_[cursor[to_index(t.tail)]++] = Edge{t.head, {t.relation, true}};
    }
  }
  return g;
}

KnowledgeGraph KnowledgeGraph::without(std::span<const Triple> hidden) const {
  const std::unordered_set<Triple, TripleHash> drop(hidden.begin(),
                                                    hidden.end());
  std::vector<Triple> kept;
  kept.reserve(triples_.size());
  for (const Triple& t : triples_) {
    if (!drop.contains(t)) kept.push_back(t);
  }
  return build(symbols_, kept, add_inverse_);
}

std::vector<Edge> KnowledgeGraph::neighbors(EntityId node,
                                            const EdgeMask& mask) const {
  if (!valid(node)) {
    throw std::out_of_range("entity id " + std::to_string(to_index(node)) +
                            " is not in the graph");
  }
  std::vector<Edge> out;
  for (const Edge& e : adjacency(node)) {
    if (!mask.hides(node, e)) out.push_back(e);
  }
  return out;
}

GraphStats KnowledgeGraph::stats() const {
  return {entity_count(), relation_count(), triple_count(), edge_count(),
          add_inverse_};
}

KnowledgeGraph load_graph(const std::filesystem::path& path,
                          TripleFormat format, bool add_inverse) {
  auto file = load_triples(path, format);
  return KnowledgeGraph::build(file.symbols, file.triples, add_inverse);
}

std::string format_stats(const GraphStats& stats) {
  std::ostringstream os;
  os << "entities=" << stats.entities << '\n'
     << "relations=" << stats.relations << '\n'
     << "triples=" << stats.triples << '\n'
     << "edges=" << stats.edges << '\n'
     << "inverse_edges=" << (stats.inverse_edges ? "true" : "false") << '\n';
  return os.str();
}

}  // namespace cpr
