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

#include <compare>
#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <memory>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

namespace cpr {

enum class EntityId : std::uint32_t {};
enum class RelationId : std::uint32_t {};

constexpr std::uint32_t to_index(EntityId id) {
  return static_cast<std::uint32_t>(id);
}
constexpr std::uint32_t to_index(RelationId id) {
  return static_cast<std::uint32_t>(id);
}

// A relation label together with the direction it is traversed in.
// (r, inverted=true) is r^-1.
struct SignedRelation {
  RelationId relation{};
  bool inverted = false;

  constexpr SignedRelation inverse() const { return {relation, !inverted}; }
  // Dense packing used for hashing and compact storage.
  constexpr std::uint32_t code() const {
    return (to_index(relation) << 1) | (inverted ? 1U : 0U);
  }
  static constexpr SignedRelation from_code(std::uint32_t code) {
    return {RelationId{code >> 1}, (code & 1U) != 0};
  }
  friend constexpr auto operator<=>(SignedRelation a, SignedRelation b) {
    return a.code() <=> b.code();
  }
  friend constexpr bool operator==(SignedRelation a, SignedRelation b) {
    return a.code() == b.code();
  }
};

struct Triple {
  EntityId head{};
  RelationId relation{};
  EntityId tail{};

  friend constexpr auto operator<=>(const Triple&, const Triple&) = default;
};

struct TripleHash {
  std::size_t operator()(const Triple& t) const noexcept;
};

// Bijective string <-> dense id table. Ids are assigned in first-seen order.
class InternTable {
 public:
  std::uint32_t intern(std::string_view name);
  std::optional<std::uint32_t> find(std::string_view name) const;
  const std::string& name(std::uint32_t id) const { return names_.at(id); }
  std::size_t size() const { return names_.size(); }
  std::span<const std::string> names() const { return names_; }

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::uint32_t, StringHash, std::equal_to<>>
      index_;
};

struct SymbolTables {
  InternTable entities;
  InternTable relations;

  const std::string& entity_name(EntityId id) const {
    return entities.name(to_index(id));
  }
  const std::string& relation_name(RelationId id) const {
    return relations.name(to_index(id));
  }
  std::optional<EntityId> find_entity(std::string_view name) const;
  std::optional<RelationId> find_relation(std::string_view name) const;
};

struct TripleFormat {
  char delimiter = '\t';
};

struct TripleFile {
  std::shared_ptr<const SymbolTables> symbols;
  std::vector<Triple> triples;     // deduplicated, first-seen order
  std::size_t duplicate_lines = 0;
};

// Reads `<head><delim><relation><delim><tail>` lines. Blank lines and lines
// starting with '#' are skipped. Throws DataError on a malformed line (with
// its line number) or when the input holds no triples.
TripleFile load_triples(const std::filesystem::path& path,
                        TripleFormat format = {});
TripleFile parse_triples(std::istream& in, std::string_view source_name,
                         TripleFormat format = {});

struct Edge {
  EntityId neighbor{};
  SignedRelation relation{};

  friend constexpr bool operator==(const Edge&, const Edge&) = default;
};

// Hides the two directed edges of one query triple (h -r-> t and
// t -r^-1-> h) for the duration of one extraction. The graph itself is
// never modified.
class EdgeMask {
 public:
  EdgeMask() = default;
  explicit EdgeMask(const Triple& hidden) : hidden_(hidden) {}

  bool empty() const { return !hidden_.has_value(); }
  const std::optional<Triple>& hidden() const { return hidden_; }

  bool hides(EntityId from, const Edge& edge) const {
    if (!hidden_) return false;
    const Triple& t = *hidden_;
    if (edge.relation.relation != t.relation) return false;
    if (!edge.relation.inverted) {
      return from == t.head && edge.neighbor == t.tail;
    }
    return from == t.tail && edge.neighbor == t.head;
  }

 private:
  std::optional<Triple> hidden_;
};

struct GraphStats {
  std::size_t entities = 0;
  std::size_t relations = 0;
  std::size_t triples = 0;
  std::size_t edges = 0;
  bool inverse_edges = false;
};

// Immutable multi-relation graph stored as a CSR adjacency. For every
// stored triple (h, r, t), adjacency(h) holds (t, r) and, when built with
// inverse edges, adjacency(t) holds (h, r^-1). Entries keep triple
// insertion order. Safe to share across threads once built.
class KnowledgeGraph {
 public:
  KnowledgeGraph() = default;

  // Duplicate triples are collapsed. Throws DataError when a triple refers
  // to an id outside the symbol tables.
  static KnowledgeGraph build(std::shared_ptr<const SymbolTables> symbols,
                              std::span<const Triple> triples,
                              bool add_inverse = true);

  // Same symbols and inverse setting, minus the given triples.
  KnowledgeGraph without(std::span<const Triple> hidden) const;

  std::span<const Edge> adjacency(EntityId node) const {
    const auto i = to_index(node);
    return {edges_.data() + offsets_[i], edges_.data() + offsets_[i + 1]};
  }

  // Adjacency minus entries hidden by `mask`. Throws std::out_of_range on an
  // invalid node id.
  std::vector<Edge> neighbors(EntityId node, const EdgeMask& mask = {}) const;

  bool contains_triple(EntityId head, RelationId relation,
                       EntityId tail) const {
    return triple_set_.contains(Triple{head, relation, tail});
  }
  bool contains_triple(const Triple& t) const {
    return triple_set_.contains(t);
  }

  bool valid(EntityId node) const { return to_index(node) < entity_count(); }
  std::size_t degree(EntityId node) const { return adjacency(node).size(); }

  std::size_t entity_count() const {
    return offsets_.empty() ? 0 : offsets_.size() - 1;
  }
  std::size_t relation_count() const {
    return symbols_ ? symbols_->relations.size() : 0;
  }
  std::size_t triple_count() const { return triples_.size(); }
  std::size_t edge_count() const { return edges_.size(); }
  bool has_inverse_edges() const { return add_inverse_; }

  std::span<const Triple> triples() const { return triples_; }
  const SymbolTables& symbols() const { return *symbols_; }
  const std::shared_ptr<const SymbolTables>& shared_symbols() const {
    return symbols_;
  }

  GraphStats stats() const;

 private:
  std::shared_ptr<const SymbolTables> symbols_;
  std::vector<std::size_t> offsets_;
  std::vector<Edge> edges_;
  std::vector<Triple> triples_;
  std::unordered_set<Triple, TripleHash> triple_set_;
  bool add_inverse_ = true;
};

// Convenience: load + build.
KnowledgeGraph load_graph(const std::filesystem::path& path,
                          TripleFormat format = {}, bool add_inverse = true);

// `entities=N\nrelations=N\ntriples=N\nedges=N\ninverse_edges=B\n`
std::string format_stats(const GraphStats& stats);

}  // namespace cpr
