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

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cpr/graph.hpp"
#include "cpr/random.hpp"

namespace cpr {

enum class Provenance { kObserved, kHeadCorrupted, kTailCorrupted };

std::string_view provenance_name(Provenance p);
std::optional<Provenance> parse_provenance(std::string_view name);

struct LabeledInstance {
  EntityId head{};
  EntityId tail{};
  bool positive = false;
  Provenance provenance = Provenance::kObserved;

  friend bool operator==(const LabeledInstance&, const LabeledInstance&) =
      default;
};

struct DatasetOptions {
  std::size_t cap = 1000;     // positives drawn per relation
  double train_ratio = 0.8;
  std::size_t negatives_per_side = 2;
  std::size_t max_retries = 100;  // rejection draws per negative slot
};

struct RelationDataset {
  RelationId relation{};
  std::uint64_t seed = 0;
  std::vector<LabeledInstance> train;
  std::vector<LabeledInstance> test;
  std::size_t train_shortfall = 0;  // negatives that could not be drawn
  std::size_t test_shortfall = 0;
  std::vector<std::string> warnings;

  std::vector<Triple> test_positive_triples() const;
};

// Relations with at least min_instances distinct triples, ascending by id.
// With k set, a uniform random subset of size k (still ascending). Throws
// ConfigError when k exceeds the qualifying count.
std::vector<RelationId> select_test_relations(const KnowledgeGraph& graph,
                                              std::size_t min_instances,
                                              std::optional<std::size_t> k,
                                              Rng& rng);

struct PositiveSplit {
  std::vector<Triple> train;
  std::vector<Triple> test;
  std::vector<std::string> warnings;
};

// Shuffle the relation's triples, keep the first `cap`, and put
// round(ratio * kept) of them in train.
PositiveSplit split_relation(const KnowledgeGraph& graph, RelationId relation,
                             std::size_t cap, double ratio, Rng& rng);

struct NegativeBatch {
  // Grouped by positive: the negatives of positives[0] first, and so on.
  std::vector<LabeledInstance> negatives;
  std::vector<std::size_t> owner;  // index into positives, per negative
  std::size_t shortfall = 0;
  std::vector<std::string> warnings;
};

// For each positive (h, t): negatives_per_side instances (h', t) with h'
// from the relation's head pool and as many (h, t') with t' from its tail
// pool. Candidates forming an observed triple of the relation, or repeating
// a negative of the same positive, are redrawn up to max_retries times; after
// that the slot takes a uniform pick among the valid candidates left, so it
// stays empty only when the pool has none.
NegativeBatch generate_negatives(const KnowledgeGraph& graph,
                                 RelationId relation,
                                 std::span<const Triple> positives, Rng& rng,
                                 const DatasetOptions& options = {});

// Split + negatives for train and test, each list shuffled with the
// relation seed. `graph` must be the full graph (negatives are checked
// against every observed triple).
RelationDataset make_relation_dataset(const KnowledgeGraph& graph,
                                      RelationId relation,
                                      std::uint64_t relation_seed,
                                      const DatasetOptions& options = {});

struct EvaluationGraph {
  KnowledgeGraph graph;
  std::size_t hidden_triples = 0;
  std::size_t hidden_edges = 0;
};

// The graph used for all feature extraction: every test positive is
// removed in both directions.
EvaluationGraph evaluation_graph(const KnowledgeGraph& graph,
                                 std::span<const Triple> test_positives);

// `<head>\t<tail>\t<1|0>\t<provenance>` lines.
void write_instances(std::ostream& out, const SymbolTables& symbols,
                     std::span<const LabeledInstance> instances);
std::vector<LabeledInstance> read_instances(std::istream& in,
                                            const SymbolTables& symbols,
                                            std::string_view source_name);

}  // namespace cpr
