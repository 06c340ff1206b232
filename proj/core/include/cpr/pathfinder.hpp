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
#include <optional>
#include <span>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "cpr/embedding.hpp"
#include "cpr/graph.hpp"
#include "cpr/path.hpp"
#include "cpr/random.hpp"

namespace cpr {

// Path-finding strategies.
//   kContext        context-aware bidirectional walk (C-PR)
//   kBidirectional  the same walk without any embedding filter (BB-PR)
//   kUnidirectional two-sided unidirectional walks (B-PR)
//   kDna            two-sided unidirectional walks with a fixed similarity
//                   threshold against the far endpoint (DNA-PR)
enum class Method { kContext, kBidirectional, kUnidirectional, kDna };

std::string_view method_name(Method method);  // "cpr", "bb", "b", "dna"
std::optional<Method> parse_method(std::string_view name);
bool method_uses_embeddings(Method method);

struct PathQuery {
  EntityId source{};
  EntityId target{};
  RelationId query_relation{};
  int max_length = 7;    // eta, in edges
  int num_walkers = 20;  // walks per entity pair
  double theta = 0.5;
  std::uint64_t seed = 0;
  std::size_t relation_cap = 32;  // max relation paths inferred per walk

  // Hides (source, query_relation, target) in both directions.
  EdgeMask mask() const {
    return EdgeMask(Triple{source, query_relation, target});
  }
  // Throws std::invalid_argument on bad parameters or node ids.
  void validate(const KnowledgeGraph& graph) const;
};

// The node sequences behind one successful walk.
struct WalkRecord {
  std::vector<EntityId> forward;   // grown from the source
  std::vector<EntityId> backward;  // grown from the target (empty for
                                   // unidirectional walks)
  std::vector<EntityId> merged;    // full source -> target node path
  std::vector<RelationPath> paths;
};

struct ExtractionStats {
  std::size_t walks = 0;
  std::size_t successful_walks = 0;
  std::size_t rejected_candidates = 0;  // dropped by the relevance-delta test
  std::size_t embedding_fallbacks = 0;  // queries run without context filter

  ExtractionStats& operator+=(const ExtractionStats& other);
};

struct ExtractionResult {
  PathSet paths;
  ExtractionStats stats;
  std::vector<WalkRecord> records;  // filled when keep_records is set
};

struct ExtractOptions {
  bool keep_records = false;
  double dna_threshold = 0.05;
};

// Memoized relevance for one (h, t) pair. sim(h, t) is computed once and
// serves as the admission threshold for every candidate of the query.
class ContextScorer {
 public:
  ContextScorer(const EntityVectors& vectors, EntityId source, EntityId target,
                double theta);

  // False when either endpoint lacks a vector.
  bool usable() const { return threshold_.has_value(); }
  double threshold() const { return *threshold_; }

  std::optional<double> relevance(EntityId v);
  // relevance(v) >= sim(h, t); entities without vectors never pass.
  bool admissible(EntityId v);

 private:
  const EntityVectors* vectors_;
  EntityId source_;
  EntityId target_;
  RelevanceParams params_;
  std::optional<double> threshold_;
  std::unordered_map<std::uint32_t, std::optional<double>> memo_;
};

// Distinct unvisited neighbours of v whose relevance clears sim(h, t),
// in ascending id order. Masked edges are not followed.
std::vector<EntityId> contextual_neighbors(const KnowledgeGraph& graph,
                                           ContextScorer& scorer, EntityId v,
                                           std::span<const EntityId> visited,
                                           const EdgeMask& mask = {});
std::vector<EntityId> contextual_neighbors(
    const KnowledgeGraph& graph, const EntityVectors& vectors, EntityId v,
    EntityId h, EntityId t, std::span<const EntityId> visited,
    const RelevanceParams& params = {}, const EdgeMask& mask = {});

// Every relation path realized by the node sequence: the cartesian product
// of the parallel edges between consecutive nodes. When the product exceeds
// `cap`, `cap` distinct combinations are sampled uniformly. Throws
// RuntimeFailure if two consecutive nodes are not adjacent under `mask`.
std::vector<RelationPath> infer_relation_paths(const KnowledgeGraph& graph,
                                               std::span<const EntityId> nodes,
                                               std::size_t cap, Rng& rng,
                                               const EdgeMask& mask = {});

// One context-aware bidirectional walk. Returns nullopt when both sides get
// stuck or the sequences reach max_length edges without meeting. If the
// source or target has no vector the walk runs unfiltered.
std::optional<WalkRecord> cpr_walk(const KnowledgeGraph& graph,
                                   const EntityVectors& vectors,
                                   const PathQuery& query, Rng& rng);
std::optional<WalkRecord> bb_walk(const KnowledgeGraph& graph,
                                  const PathQuery& query, Rng& rng);

// Run query.num_walkers walks (walker w seeded with
// derive_seed(query.seed, w)), union the inferred paths and drop the bare
// <query_relation> path.
ExtractionResult cpr_extract(const KnowledgeGraph& graph,
                             const EntityVectors& vectors,
                             const PathQuery& query,
                             const ExtractOptions& options = {});
ExtractionResult bb_extract(const KnowledgeGraph& graph, const PathQuery& query,
                            const ExtractOptions& options = {});
ExtractionResult bpr_extract(const KnowledgeGraph& graph,
                             const PathQuery& query,
                             const ExtractOptions& options = {});
ExtractionResult dna_extract(const KnowledgeGraph& graph,
                             const EntityVectors& vectors,
                             const PathQuery& query,
                             const ExtractOptions& options = {});

// Dispatch on method. `vectors` may be null only for methods that do not
// use embeddings.
ExtractionResult extract_paths(Method method, const KnowledgeGraph& graph,
                               const EntityVectors* vectors,
                               const PathQuery& query,
                               const ExtractOptions& options = {});

struct OracleOptions {
  std::size_t expansion_budget = 10'000'000;
};

// Exhaustive depth-first enumeration of every self-avoiding relation path
// from h to t with at most max_length edges under `mask`. The bare
// <relation> path of the masked triple is excluded. When h == t the result
// holds cycles through h. Throws RuntimeFailure past the expansion budget.
// Exponential; meant as a test oracle on small graphs.
PathSet bfs_oracle(const KnowledgeGraph& graph, EntityId h, EntityId t,
                   int max_length, const EdgeMask& mask = {},
                   const OracleOptions& options = {});

}  // namespace cpr
