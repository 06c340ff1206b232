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
#include "cpr/pathfinder.hpp"

#include <algorithm>
#include <limits>
#include <set>
#include <stdexcept>

#include "cpr/error.hpp"

namespace cpr {

std::string_view method_name(Method method) {
  switch (method) {
    case Method::kContext: return "cpr";
    case Method::kBidirectional: return "bb";
    case Method::kUnidirectional: return "b";
    case Method::kDna: return "dna";
  }
  return "?";
}

std::optional<Method> parse_method(std::string_view name) {
  if (name == "cpr") return Method::kContext;
  if (name == "bb") return Method::kBidirectional;
  if (name == "b") return Method::kUnidirectional;
  if (name == "dna") return Method::kDna;
  return std::nullopt;
}

bool method_uses_embeddings(Method method) {
  return method == Method::kContext || method == Method::kDna;
}

void PathQuery::validate(const KnowledgeGraph& graph) const {
  if (max_length < 1) throw std::invalid_argument("max_length must be >= 1");
  if (num_walkers < 1) throw std::invalid_argument("num_walkers must be >= 1");
  if (relation_cap < 1) throw std::invalid_argument("relation_cap must be >= 1");
  RelevanceParams{theta}.validate();
  if (!graph.valid(source) || !graph.valid(target)) {
    throw std::invalid_argument("query endpoint is not a graph entity");
  }
}

ExtractionStats& ExtractionStats::operator+=(const ExtractionStats& other) {
  walks += other.walks;
  successful_walks += other.successful_walks;
  rejected_candidates += other.rejected_candidates;
  embedding_fallbacks += other.embedding_fallbacks;
  return *this;
}

ContextScorer::ContextScorer(const EntityVectors& vectors, EntityId source,
                             EntityId target, double theta)
    : vectors_(&vectors),
      source_(source),
      target_(target),
      params_{theta},
      threshold_(vectors.similarity(source, target)) {}

std::optional<double> ContextScorer::relevance(EntityId v) {
  auto [it, inserted] = memo_.try_emplace(to_index(v));
  if (inserted) it->second = vectors_->relevance(v, source_, target_, params_);
  return it->second;
}

bool ContextScorer::admissible(EntityId v) {
  if (!threshold_) return false;
  const auto r = relevance(v);
  return r.has_value() && *r >= *threshold_;
}

namespace {

bool contains(std::span<const EntityId> seq, EntityId v) {
  return std::find(seq.begin(), seq.end(), v) != seq.end();
}

// Distinct masked neighbours of `node` that are not in `visited` or
// `excluded` and satisfy `admit`, sorted by id.
template <typename Admit>
std::vector<EntityId> candidate_nodes(const KnowledgeGraph& graph,
                                      EntityId node, const EdgeMask& mask,
                                      std::span<const EntityId> visited,
                                      std::span<const EntityId> excluded,
                                      Admit&& admit) {
  std::vector<EntityId> out;
  for (const Edge& e : graph.adjacency(node)) {
    if (mask.hides(node, e)) continue;
    out.push_back(e.neighbor);
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  std::erase_if(out, [&](EntityId v) {
    return contains(visited, v) || contains(excluded, v) || !admit(v);
  });
  return out;
}

// No embedding filter: every unvisited neighbour is a candidate and every
// draw is accepted.
struct OpenAdmission {
  bool admissible(EntityId) { return true; }
  bool in_context(EntityId, EntityId) { return true; }
};

struct ContextAdmission {
  ContextScorer* scorer;

  bool admissible(EntityId v) { return scorer->admissible(v); }
  // Step test: relevance must not drop below the sequence's last node.
  bool in_context(EntityId v, EntityId last) {
    return *scorer->relevance(v) - *scorer->relevance(last) >= 0.0;
  }
};

struct WalkSide {
  std::vector<EntityId> seq;
  std::vector<EntityId> excluded;
  std::vector<EntityId> candidates;
  bool candidates_fresh = false;
  bool stuck = false;
};

// Alternating bidirectional walk, forward side first. Each turn draws one
// candidate for the active side; a candidate already on the opposite side
// closes the path. The loop ends once the two sequences together hold
// max_length edges, which keeps every closed path within max_length.
template <typename Admission>
std::optional<WalkRecord> bidirectional_walk(const KnowledgeGraph& graph,
                                             const PathQuery& query,
                                             const EdgeMask& mask,
                                             Admission& admission, Rng& rng,
                                             ExtractionStats& stats) {
  WalkSide fwd;
  fwd.seq.push_back(query.source);
  WalkSide bwd;
  bwd.seq.push_back(query.target);
  int combined_edges = 0;
  bool forward_turn = true;

  while (combined_edges < query.max_length) {
    if (fwd.stuck && bwd.stuck) return std::nullopt;
    const bool is_forward = forward_turn;
    forward_turn = !forward_turn;
    WalkSide& side = is_forward ? fwd : bwd;
    WalkSide& other = is_forward ? bwd : fwd;
    if (side.stuck) continue;

    if (!side.candidates_fresh) {
      side.candidates = candidate_nodes(
          graph, side.seq.back(), mask, side.seq, side.excluded,
          [&](EntityId v) { return admission.admissible(v); });
      side.candidates_fresh = true;
    }
    if (side.candidates.empty()) {
      side.stuck = true;
      continue;
    }

    const std::size_t pick = uniform_index(rng, side.candidates.size());
    const EntityId v = side.candidates[pick];

    if (auto it = std::find(other.seq.begin(), other.seq.end(), v);
        it != other.seq.end()) {
      const auto l = static_cast<std::size_t>(it - other.seq.begin());
      WalkRecord record;
      record.forward = fwd.seq;
      record.backward = bwd.seq;
      if (is_forward) {
        record.merged = fwd.seq;
        record.merged.insert(record.merged.end(),
                             std::make_reverse_iterator(bwd.seq.begin() + l + 1),
                             bwd.seq.rend());
      } else {
        record.merged.assign(fwd.seq.begin(), fwd.seq.begin() + l + 1);
        record.merged.insert(record.merged.end(), bwd.seq.rbegin(),
                             bwd.seq.rend());
      }
      return record;
    }

    // The root has no predecessor to compare against.
    if (side.seq.size() > 1 && !admission.in_context(v, side.seq.back())) {
      side.excluded.push_back(v);
      side.candidates.erase(side.candidates.begin() +
                            static_cast<std::ptrdiff_t>(pick));
      ++stats.rejected_candidates;
      continue;
    }
    side.seq.push_back(v);
    side.candidates_fresh = false;
    ++combined_edges;
  }
  return std::nullopt;
}

struct DnaAdmission {
  const EntityVectors* vectors;
  EntityId far_end;
  double threshold;

  bool admissible(EntityId v) {
    const auto s = vectors->similarity(v, far_end);
    return s.has_value() && *s >= threshold;
  }
};

struct OpenStep {
  bool admissible(EntityId) { return true; }
};

// Self-avoiding walk from `from` that stops on reaching `to`. Reaching the
// goal is always allowed; intermediate nodes must pass `admission`.
template <typename Admission>
std::optional<std::vector<EntityId>> unidirectional_walk(
    const KnowledgeGraph& graph, EntityId from, EntityId to,
    const EdgeMask& mask, int max_length, Admission& admission, Rng& rng) {
  std::vector<EntityId> seq{from};
  for (int step = 0; step < max_length; ++step) {
    const auto candidates = candidate_nodes(
        graph, seq.back(), mask, seq, {},
        [&](EntityId v) { return v == to || admission.admissible(v); });
    if (candidates.empty()) return std::nullopt;
    const EntityId v = candidates[uniform_index(rng, candidates.size())];
    seq.push_back(v);
    if (v == to) return seq;
  }
  return std::nullopt;
}

bool is_bare_query(const RelationPath& path, RelationId relation) {
  return path.steps.size() == 1 && !path.steps[0].inverted &&
         path.steps[0].relation == relation;
}

void collect(const KnowledgeGraph& graph, const PathQuery& query,
             const EdgeMask& mask, WalkRecord record, Rng& rng,
             const ExtractOptions& options, ExtractionResult& result) {
  record.paths =
      infer_relation_paths(graph, record.merged, query.relation_cap, rng, mask);
  std::erase_if(record.paths, [&](const RelationPath& p) {
    return is_bare_query(p, query.query_relation);
  });
  ++result.stats.successful_walks;
  result.paths.insert(record.paths.begin(), record.paths.end());
  if (options.keep_records) result.records.push_back(std::move(record));
}

template <typename Admission>
ExtractionResult run_bidirectional(const KnowledgeGraph& graph,
                                   const PathQuery& query,
                                   Admission& admission,
                                   const ExtractOptions& options) {
  ExtractionResult result;
  const EdgeMask mask = query.mask();
  for (int w = 0; w < query.num_walkers; ++w) {
    Rng rng(derive_seed(query.seed, static_cast<std::uint64_t>(w)));
    ++result.stats.walks;
    auto record =
        bidirectional_walk(graph, query, mask, admission, rng, result.stats);
    if (record) collect(graph, query, mask, std::move(*record), rng, options,
                        result);
  }
  return result;
}

// Walkers [0, ceil(n/2)) start at the source, the rest at the target; target
// side node sequences are reversed into source -> target order before the
// relations are read off.
template <typename MakeAdmission>
ExtractionResult run_two_sided(const KnowledgeGraph& graph,
                               const PathQuery& query,
                               MakeAdmission&& make_admission,
                               const ExtractOptions& options) {
  ExtractionResult result;
  const EdgeMask mask = query.mask();
  const int forward_walkers = (query.num_walkers + 1) / 2;
  for (int w = 0; w < query.num_walkers; ++w) {
    Rng rng(derive_seed(query.seed, static_cast<std::uint64_t>(w)));
    ++result.stats.walks;
    const bool from_source = w < forward_walkers;
    const EntityId from = from_source ? query.source : query.target;
    const EntityId to = from_source ? query.target : query.source;
    auto admission = make_admission(to);
    auto seq = unidirectional_walk(graph, from, to, mask, query.max_length,
                                   admission, rng);
    if (!seq) continue;
    WalkRecord record;
    if (!from_source) std::reverse(seq->begin(), seq->end());
    record.forward = *seq;
    record.merged = std::move(*seq);
    collect(graph, query, mask, std::move(record), rng, options, result);
  }
  return result;
}

}  // namespace

std::vector<EntityId> contextual_neighbors(const KnowledgeGraph& graph,
                                           ContextScorer& scorer, EntityId v,
                                           std::span<const EntityId> visited,
                                           const EdgeMask& mask) {
  return candidate_nodes(graph, v, mask, visited, {},
                         [&](EntityId u) { return scorer.admissible(u); });
}

std::vector<EntityId> contextual_neighbors(
    const KnowledgeGraph& graph, const EntityVectors& vectors, EntityId v,
    EntityId h, EntityId t, std::span<const EntityId> visited,
    const RelevanceParams& params, const EdgeMask& mask) {
  ContextScorer scorer(vectors, h, t, params.theta);
  return contextual_neighbors(graph, scorer, v, visited, mask);
}

std::vector<RelationPath> infer_relation_paths(const KnowledgeGraph& graph,
                                               std::span<const EntityId> nodes,
                                               std::size_t cap, Rng& rng,
                                               const EdgeMask& mask) {
  if (nodes.size() < 2 || cap == 0) return {};
  std::vector<std::vector<SignedRelation>> choices(nodes.size() - 1);
  constexpr auto kMax = std::numeric_limits<std::uint64_t>::max();
  std::uint64_t product = 1;
  for (std::size_t i = 0; i + 1 < nodes.size(); ++i) {
    for (const Edge& e : graph.adjacency(nodes[i])) {
      if (e.neighbor == nodes[i + 1] && !mask.hides(nodes[i], e)) {
        choices[i].push_back(e.relation);
      }
    }
    if (choices[i].empty()) {
      throw RuntimeFailure("walk produced non-adjacent nodes " +
                           std::to_string(to_index(nodes[i])) + " and " +
                           std::to_string(to_index(nodes[i + 1])));
    }
    product = product > kMax / choices[i].size() ? kMax
                                                 : product * choices[i].size();
  }

  std::vector<RelationPath> out;
  if (product <= cap) {
    std::vector<std::size_t> odometer(choices.size(), 0);
    while (true) {
      RelationPath p;
      p.steps.reserve(choices.size());
      for (std::size_t i = 0; i < choices.size(); ++i) {
        p.steps.push_back(choices[i][odometer[i]]);
      }
      out.push_back(std::move(p));
      std::size_t i = choices.size();
      while (i > 0) {
        --i;
        if (++odometer[i] < choices[i].size()) break;
        odometer[i] = 0;
        if (i == 0) return out;
      }
    }
  }

  // Independent uniform picks per position are uniform over the product;
  // rejecting repeats gives sampling without replacement.
  std::set<RelationPath> sampled;
  while (sampled.size() < cap) {
    RelationPath p;
    p.steps.reserve(choices.size());
    for (const auto& c : choices) p.steps.push_back(c[uniform_index(rng, c.size())]);
    sampled.insert(std::move(p));
  }
  out.assign(sampled.begin(), sampled.end());
  return out;
}

std::optional<WalkRecord> cpr_walk(const KnowledgeGraph& graph,
                                   const EntityVectors& vectors,
                                   const PathQuery& query, Rng& rng) {
  query.validate(graph);
  ExtractionStats stats;
  const EdgeMask mask = query.mask();
  ContextScorer scorer(vectors, query.source, query.target, query.theta);
  std::optional<WalkRecord> record;
  if (scorer.usable()) {
    ContextAdmission admission{&scorer};
    record = bidirectional_walk(graph, query, mask, admission, rng, stats);
  } else {
    OpenAdmission admission;
    record = bidirectional_walk(graph, query, mask, admission, rng, stats);
  }
  if (record) {
    record->paths = infer_relation_paths(graph, record->merged,
                                         query.relation_cap, rng, mask);
    std::erase_if(record->paths, [&](const RelationPath& p) {
      return is_bare_query(p, query.query_relation);
    });
  }
  return record;
}

std::optional<WalkRecord> bb_walk(const KnowledgeGraph& graph,
                                  const PathQuery& query, Rng& rng) {
  query.validate(graph);
  ExtractionStats stats;
  const EdgeMask mask = query.mask();
  OpenAdmission admission;
  auto record = bidirectional_walk(graph, query, mask, admission, rng, stats);
  if (record) {
    record->paths = infer_relation_paths(graph, record->merged,
                                         query.relation_cap, rng, mask);
    std::erase_if(record->paths, [&](const RelationPath& p) {
      return is_bare_query(p, query.query_relation);
    });
  }
  return record;
}

ExtractionResult cpr_extract(const KnowledgeGraph& graph,
                             const EntityVectors& vectors,
                             const PathQuery& query,
                             const ExtractOptions& options) {
  query.validate(graph);
  ContextScorer scorer(vectors, query.source, query.target, query.theta);
  if (!scorer.usable()) {
    OpenAdmission admission;
    auto result = run_bidirectional(graph, query, admission, options);
    result.stats.embedding_fallbacks = 1;
    return result;
  }
  ContextAdmission admission{&scorer};
  return run_bidirectional(graph, query, admission, options);
}

ExtractionResult bb_extract(const KnowledgeGraph& graph, const PathQuery& query,
                            const ExtractOptions& options) {
  query.validate(graph);
  OpenAdmission admission;
  return run_bidirectional(graph, query, admission, options);
}

ExtractionResult bpr_extract(const KnowledgeGraph& graph,
                             const PathQuery& query,
                             const ExtractOptions& options) {
  query.validate(graph);
  return run_two_sided(graph, query, [](EntityId) { return OpenStep{}; },
                       options);
}

ExtractionResult dna_extract(const KnowledgeGraph& graph,
                             const EntityVectors& vectors,
                             const PathQuery& query,
                             const ExtractOptions& options) {
  query.validate(graph);
  if (!vectors.has(query.source) || !vectors.has(query.target)) {
    auto result = run_two_sided(graph, query,
                                [](EntityId) { return OpenStep{}; }, options);
    result.stats.embedding_fallbacks = 1;
    return result;
  }
  return run_two_sided(
      graph, query,
      [&](EntityId far_end) {
        return DnaAdmission{&vectors, far_end, options.dna_threshold};
      },
      options);
}

ExtractionResult extract_paths(Method method, const KnowledgeGraph& graph,
                               const EntityVectors* vectors,
                               const PathQuery& query,
                               const ExtractOptions& options) {
  if (method_uses_embeddings(method) && vectors == nullptr) {
    throw std::invalid_argument(std::string(method_name(method)) +
                                " extraction needs entity vectors");
  }
  switch (method) {
    case Method::kContext: return cpr_extract(graph, *vectors, query, options);
    case Method::kBidirectional: return bb_extract(graph, query, options);
    case Method::kUnidirectional: return bpr_extract(graph, query, options);
    case Method::kDna: return dna_extract(graph, *vectors, query, options);
  }
  throw std::invalid_argument("unknown method");
}

namespace {

struct OracleSearch {
  const KnowledgeGraph& graph;
  EntityId target;
  int max_length;
  const EdgeMask& mask;
  std::size_t budget;
  std::size_t expansions = 0;
  std::vector<char> on_path;
  RelationPath current;
  PathSet found;

  void visit(EntityId node) {
    for (const Edge& e : graph.adjacency(node)) {
      if (++expansions > budget) {
        throw RuntimeFailure("bfs_oracle: expansion budget exceeded");
      }
      if (mask.hides(node, e)) continue;
      current.steps.push_back(e.relation);
      if (e.neighbor == target) {
        found.insert(current);
      } else if (!on_path[to_index(e.neighbor)] &&
                 static_cast<int>(current.steps.size()) < max_length) {
        on_path[to_index(e.neighbor)] = 1;
        visit(e.neighbor);
        on_path[to_index(e.neighbor)] = 0;
      }
      current.steps.pop_back();
    }
  }
};

}  // namespace

PathSet bfs_oracle(const KnowledgeGraph& graph, EntityId h, EntityId t,
                   int max_length, const EdgeMask& mask,
                   const OracleOptions& options) {
  if (!graph.valid(h) || !graph.valid(t)) {
    throw std::invalid_argument("bfs_oracle: endpoint is not a graph entity");
  }
  if (max_length < 1) return {};
  OracleSearch search{graph, t, max_length, mask, options.expansion_budget,
                      0, {}, {}, {}};
  search.on_path.assign(graph.entity_count(), 0);
  search.on_path[to_index(h)] = 1;
  search.visit(h);
  if (const auto& hidden = mask.hidden()) {
    search.found.erase(RelationPath{{SignedRelation{hidden->relation, false}}});
  }
  return std::move(search.found);
}

}  // namespace cpr
