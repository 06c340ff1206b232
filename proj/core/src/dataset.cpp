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
#include "cpr/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

#include "cpr/error.hpp"

namespace cpr {

std::string_view provenance_name(Provenance p) {
  switch (p) {
    case Provenance::kObserved: return "observed";
    case Provenance::kHeadCorrupted: return "head-corrupted";
    case Provenance::kTailCorrupted: return "tail-corrupted";
  }
  return "?";
}

std::optional<Provenance> parse_provenance(std::string_view name) {
  if (name == "observed") return Provenance::kObserved;
  if (name == "head-corrupted") return Provenance::kHeadCorrupted;
  if (name == "tail-corrupted") return Provenance::kTailCorrupted;
  return std::nullopt;
}

std::vector<Triple> RelationDataset::test_positive_triples() const {
  std::vector<Triple> out;
  for (const auto& inst : test) {
    if (inst.positive) out.push_back({inst.head, relation, inst.tail});
  }
  return out;
}

namespace {

std::vector<Triple> relation_triples(const KnowledgeGraph& graph,
                                     RelationId relation) {
  std::vector<Triple> out;
  for (const Triple& t : graph.triples()) {
    if (t.relation == relation) out.push_back(t);
  }
  return out;
}

}  // namespace

std::vector<RelationId> select_test_relations(const KnowledgeGraph& graph,
                                              std::size_t min_instances,
                                              std::optional<std::size_t> k,
                                              Rng& rng) {
  std::vector<std::size_t> counts(graph.relation_count(), 0);
  for (const Triple& t : graph.triples()) ++counts[to_index(t.relation)];
  std::vector<RelationId> qualifying;
  for (std::size_t r = 0; r < counts.size(); ++r) {
    if (counts[r] >= min_instances) {
      qualifying.push_back(RelationId{static_cast<std::uint32_t>(r)});
    }
  }
  if (!k) return qualifying;
  if (*k > qualifying.size()) {
    throw ConfigError("requested " + std::to_string(*k) +
                      " test relations but only " +
                      std::to_string(qualifying.size()) + " have >= " +
                      std::to_string(min_instances) + " triples");
  }
  std::shuffle(qualifying.begin(), qualifying.end(), rng);
  qualifying.resize(*k);
  std::sort(qualifying.begin(), qualifying.end());
  return qualifying;
}

PositiveSplit split_relation(const KnowledgeGraph& graph, RelationId relation,
                             std::size_t cap, double ratio, Rng& rng) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) {
    throw std::invalid_argument("train ratio must lie in [0, 1]");
  }
  PositiveSplit split;
  auto triples = relation_triples(graph, relation);
  if (triples.size() < cap) {
    split.warnings.push_back(
        "relation '" + graph.symbols().relation_name(relation) + "' has " +
        std::to_string(triples.size()) + " triples, fewer than the cap of " +
        std::to_string(cap) + "; using all of them");
  }
  std::shuffle(triples.begin(), triples.end(), rng);
  if (triples.size() > cap) triples.resize(cap);
  const auto n_train = static_cast<std::size_t>(
      std::llround(ratio * static_cast<double>(triples.size())));
  split.train.assign(triples.begin(), triples.begin() + n_train);
  split.test.assign(triples.begin() + n_train, triples.end());
  if (split.test.empty()) {
    split.warnings.push_back("relation '" +
                             graph.symbols().relation_name(relation) +
                             "' has an empty test split");
  }
  return split;
}

NegativeBatch generate_negatives(const KnowledgeGraph& graph,
                                 RelationId relation,
                                 std::span<const Triple> positives, Rng& rng,
                                 const DatasetOptions& options) {
  std::set<EntityId> heads, tails;
  for (const Triple& t : graph.triples()) {
    if (t.relation != relation) continue;
    heads.insert(t.head);
    tails.insert(t.tail);
  }
  for (const Triple& t : positives) {
    heads.insert(t.head);
    tails.insert(t.tail);
  }
  const std::vector<EntityId> head_pool(heads.begin(), heads.end());
  const std::vector<EntityId> tail_pool(tails.begin(), tails.end());

  NegativeBatch batch;
  std::vector<std::pair<EntityId, EntityId>> chosen;
  for (std::size_t p = 0; p < positives.size(); ++p) {
    const Triple& pos = positives[p];
    chosen.clear();
    std::size_t missing = 0;
    for (const bool corrupt_head : {true, false}) {
      const auto& pool = corrupt_head ? head_pool : tail_pool;
      for (std::size_t slot = 0; slot < options.negatives_per_side; ++slot) {
        const auto pair_of = [&](EntityId e) {
          return corrupt_head ? std::pair{e, pos.tail} : std::pair{pos.head, e};
        };
        const auto usable = [&](EntityId e) {
          const auto [h, t] = pair_of(e);
          return !graph.contains_triple(h, relation, t) &&
                 std::find(chosen.begin(), chosen.end(), std::pair{h, t}) ==
                     chosen.end();
        };
        std::optional<EntityId> pick;
        for (std::size_t attempt = 0; attempt < options.max_retries; ++attempt) {
          const EntityId e = pool[uniform_index(rng, pool.size())];
          if (usable(e)) {
            pick = e;
            break;
          }
        }
        if (!pick) {
          // Retries exhausted: draw among the remaining valid candidates so
          // a slot only goes unfilled when the pool truly has none left.
          std::vector<EntityId> rest;
          for (EntityId e : pool) {
            if (usable(e)) rest.push_back(e);
          }
          if (!rest.empty()) pick = rest[uniform_index(rng, rest.size())];
        }
        if (!pick) {
          ++missing;
          continue;
        }
        const auto [h, t] = pair_of(*pick);
        chosen.emplace_back(h, t);
        batch.negatives.push_back(
            {h, t, false,
             corrupt_head ? Provenance::kHeadCorrupted
                          : Provenance::kTailCorrupted});
        batch.owner.push_back(p);
      }
    }
    if (missing > 0) {
      batch.shortfall += missing;
      batch.warnings.push_back(
          "positive (" + graph.symbols().entity_name(pos.head) + ", " +
          graph.symbols().entity_name(pos.tail) + ") got " +
          std::to_string(2 * options.negatives_per_side - missing) +
          " negatives; pool too small");
    }
  }
  return batch;
}

namespace {

std::vector<LabeledInstance> label(std::span<const Triple> positives,
                                   const NegativeBatch& batch) {
  std::vector<LabeledInstance> out;
  out.reserve(positives.size() + batch.negatives.size());
  std::size_t next = 0;
  for (std::size_t p = 0; p < positives.size(); ++p) {
    out.push_back({positives[p].head, positives[p].tail, true,
                   Provenance::kObserved});
    while (next < batch.negatives.size() && batch.owner[next] == p) {
      out.push_back(batch.negatives[next++]);
    }
  }
  return out;
}

}  // namespace

RelationDataset make_relation_dataset(const KnowledgeGraph& graph,
                                      RelationId relation,
                                      std::uint64_t relation_seed,
                                      const DatasetOptions& options) {
  RelationDataset ds;
  ds.relation = relation;
  ds.seed = relation_seed;

  Rng split_rng(derive_seed(relation_seed, 1));
  auto split = split_relation(graph, relation, options.cap, options.train_ratio,
                              split_rng);
  ds.warnings = std::move(split.warnings);

  Rng train_rng(derive_seed(relation_seed, 2));
  auto train_neg = generate_negatives(graph, relation, split.train, train_rng,
                                      options);
  Rng test_rng(derive_seed(relation_seed, 3));
  auto test_neg = generate_negatives(graph, relation, split.test, test_rng,
                                     options);

  ds.train = label(split.train, train_neg);
  ds.test = label(split.test, test_neg);
  ds.train_shortfall = train_neg.shortfall;
  ds.test_shortfall = test_neg.shortfall;
  for (auto* w : {&train_neg.warnings, &test_neg.warnings}) {
    ds.warnings.insert(ds.warnings.end(), w->begin(), w->end());
  }

  // Seeded order: ranking ties are broken by input position.
  Rng order_rng(derive_seed(relation_seed, 4));
  std::shuffle(ds.train.begin(), ds.train.end(), order_rng);
  std::shuffle(ds.test.begin(), ds.test.end(), order_rng);
  return ds;
}

EvaluationGraph evaluation_graph(const KnowledgeGraph& graph,
                                 std::span<const Triple> test_positives) {
  EvaluationGraph out;
  out.graph = graph.without(test_positives);
  out.hidden_triples = graph.triple_count() - out.graph.triple_count();
  out.hidden_edges = graph.edge_count() - out.graph.edge_count();
  return out;
}

void write_instances(std::ostream& out, const SymbolTables& symbols,
                     std::span<const LabeledInstance> instances) {
  for (const auto& inst : instances) {
    out << symbols.entity_name(inst.head) << '\t'
        << symbols.entity_name(inst.tail) << '\t' << (inst.positive ? 1 : 0)
        << '\t' << provenance_name(inst.provenance) << '\n';
  }
}

std::vector<LabeledInstance> read_instances(std::istream& in,
                                            const SymbolTables& symbols,
                                            std::string_view source_name) {
  const std::string source(source_name);
  std::vector<LabeledInstance> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> fields;
    std::string_view rest(line);
    while (true) {
      const auto pos = rest.find('\t');
      fields.push_back(rest.substr(0, pos));
      if (pos == std::string_view::npos) break;
      rest = rest.substr(pos + 1);
    }
    if (fields.size() != 4) {
      throw DataError(source, line_no, "expected 4 tab-separated fields");
    }
    auto h = symbols.find_entity(fields[0]);
    auto t = symbols.find_entity(fields[1]);
    auto prov = parse_provenance(fields[3]);
    if (!h || !t) throw DataError(source, line_no, "unknown entity");
    if (fields[2] != "1" && fields[2] != "0") {
      throw DataError(source, line_no, "label must be 1 or 0");
    }
    if (!prov) throw DataError(source, line_no, "unknown provenance");
    out.push_back({*h, *t, fields[2] == "1", *prov});
  }
  return out;
}

}  // namespace cpr
