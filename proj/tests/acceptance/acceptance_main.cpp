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

// Acceptance suite: one PASS/FAIL line per criterion. Exit status is 0 only
// when every gating criterion passes. The full-data comparison runs only when
// CPR_EXT_TRIPLES and CPR_EXT_EMBEDDINGS name real files.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <map>
#include <numeric>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cpr/classifier.hpp"
#include "cpr/dataset.hpp"
#include "cpr/evaluation.hpp"
#include "cpr/experiment.hpp"
#include "cpr/pathfinder.hpp"
#include "cpr/pipeline.hpp"
#include "support/synthetic.hpp"

namespace {

using namespace cpr;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

constexpr std::size_t kCorpusGraphs = 1000;
constexpr double kWalkSuiteSeconds = 30.0;
constexpr double kBenchmarkSeconds = 120.0;
constexpr double kFeatureReduction = 0.20;
constexpr int kBenchmarkSeeds = 10;

struct Outcome {
  bool pass = true;
  std::string detail;
  std::vector<std::string> failures;  // first few, for diagnosis

  void fail(const std::string& what) {
    pass = false;
    if (failures.size() < 5) failures.push_back(what);
  }
};

double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

// ---------------------------------------------------------------------------
// Random corpus shared by criteria 1-4.

struct CorpusQuery {
  EntityId head{};
  EntityId tail{};
  RelationId relation{};
};

struct CorpusGraph {
  testing::SyntheticKb kb;
  std::vector<CorpusQuery> queries;
  std::uint64_t seed = 0;
};

std::vector<CorpusQuery> pick_queries(const KnowledgeGraph& g, Rng& rng) {
  std::vector<CorpusQuery> out;
  if (g.triple_count() == 0 || g.entity_count() < 2) return out;
  for (int i = 0; i < 2; ++i) {  // observed triples: the mask matters
    const Triple& t = g.triples()[uniform_index(rng, g.triple_count())];
    out.push_back({t.head, t.tail, t.relation});
  }
  const auto u = EntityId(static_cast<std::uint32_t>(uniform_index(rng, g.entity_count())));
  auto v = EntityId(static_cast<std::uint32_t>(uniform_index(rng, g.entity_count())));
  if (v == u) v = EntityId((to_index(v) + 1) % g.entity_count());
  out.push_back({u, v, RelationId{0}});
  return out;
}

std::vector<CorpusGraph> build_corpus(bool identical_vectors) {
  std::vector<CorpusGraph> corpus;
  corpus.reserve(kCorpusGraphs);
  for (std::size_t i = 0; i < kCorpusGraphs; ++i) {
    testing::RandomKbOptions o;
    o.identical_vectors = identical_vectors;
    CorpusGraph c;
    c.seed = 1000 + i;
    c.kb = testing::random_kb(c.seed, o);
    Rng rng(derive_seed(c.seed, 7));
    c.queries = pick_queries(c.kb.graph, rng);
    corpus.push_back(std::move(c));
  }
  return corpus;
}

PathQuery corpus_query(const CorpusGraph& c, const CorpusQuery& q, int eta,
                       std::size_t index) {
  PathQuery p;
  p.source = q.head;
  p.target = q.tail;
  p.query_relation = q.relation;
  p.max_length = eta;
  p.seed = derive_seed(c.seed, 99, index);
  return p;
}

// True when consecutive nodes are joined by the path's relations, never
// through a masked edge.
bool realized_along(const KnowledgeGraph& g, const std::vector<EntityId>& nodes,
                    const RelationPath& path, const EdgeMask& mask) {
  if (nodes.size() != path.length() + 1) return false;
  for (std::size_t i = 0; i < path.length(); ++i) {
    bool found = false;
    for (const Edge& e : g.neighbors(nodes[i], mask)) {
      if (e.neighbor == nodes[i + 1] && e.relation == path.steps[i]) found = true;
    }
    if (!found) return false;
  }
  return true;
}

// Follows the relation sequence from h over every branch and reports whether
// t is reachable, using only unmasked edges.
bool replays(const KnowledgeGraph& g, EntityId h, EntityId t,
             const RelationPath& path, const EdgeMask& mask) {
  std::set<EntityId> frontier = {h};
  for (const auto& step : path.steps) {
    std::set<EntityId> next;
    for (EntityId v : frontier) {
      for (const Edge& e : g.neighbors(v, mask)) {
        if (e.relation == step) next.insert(e.neighbor);
      }
    }
    frontier = std::move(next);
  }
  return frontier.count(t) > 0;
}

bool bare_query(const RelationPath& p, RelationId r) {
  return p.length() == 1 && p.steps[0].relation == r && !p.steps[0].inverted;
}

constexpr Method kMethods[] = {Method::kContext, Method::kBidirectional,
                               Method::kUnidirectional, Method::kDna};

Outcome walk_validity(const std::vector<CorpusGraph>& corpus) {
  Outcome o;
  const auto start = Clock::now();
  std::size_t paths = 0, queries = 0;
  ExtractOptions opts;
  opts.keep_records = true;
  for (const auto& c : corpus) {
    const auto& g = c.kb.graph;
    for (std::size_t qi = 0; qi < c.queries.size(); ++qi) {
      const auto q = corpus_query(c, c.queries[qi], 7, qi);
      const auto mask = q.mask();
      ++queries;
      for (Method m : kMethods) {
        const auto res = extract_paths(m, g, &c.kb.vectors, q, opts);
        const std::string where = "graph " + std::to_string(c.seed) + " query " +
                                  std::to_string(qi) + " " +
                                  std::string(method_name(m));
        for (const auto& rec : res.records) {
          if (rec.merged.front() != q.source || rec.merged.back() != q.target) {
            o.fail(where + ": walk does not join source and target");
          }
          for (const auto& p : rec.paths) {
            if (!realized_along(g, rec.merged, p, mask)) {
              o.fail(where + ": path not realized by its walk");
            }
          }
        }
        for (const auto& p : res.paths) {
          ++paths;
          if (bare_query(p, q.query_relation)) o.fail(where + ": bare query path");
          if (p.length() > 7) o.fail(where + ": path longer than eta");
          if (!replays(g, q.source, q.target, p, mask)) {
            o.fail(where + ": path does not replay on the masked graph");
          }
        }
      }
    }
  }
  const double secs = seconds_since(start);
  if (secs >= kWalkSuiteSeconds) o.fail("runtime " + std::to_string(secs) + " s");
  std::ostringstream d;
  d << corpus.size() << " graphs, " << queries << " queries, " << paths
    << " paths checked in " << std::fixed << std::setprecision(1) << secs << " s";
  o.detail = d.str();
  return o;
}

Outcome oracle_containment(const std::vector<CorpusGraph>& corpus) {
  Outcome o;
  std::size_t paths = 0, violations = 0;
  for (const auto& c : corpus) {
    const auto& g = c.kb.graph;
    for (std::size_t qi = 0; qi < c.queries.size(); ++qi) {
      const auto q = corpus_query(c, c.queries[qi], 5, qi);
      const auto oracle = bfs_oracle(g, q.source, q.target, 5, q.mask());
      for (Method m : kMethods) {
        for (const auto& p : extract_paths(m, g, &c.kb.vectors, q).paths) {
          ++paths;
          if (!oracle.count(p)) {
            ++violations;
            o.fail("graph " + std::to_string(c.seed) + " " +
                   std::string(method_name(m)) + ": path outside the oracle set");
          }
        }
      }
    }
  }
  o.detail = std::to_string(paths) + " paths at eta 5, " +
             std::to_string(violations) + " violations";
  return o;
}

Outcome context_soundness(const std::vector<CorpusGraph>& corpus) {
  Outcome o;
  std::size_t walks = 0, nodes = 0;
  ExtractOptions opts;
  opts.keep_records = true;
  for (const auto& c : corpus) {
    const auto& g = c.kb.graph;
    for (std::size_t qi = 0; qi < c.queries.size(); ++qi) {
      const auto q = corpus_query(c, c.queries[qi], 7, qi);
      const auto res = cpr_extract(g, c.kb.vectors, q, opts);
      const auto sim_ht = c.kb.vectors.similarity(q.source, q.target);
      if (!sim_ht) continue;  // unfiltered fallback, nothing to check
      const RelevanceParams params{q.theta};
      auto relv = [&](EntityId v) {
        return *c.kb.vectors.relevance(v, q.source, q.target, params);
      };
      const std::string where = "graph " + std::to_string(c.seed);
      for (const auto& rec : res.records) {
        ++walks;
        for (std::size_t i = 1; i + 1 < rec.merged.size(); ++i) {
          ++nodes;
          if (!(relv(rec.merged[i]) >= *sim_ht)) {
            o.fail(where + ": intermediate node below sim(h, t)");
          }
        }
        for (const auto* seq : {&rec.forward, &rec.backward}) {
          for (std::size_t i = 2; i < seq->size(); ++i) {
            if (relv((*seq)[i]) < relv((*seq)[i - 1])) {
              o.fail(where + ": relevance drops along a walk side");
            }
          }
        }
      }
    }
  }
  o.detail = std::to_string(walks) + " walks, " + std::to_string(nodes) +
             " intermediate nodes";
  return o;
}

Outcome degenerate_equivalence() {
  Outcome o;
  const auto corpus = build_corpus(true);
  std::size_t queries = 0;
  for (const auto& c : corpus) {
    for (std::size_t qi = 0; qi < c.queries.size(); ++qi) {
      const auto q = corpus_query(c, c.queries[qi], 7, qi);
      ++queries;
      const auto a = cpr_extract(c.kb.graph, c.kb.vectors, q);
      const auto b = bb_extract(c.kb.graph, q);
      if (a.paths != b.paths) {
        o.fail("graph " + std::to_string(c.seed) + " query " + std::to_string(qi));
      }
    }
  }
  o.detail = std::to_string(queries) + " queries with identical vectors";
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 5: planted two-cluster benchmark.

struct BenchmarkRun {
  std::vector<RelationDataset> datasets;
  testing::SyntheticKb kb;
};

Outcome planted_benchmark(std::vector<RelationDataset>& generated,
                          std::vector<KnowledgeGraph>& graphs) {
  Outcome o;
  const auto start = Clock::now();
  double f1_cpr = 0, f1_bb = 0, feat_cpr = 0, feat_bb = 0, map_cpr = 0, map_bb = 0;
  std::size_t nodes = 0;
  const auto specs = parse_method_list("cpr,bb");
  for (int s = 0; s < kBenchmarkSeeds; ++s) {
    auto kb = testing::planted_context_kb(static_cast<std::uint64_t>(s) + 1);
    nodes += kb.graph.entity_count();
    std::vector<RelationDataset> ds = {make_relation_dataset(
        kb.graph, testing::relation(kb.graph, "r"), derive_seed(s, 5))};
    ExperimentSettings settings;
    const auto reports = compare_methods(kb.graph, &kb.vectors, ds, specs, settings);
    const auto& c = reports[0].relations[0];
    const auto& b = reports[1].relations[0];
    f1_cpr += c.f1_positive;
    f1_bb += b.f1_positive;
    feat_cpr += static_cast<double>(c.features);
    feat_bb += static_cast<double>(b.features);
    map_cpr += c.average_precision.value_or(0.0);
    map_bb += b.average_precision.value_or(0.0);
    generated.push_back(ds[0]);
    graphs.push_back(kb.graph);
  }
  const double n = kBenchmarkSeeds;
  f1_cpr /= n;
  f1_bb /= n;
  feat_cpr /= n;
  feat_bb /= n;
  const double secs = seconds_since(start);
  const double reduction = 1.0 - feat_cpr / feat_bb;
  if (!(f1_cpr >= f1_bb)) o.fail("C-PR mean F1(+) below BB-PR");
  if (!(reduction >= kFeatureReduction)) o.fail("feature reduction below 20%");
  if (secs >= kBenchmarkSeconds) o.fail("runtime " + std::to_string(secs) + " s");
  std::ostringstream d;
  d << std::fixed << std::setprecision(3) << kBenchmarkSeeds << " seeds, ~"
    << nodes / kBenchmarkSeeds << " nodes: F1(+) C-PR " << f1_cpr << " vs BB-PR "
    << f1_bb << ", MAP " << map_cpr / n << " vs " << map_bb / n << ", features "
    << std::setprecision(1) << feat_cpr << " vs " << feat_bb << " ("
    << std::setprecision(1) << 100 * reduction << "% fewer), " << secs << " s";
  o.detail = d.str();
  return o;
}

// Informational: the same benchmark with the target relation in both
// clusters. Cross-cluster negatives then have sim(h, t) near zero, the filter
// admits both clusters, and the feature advantage is not expected to hold.
std::string shared_target_note() {
  double f1_cpr = 0, f1_bb = 0, feat_cpr = 0, feat_bb = 0;
  const auto specs = parse_method_list("cpr,bb");
  constexpr int kSeeds = 3;
  for (int s = 0; s < kSeeds; ++s) {
    testing::PlantedContextOptions opts;
    opts.shared_target = true;
    auto kb = testing::planted_context_kb(static_cast<std::uint64_t>(s) + 1, opts);
    std::vector<RelationDataset> ds = {make_relation_dataset(
        kb.graph, testing::relation(kb.graph, "r"), derive_seed(s, 5))};
    const auto reports = compare_methods(kb.graph, &kb.vectors, ds, specs, {});
    f1_cpr += reports[0].relations[0].f1_positive / kSeeds;
    f1_bb += reports[1].relations[0].f1_positive / kSeeds;
    feat_cpr += static_cast<double>(reports[0].relations[0].features) / kSeeds;
    feat_bb += static_cast<double>(reports[1].relations[0].features) / kSeeds;
  }
  std::ostringstream d;
  d << std::fixed << std::setprecision(3) << "shared-target variant, " << kSeeds
    << " seeds: F1(+) C-PR " << f1_cpr << " vs BB-PR " << f1_bb << ", features "
    << std::setprecision(1) << feat_cpr << " vs " << feat_bb;
  return d.str();
}

// ---------------------------------------------------------------------------
// Criterion 6: classifier.

FeatureMatrix random_matrix(Rng& rng, std::size_t rows, std::size_t cols,
                            std::vector<int>& labels) {
  std::bernoulli_distribution on(0.3), coin(0.4);
  FeatureMatrix x(cols);
  labels.clear();
  for (std::size_t i = 0; i < rows; ++i) {
    SparseRow r;
    for (std::uint32_t j = 0; j < cols; ++j) {
      if (on(rng)) r.push_back(j);
    }
    x.add_row(r, i);
    labels.push_back(coin(rng) ? 1 : 0);
  }
  labels[0] = 1;
  labels[1] = 0;
  return x;
}

Outcome classifier_correctness() {
  Outcome o;
  Rng rng(2024);
  std::normal_distribution<double> gauss(0.0, 1.0);
  double worst_fd = 0.0, worst_gap = 0.0;
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<int> y;
    const auto x = random_matrix(rng, 50, 10, y);
    LogisticObjective obj(x, y, TrainConfig{});
    std::vector<double> w(obj.dimension()), g(obj.dimension());
    for (auto& v : w) v = gauss(rng);
    obj.value_and_gradient(w, g);
    double diff = 0.0, norm = 0.0;
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double h = 1e-5;
      auto plus = w, minus = w;
      plus[i] += h;
      minus[i] -= h;
      const double fd = (obj.value(plus) - obj.value(minus)) / (2 * h);
      diff += (fd - g[i]) * (fd - g[i]);
      norm += g[i] * g[i];
    }
    const double rel = std::sqrt(diff) / std::sqrt(norm);
    worst_fd = std::max(worst_fd, rel);
    if (!(rel < 1e-5)) o.fail("finite-difference mismatch, trial " + std::to_string(trial));

    const auto m = train(x, y);
    for (std::size_t i = 1; i < m.objective_trace.size(); ++i) {
      if (m.objective_trace[i] > m.objective_trace[i - 1]) {
        o.fail("objective increased, trial " + std::to_string(trial));
      }
    }
  }

  // Separable toy data: one indicator column decides the label.
  FeatureMatrix sep(2);
  std::vector<int> sy;
  for (std::size_t i = 0; i < 20; ++i) {
    const bool pos = i % 3 == 0;
    SparseRow r = pos ? SparseRow{0} : SparseRow{1};
    sep.add_row(r, i);
    sy.push_back(pos ? 1 : 0);
  }
  const auto sm = train(sep, sy);
  for (std::size_t i = 0; i < sep.rows(); ++i) {
    if (decide(sm, sep.row(i)) != sy[i]) o.fail("separable row misclassified");
  }

  // Balanced weighting versus duplicating the minority class k - 1 times.
  for (int k = 2; k <= 4; ++k) {
    std::vector<int> base_y;
    auto base = random_matrix(rng, 40, 6, base_y);
    std::vector<SparseRow> pos, neg;
    for (std::size_t i = 0; i < base.rows(); ++i) {
      (base_y[i] ? pos : neg).push_back(base.row(i));
    }
    const std::size_t p = std::min(pos.size(), neg.size() / k);
    FeatureMatrix xb(6), xd(6);
    std::vector<int> yb, yd;
    std::size_t row = 0;
    for (std::size_t i = 0; i < p; ++i) {
      xb.add_row(pos[i], row);
      xd.add_row(pos[i], row++);
      yb.push_back(1);
      yd.push_back(1);
    }
    for (std::size_t i = 0; i < k * p; ++i) {
      xb.add_row(neg[i], row);
      xd.add_row(neg[i], row++);
      yb.push_back(0);
      yd.push_back(0);
    }
    for (int c = 1; c < k; ++c) {
      for (std::size_t i = 0; i < p; ++i) {
        xd.add_row(pos[i], row++);
        yd.push_back(1);
      }
    }
    // Balanced loss = (k+1)/(2k) * duplicated loss, so the duplicated run
    // needs lambda scaled by 2k/(k+1) to share the minimizer.
    const double scale = (k + 1.0) / (2.0 * k);
    TrainConfig cb{.lambda = 1.0, .tol = 1e-10, .max_iter = 500};
    TrainConfig cd{.lambda = 1.0 / scale, .tol = 1e-10, .max_iter = 500,
                   .class_weight = ClassWeighting::kNone};
    const auto mb = train(xb, yb, cb);
    const auto md = train(xd, yd, cd);
    auto params = [](const LRModel& m) {
      auto v = m.weights;
      v.push_back(m.intercept);
      return v;
    };
    LogisticObjective ob(xb, yb, cb), od(xd, yd, cd);
    const double gap = std::abs(ob.value(params(mb)) - scale * od.value(params(md)));
    worst_gap = std::max(worst_gap, gap);
    if (!(gap <= 1e-6)) o.fail("balanced/duplicated objective gap, k=" + std::to_string(k));
  }
  std::ostringstream d;
  d << "max FD rel err " << std::scientific << std::setprecision(2) << worst_fd
    << ", max balanced/dup objective gap " << worst_gap;
  o.detail = d.str();
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 7: metrics.

Outcome metric_correctness() {
  Outcome o;
  std::size_t lists = 0, f1_cases = 0;
  for (int n = 1; n <= 8; ++n) {
    for (int mask = 0; mask < (1 << n); ++mask) {
      ++lists;
      std::vector<int> labels(n);
      std::vector<double> scores(n);
      for (int i = 0; i < n; ++i) {
        labels[i] = (mask >> i) & 1;
        scores[i] = static_cast<double>(n - i);  // already ranked
      }
      // Hand oracle: walk the ranked list, average precision at each hit.
      double sum = 0.0;
      int hits = 0;
      long numerator = 0;  // exact value is numerator / (840 * hits)
      for (int i = 0; i < n; ++i) {
        if (!labels[i]) continue;
        ++hits;
        sum += static_cast<double>(hits) / static_cast<double>(i + 1);
        numerator += hits * (840 / (i + 1));
      }
      const auto ap = average_precision(scores, labels);
      const std::vector<double> tied(n, 0.5);  // ties keep list order
      const auto ap_tied = average_precision(tied, labels);
      if (hits == 0) {
        if (ap || ap_tied) o.fail("AP defined without positives");
        continue;
      }
      const double expected = sum / hits;
      const double exact = static_cast<double>(numerator) / (840.0 * hits);
      if (!ap || *ap != expected || !ap_tied || *ap_tied != expected ||
          std::abs(expected - exact) > 1e-15) {
        o.fail("AP mismatch for list of length " + std::to_string(n));
      }
    }
  }
  // F1 against hand-counted confusion matrices on every labelling pair of
  // length 6.
  const int n = 6;
  for (int dm = 0; dm < (1 << n); ++dm) {
    for (int lm = 0; lm < (1 << n); ++lm) {
      std::vector<int> d(n), y(n);
      int tp = 0, fp = 0, fn = 0, tn = 0;
      for (int i = 0; i < n; ++i) {
        d[i] = (dm >> i) & 1;
        y[i] = (lm >> i) & 1;
        tp += d[i] && y[i];
        fp += d[i] && !y[i];
        fn += !d[i] && y[i];
        tn += !d[i] && !y[i];
      }
      ++f1_cases;
      const double pos = 2 * tp + fp + fn == 0 ? 0.0 : 2.0 * tp / (2 * tp + fp + fn);
      const double neg = 2 * tn + fn + fp == 0 ? 0.0 : 2.0 * tn / (2 * tn + fn + fp);
      const auto f = f1_scores(d, y);
      if (f.positive != pos || f.negative != neg) o.fail("F1 mismatch");
    }
  }
  o.detail = std::to_string(lists) + " ranked lists, " + std::to_string(f1_cases) +
             " F1 cases";
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 8: negative sampling.

struct Pools {
  std::set<EntityId> heads, tails;
};

Pools pools_of(const KnowledgeGraph& g, RelationId r) {
  Pools p;
  for (const auto& t : g.triples()) {
    if (t.relation != r) continue;
    p.heads.insert(t.head);
    p.tails.insert(t.tail);
  }
  return p;
}

// Negatives a positive must receive: two per side unless fewer valid
// corruptions exist.
std::size_t expected_negatives(const KnowledgeGraph& g, RelationId r,
                               const Pools& pools, EntityId h, EntityId t) {
  std::size_t vh = 0, vt = 0;
  for (EntityId e : pools.heads) vh += !g.contains_triple(e, r, t);
  for (EntityId e : pools.tails) vt += !g.contains_triple(h, r, e);
  return std::min<std::size_t>(2, vh) + std::min<std::size_t>(2, vt);
}

void check_dataset(const KnowledgeGraph& g, const RelationDataset& ds, Outcome& o) {
  const auto pools = pools_of(g, ds.relation);
  std::set<std::pair<EntityId, EntityId>> train_pos, test_pos;
  for (auto [split, set] : {std::pair{&ds.train, &train_pos}, {&ds.test, &test_pos}}) {
    std::size_t expected = 0, negatives = 0;
    std::set<std::pair<EntityId, EntityId>> positives;
    for (const auto& i : *split) {
      if (i.positive) {
        positives.insert({i.head, i.tail});
        set->insert({i.head, i.tail});
        if (!g.contains_triple(i.head, ds.relation, i.tail)) o.fail("positive not observed");
        expected += expected_negatives(g, ds.relation, pools, i.head, i.tail);
      }
    }
    for (const auto& i : *split) {
      if (i.positive) continue;
      ++negatives;
      if (g.contains_triple(i.head, ds.relation, i.tail)) o.fail("negative is observed");
      // a head corruption keeps some positive's tail, and vice versa
      bool anchored = false;
      for (const auto& [h, t] : positives) {
        if (i.provenance == Provenance::kHeadCorrupted && t == i.tail &&
            pools.heads.count(i.head)) {
          anchored = true;
        }
        if (i.provenance == Provenance::kTailCorrupted && h == i.head &&
            pools.tails.count(i.tail)) {
          anchored = true;
        }
      }
      if (!anchored) o.fail("negative not derived from a positive of its split");
    }
    if (negatives != expected) o.fail("negative count differs from pool-permitted count");
  }
  for (const auto& p : test_pos) {
    if (train_pos.count(p)) o.fail("positive in both train and test");
  }
}

Outcome negative_sampling(const std::vector<RelationDataset>& planted,
                          const std::vector<KnowledgeGraph>& planted_graphs,
                          const std::vector<CorpusGraph>& corpus) {
  Outcome o;
  std::size_t datasets = 0, batches = 0;
  for (std::size_t i = 0; i < planted.size(); ++i) {
    check_dataset(planted_graphs[i], planted[i], o);
    ++datasets;
  }
  // Per-positive exactness on the random corpus, using the batch owners.
  for (const auto& c : corpus) {
    const auto& g = c.kb.graph;
    for (std::uint32_t r = 0; r < g.relation_count(); ++r) {
      const RelationId rel{r};
      const auto ds = make_relation_dataset(g, rel, derive_seed(c.seed, r));
      check_dataset(g, ds, o);
      ++datasets;
      std::vector<Triple> pos;
      for (const auto& t : g.triples()) {
        if (t.relation == rel) pos.push_back(t);
      }
      Rng rng(derive_seed(c.seed, 31, r));
      const auto batch = generate_negatives(g, rel, pos, rng);
      const auto pools = pools_of(g, rel);
      std::vector<std::size_t> got(pos.size(), 0), head(pos.size(), 0);
      for (std::size_t k = 0; k < batch.negatives.size(); ++k) {
        ++got[batch.owner[k]];
        head[batch.owner[k]] += batch.negatives[k].provenance == Provenance::kHeadCorrupted;
      }
      for (std::size_t p = 0; p < pos.size(); ++p) {
        const auto want = expected_negatives(g, rel, pools, pos[p].head, pos[p].tail);
        if (got[p] != want) o.fail("per-positive negative count");
        if (want == 4 && head[p] != 2) o.fail("head/tail split is not 2/2");
      }
      ++batches;
    }
  }
  // Capped relation: 1,000 positives give 4,000 train and 1,000 test rows.
  std::vector<std::array<std::string, 3>> triples;
  for (int i = 0; i < 1500; ++i) {
    triples.push_back({"h" + std::to_string(i % 700), "big",
                       "t" + std::to_string((i * 7) % 1500)});
  }
  const auto g = testing::graph_of(triples);
  const auto ds = make_relation_dataset(g, testing::relation(g, "big"), 3);
  check_dataset(g, ds, o);
  if (ds.train.size() != 4000 || ds.test.size() != 1000) {
    o.fail("capped counts " + std::to_string(ds.train.size()) + "/" +
           std::to_string(ds.test.size()));
  }
  o.detail = std::to_string(datasets) + " datasets, " + std::to_string(batches) +
             " per-positive batches, capped split " + std::to_string(ds.train.size()) +
             "/" + std::to_string(ds.test.size());
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 9: determinism of full pipeline runs.

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

Outcome pipeline_determinism() {
  Outcome o;
  const auto root = fs::temp_directory_path() / "cpr_acceptance_determinism";
  fs::remove_all(root);
  fs::create_directories(root);
  testing::PlantedContextOptions opts;
  opts.cluster_size = 50;
  opts.mediators = 15;
  opts.hubs = 6;
  opts.positives = 60;
  testing::write_kb(testing::planted_context_kb(77, opts), root / "triples.tsv",
                    root / "vectors.txt");
  auto run = [&](const std::string& name, std::size_t workers) {
    RunConfig c;
    c.triples = root / "triples.tsv";
    c.embeddings = root / "vectors.txt";
    c.output = root / name;
    c.methods = all_method_specs();
    c.min_instances = 20;
    c.extraction.num_walkers = 10;
    c.omit_timings = true;
    c.workers = workers;
    Pipeline p(c);
    p.compare();
    p.dump_features();
    p.analyze_correlation();
  };
  run("a", 1);
  run("b", 3);
  std::size_t files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    ++files;
    const auto rel = fs::relative(e.path(), root / "a");
    const auto other = root / "b" / rel;
    if (!fs::exists(other) || slurp(e.path()) != slurp(other)) {
      o.fail("differs: " + rel.string());
    }
  }
  std::size_t other_files = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "b")) {
    other_files += e.is_regular_file();
  }
  if (other_files != files) o.fail("file sets differ");
  if (files == 0) o.fail("no artifacts written");
  fs::remove_all(root);
  o.detail = std::to_string(files) + " artifacts byte-identical across two runs "
             "(1 and 3 workers)";
  return o;
}

// ---------------------------------------------------------------------------
// Criterion 10 (optional): full-data comparison.

Outcome full_data(bool& skipped) {
  Outcome o;
  const char* triples = std::getenv("CPR_EXT_TRIPLES");
  const char* vectors = std::getenv("CPR_EXT_EMBEDDINGS");
  skipped = !triples || !vectors || !fs::exists(triples) || !fs::exists(vectors);
  if (skipped) {
    o.detail = "set CPR_EXT_TRIPLES and CPR_EXT_EMBEDDINGS to run";
    return o;
  }
  RunConfig c;
  c.triples = triples;
  c.embeddings = vectors;
  if (const char* fmt = std::getenv("CPR_EXT_FORMAT"); fmt && std::string(fmt) == "binary") {
    c.embedding_format = VectorFormat::kBinary;
  }
  c.output = fs::temp_directory_path() / "cpr_acceptance_full";
  c.methods = parse_method_list("cpr,bb");
  c.k = 5;
  c.omit_timings = true;
  const auto reports = Pipeline(c).compare();
  if (!(reports[0].map > reports[1].map)) o.fail("C-PR MAP not above BB-PR");
  std::ostringstream d;
  d << std::fixed << std::setprecision(4) << "MAP C-PR " << reports[0].map
    << " vs BB-PR " << reports[1].map;
  o.detail = d.str();
  return o;
}

void report(int id, const std::string& name, const Outcome& o, bool& all,
            bool skipped = false) {
  const char* verdict = skipped ? "SKIP" : (o.pass ? "PASS" : "FAIL");
  std::printf("%s %d %s: %s\n", verdict, id, name.c_str(), o.detail.c_str());
  for (const auto& f : o.failures) std::printf("     - %s\n", f.c_str());
  std::fflush(stdout);
  if (!skipped && !o.pass) all = false;
}

template <typename F>
Outcome guarded(F&& body) {
  try {
    return body();
  } catch (const std::exception& e) {
    Outcome o;
    o.fail(std::string("exception: ") + e.what());
    o.detail = "aborted";
    return o;
  }
}

}  // namespace

int main() {
  bool all = true;
  const auto corpus = build_corpus(false);
  report(1, "walk-validity", guarded([&] { return walk_validity(corpus); }), all);
  report(2, "oracle-containment", guarded([&] { return oracle_containment(corpus); }), all);
  report(3, "context-filter-soundness", guarded([&] { return context_soundness(corpus); }), all);
  report(4, "degenerate-equivalence", guarded([] { return degenerate_equivalence(); }), all);
  std::vector<RelationDataset> planted;
  std::vector<KnowledgeGraph> planted_graphs;
  report(5, "planted-context-benchmark",
         guarded([&] { return planted_benchmark(planted, planted_graphs); }), all);
  try {
    std::printf("INFO 5 %s (not gating)\n", shared_target_note().c_str());
  } catch (const std::exception& e) {
    std::printf("INFO 5 shared-target variant failed: %s\n", e.what());
  }
  report(6, "classifier-correctness", guarded([] { return classifier_correctness(); }), all);
  report(7, "metric-correctness", guarded([] { return metric_correctness(); }), all);
  report(8, "negative-sampling",
         guarded([&] { return negative_sampling(planted, planted_graphs, corpus); }), all);
  report(9, "pipeline-determinism", guarded([] { return pipeline_determinism(); }), all);
  bool skipped = false;
  const auto ext = guarded([&] { return full_data(skipped); });
  bool informational = true;  // not gating
  report(10, "full-data-direction (optional)", ext, informational, skipped);
  std::printf("%s\n", all ? "ALL GATING CRITERIA PASSED" : "SOME CRITERIA FAILED");
  return all ? 0 : 1;
}
