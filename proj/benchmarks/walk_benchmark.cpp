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

#include <benchmark/benchmark.h>

#include "cpr/pathfinder.hpp"
#include "support/synthetic.hpp"

namespace cpr {
namespace {

const testing::SyntheticKb& world() {
  static const auto kb = testing::planted_context_kb(1);
  return kb;
}

// Extraction for a rotating set of observed triples of the target relation.
void run_extraction(benchmark::State& state, Method method) {
  const auto& kb = world();
  const auto r = testing::relation(kb.graph, "r");
  std::vector<Triple> queries;
  for (const auto& t : kb.graph.triples()) {
    if (t.relation == r) queries.push_back(t);
  }
  std::size_t i = 0, paths = 0;
  for (auto _ : state) {
    const Triple& t = queries[i++ % queries.size()];
    PathQuery q;
    q.source = t.head;
    q.target = t.tail;
    q.query_relation = r;
    q.seed = i;
    const auto res = extract_paths(method, kb.graph, &kb.vectors, q);
    paths += res.paths.size();
    benchmark::DoNotOptimize(res);
  }
  state.counters["pairs/s"] =
      benchmark::Counter(static_cast<double>(state.iterations()), benchmark::Counter::kIsRate);
  state.counters["paths/pair"] =
      static_cast<double>(paths) / static_cast<double>(state.iterations());
}

void BM_ContextWalk(benchmark::State& s) { run_extraction(s, Method::kContext); }
void BM_BidirectionalWalk(benchmark::State& s) { run_extraction(s, Method::kBidirectional); }
void BM_TwoSidedWalk(benchmark::State& s) { run_extraction(s, Method::kUnidirectional); }
void BM_DnaWalk(benchmark::State& s) { run_extraction(s, Method::kDna); }

BENCHMARK(BM_ContextWalk);
BENCHMARK(BM_BidirectionalWalk);
BENCHMARK(BM_TwoSidedWalk);
BENCHMARK(BM_DnaWalk);

}  // namespace
}  // namespace cpr
