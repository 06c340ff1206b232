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

#include <random>

#include "cpr/classifier.hpp"

namespace cpr {
namespace {

// Sparse binary rows at ~2% density with a planted linear signal.
void BM_Train(benchmark::State& state) {
  const auto rows = static_cast<std::size_t>(state.range(0));
  const auto cols = static_cast<std::size_t>(state.range(1));
  std::mt19937_64 rng(7);
  std::bernoulli_distribution on(0.02);
  FeatureMatrix x(cols);
  std::vector<int> y;
  for (std::size_t i = 0; i < rows; ++i) {
    SparseRow r;
    for (std::uint32_t j = 0; j < cols; ++j) {
      if (on(rng)) r.push_back(j);
    }
    int signal = 0;
    for (auto j : r) signal += j % 3 == 0 ? 1 : -1;
    y.push_back(signal > 0 ? 1 : 0);
    x.add_row(std::move(r), i);
  }
  for (auto _ : state) {
    auto m = train(x, y);
    benchmark::DoNotOptimize(m);
  }
  state.counters["nnz"] = static_cast<double>(x.nonzeros());
}

BENCHMARK(BM_Train)->Args({1000, 500})->Args({5000, 2000})->Unit(benchmark::kMillisecond);

}  // namespace
}  // namespace cpr
