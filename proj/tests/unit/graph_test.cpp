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

#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <random>
#include <sstream>

#include "cpr/error.hpp"
#include "cpr/graph.hpp"
#include "support/synthetic.hpp"

namespace cpr {
namespace {

using testing::entity;
using testing::fwd;
using testing::graph_of;
using testing::inv;
using testing::relation;

TripleFile parse(const std::string& text, TripleFormat format = {}) {
  std::istringstream in(text);
  return parse_triples(in, "input.tsv", format);
}

TEST(LoadTriples, SingleLine) {
  auto f = parse("a\tr\tb\n");
  EXPECT_EQ(f.triples.size(), 1u);
  EXPECT_EQ(f.symbols->entities.size(), 2u);
  EXPECT_EQ(f.symbols->relations.size(), 1u);
}

TEST(LoadTriples, DuplicateLinesCollapse) {
  auto f = parse("a\tr\tb\na\tr\tb\n");
  EXPECT_EQ(f.triples.size(), 1u);
  EXPECT_EQ(f.duplicate_lines, 1u);
}

TEST(LoadTriples, FirstSeenIdsAndComments) {
  auto f = parse("# header\n\nb\tr\ta\nc\ts\tb\n");
  EXPECT_EQ(f.symbols->entities.name(0), "b");
  EXPECT_EQ(f.symbols->entities.name(1), "a");
  EXPECT_EQ(f.symbols->entities.name(2), "c");
  EXPECT_EQ(f.symbols->relations.name(1), "s");
}

TEST(LoadTriples, MalformedLineReportsLineNumber) {
  try {
    parse("a\tr\tb\n# ok\na\tr\n");
    FAIL() << "expected DataError";
  } catch (const DataError& e) {
    EXPECT_EQ(e.line(), 3u);
    EXPECT_NE(std::string(e.what()).find("input.tsv:3"), std::string::npos);
  }
  EXPECT_THROW(parse("a\tr\tb\tc\n"), DataError);
  EXPECT_THROW(parse("a\t\tb\n"), DataError);
}

TEST(LoadTriples, EmptyInputIsAnError) {
  EXPECT_THROW(parse(""), DataError);
  EXPECT_THROW(parse("# only a comment\n"), DataError);
}

TEST(LoadTriples, CustomDelimiter) {
  TripleFormat fmt;
  fmt.delimiter = ',';
  auto f = parse("a,r,b\n", fmt);
  EXPECT_EQ(f.triples.size(), 1u);
}

TEST(LoadTriples, MissingFileIsDataError) {
  EXPECT_THROW(load_triples("/nonexistent/file.tsv"), DataError);
}

TEST(BuildGraph, InverseEdges) {
  auto g = graph_of({{"a", "r", "b"}});
  auto a = entity(g, "a"), b = entity(g, "b");
  ASSERT_EQ(g.adjacency(a).size(), 1u);
  EXPECT_EQ(g.adjacency(a)[0].neighbor, b);
  EXPECT_EQ(g.adjacency(a)[0].relation, fwd(g, "r"));
  ASSERT_EQ(g.adjacency(b).size(), 1u);
  EXPECT_EQ(g.adjacency(b)[0].neighbor, a);
  EXPECT_EQ(g.adjacency(b)[0].relation, inv(g, "r"));
}

TEST(BuildGraph, WithoutInverse) {
  auto g = graph_of({{"a", "r", "b"}}, false);
  EXPECT_EQ(g.degree(entity(g, "b")), 0u);
  EXPECT_EQ(g.edge_count(), 1u);
}

TEST(BuildGraph, DegreeCountsBothDirections) {
  auto g = graph_of({{"a", "r", "b"}, {"b", "s", "c"}});
  EXPECT_EQ(g.degree(entity(g, "b")), 2u);
}

TEST(BuildGraph, SelfLoopsAndParallelEdgesKept) {
  auto g = graph_of({{"a", "r", "a"}, {"a", "r", "b"}, {"a", "s", "b"}});
  auto a = entity(g, "a");
  // self loop yields a forward and an inverse entry at a
  EXPECT_EQ(g.degree(a), 4u);
  EXPECT_EQ(g.degree(entity(g, "b")), 2u);
}

TEST(Neighbors, InverseOnly) {
  auto g = graph_of({{"a", "r", "b"}});
  auto n = g.neighbors(entity(g, "b"));
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].relation, inv(g, "r"));
}

TEST(Neighbors, MaskHidesOnlyQueryEdge) {
  auto g = graph_of({{"h", "r", "t"}, {"h", "s", "t"}});
  auto h = entity(g, "h"), t = entity(g, "t");
  EdgeMask mask(Triple{h, relation(g, "r"), t});
  auto n = g.neighbors(h, mask);
  ASSERT_EQ(n.size(), 1u);
  EXPECT_EQ(n[0].neighbor, t);
  EXPECT_EQ(n[0].relation, fwd(g, "s"));
  auto back = g.neighbors(t, mask);
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].relation, inv(g, "s"));
}

TEST(Neighbors, InvalidNodeThrows) {
  auto g = graph_of({{"a", "r", "b"}});
  EXPECT_THROW(g.neighbors(EntityId{7}), std::out_of_range);
}

TEST(Neighbors, IsolatedNodeAfterHiding) {
  auto g = graph_of({{"a", "r", "b"}, {"c", "r", "d"}});
  auto hidden = g.without(std::vector<Triple>{
      {entity(g, "a"), relation(g, "r"), entity(g, "b")}});
  EXPECT_TRUE(hidden.neighbors(entity(g, "a")).empty());
  EXPECT_EQ(hidden.entity_count(), g.entity_count());
}

TEST(ContainsTriple, Direction) {
  auto g = graph_of({{"a", "r", "b"}, {"a", "s", "c"}});
  auto a = entity(g, "a"), b = entity(g, "b");
  EXPECT_TRUE(g.contains_triple(a, relation(g, "r"), b));
  EXPECT_FALSE(g.contains_triple(b, relation(g, "r"), a));
  EXPECT_FALSE(g.contains_triple(a, relation(g, "s"), b));
}

TEST(GraphStats, Format) {
  auto g = graph_of({{"a", "r", "b"}, {"b", "s", "c"}});
  EXPECT_EQ(format_stats(g.stats()),
            "entities=3\nrelations=2\ntriples=2\nedges=4\ninverse_edges=true\n");
}

// Property checks on random graphs.
class GraphProperties : public ::testing::TestWithParam<int> {};

TEST_P(GraphProperties, InverseClosureMaskLocalityAndNoDuplicates) {
  auto kb = testing::random_kb(1000 + GetParam());
  const auto& g = kb.graph;
  for (const auto& t : g.triples()) {
    auto back = g.neighbors(t.tail);
    EXPECT_NE(std::find(back.begin(), back.end(),
                        Edge{t.head, SignedRelation{t.relation, true}}),
              back.end());
  }
  for (std::size_t v = 0; v < g.entity_count(); ++v) {
    auto adj = g.neighbors(EntityId{static_cast<std::uint32_t>(v)});
    std::vector<std::pair<std::uint32_t, std::uint32_t>> keys;
    for (const auto& e : adj) keys.emplace_back(to_index(e.neighbor), e.relation.code());
    std::sort(keys.begin(), keys.end());
    EXPECT_EQ(std::adjacent_find(keys.begin(), keys.end()), keys.end());
  }
  const Triple masked = g.triples()[g.triples().size() / 2];
  EdgeMask mask(masked);
  std::size_t removed = 0;
  for (std::size_t v = 0; v < g.entity_count(); ++v) {
    const EntityId id{static_cast<std::uint32_t>(v)};
    const auto full = g.neighbors(id);
    const auto part = g.neighbors(id, mask);
    if (id != masked.head && id != masked.tail) {
      EXPECT_EQ(full.size(), part.size());
    }
    removed += full.size() - part.size();
  }
  EXPECT_EQ(removed, 2u);
}

INSTANTIATE_TEST_SUITE_P(Random, GraphProperties, ::testing::Range(0, 20));

TEST(GraphReload, Deterministic) {
  const auto dir = std::filesystem::temp_directory_path() / "cpr_graph_reload";
  std::filesystem::create_directories(dir);
  const auto file = dir / "t.tsv";
  {
    std::ofstream out(file);
    out << "x\tr\ty\ny\ts\tz\nz\tr\tx\n";
  }
  auto a = load_graph(file);
  auto b = load_graph(file);
  ASSERT_EQ(a.entity_count(), b.entity_count());
  for (std::size_t v = 0; v < a.entity_count(); ++v) {
    const EntityId id{static_cast<std::uint32_t>(v)};
    EXPECT_EQ(a.symbols().entity_name(id), b.symbols().entity_name(id));
    auto ea = a.adjacency(id);
    auto eb = b.adjacency(id);
    EXPECT_TRUE(std::equal(ea.begin(), ea.end(), eb.begin(), eb.end()));
  }
}

}  // namespace
}  // namespace cpr
