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

#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cpr/error.hpp"
#include "cpr/pipeline.hpp"
#include "support/synthetic.hpp"

namespace cpr {
namespace {

namespace fs = std::filesystem;

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

class PipelineTest : public ::testing::Test {
 protected:
  void SetUp() override {
    dir_ = fs::temp_directory_path() /
           ("cpr_pipeline_" + std::string(::testing::UnitTest::GetInstance()
                                              ->current_test_info()
                                              ->name()));
    fs::remove_all(dir_);
    fs::create_directories(dir_);
    testing::PlantedContextOptions o;
    o.cluster_size = 30;
    o.mediators = 10;
    o.hubs = 4;
    o.positives = 25;
    auto kb = testing::planted_context_kb(2, o);
    testing::write_kb(kb, dir_ / "triples.tsv", dir_ / "vectors.txt");
  }
  void TearDown() override { fs::remove_all(dir_); }

  RunConfig config(const std::string& out = "out") const {
    RunConfig c;
    c.triples = dir_ / "triples.tsv";
    c.embeddings = dir_ / "vectors.txt";
    c.output = dir_ / out;
    c.relations = {"r"};
    c.min_instances = 10;
    c.extraction.num_walkers = 4;
    c.omit_timings = true;
    c.methods = parse_method_list("cpr,bb+bi");
    return c;
  }

  fs::path dir_;
};

TEST(Config, JsonRoundTripAndUnknownKeys) {
  RunConfig c;
  apply_config_json(c, nlohmann::json{{"triples", "t.tsv"},
                                      {"methods", "cpr,bb"},
                                      {"eta", 5},
                                      {"lambda", 0.5},
                                      {"k", 3},
                                      {"train_ratio", 0.7}});
  EXPECT_EQ(c.triples, "t.tsv");
  EXPECT_EQ(c.methods.size(), 2u);
  EXPECT_EQ(c.extraction.max_length, 5);
  EXPECT_EQ(c.train.lambda, 0.5);
  EXPECT_EQ(c.k, 3u);
  auto back = config_from_json(config_to_json(c));
  EXPECT_EQ(config_to_json(back), config_to_json(c));
  EXPECT_THROW(apply_config_json(c, nlohmann::json{{"walkerz", 3}}), ConfigError);
  EXPECT_THROW(apply_config_json(c, nlohmann::json{{"eta", "seven"}}), ConfigError);
}

TEST(Config, Validation) {
  RunConfig c;
  EXPECT_THROW(c.validate(), ConfigError);  // no triples
  c.triples = "t.tsv";
  c.embeddings.clear();
  EXPECT_NO_THROW(c.validate());
  EXPECT_THROW(c.validate_embeddings(), ConfigError);
  c.methods = parse_method_list("bb,b");
  EXPECT_NO_THROW(c.validate_embeddings());
  c.dataset.train_ratio = 0.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c.dataset.train_ratio = 1.0;
  c.k = 2;
  c.relations = {"x"};
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Slug, SanitizesNames) {
  SymbolTables s;
  s.relations.intern("Has A/B c");
  const auto slug = relation_slug(s, RelationId{0});
  EXPECT_EQ(slug.rfind("r0_", 0), 0u);
  EXPECT_EQ(slug.find('/'), std::string::npos);
  EXPECT_EQ(slug.find(' '), std::string::npos);
}

TEST_F(PipelineTest, StagesProduceArtifacts) {
  Pipeline p(config());
  EXPECT_NO_THROW(p.dry_run());
  auto stats = p.ingest();
  EXPECT_GT(stats.triples, 0u);
  auto ds = p.build_datasets();
  ASSERT_EQ(ds.size(), 1u);
  p.extract();
  p.train();
  auto reports = p.evaluate();
  ASSERT_EQ(reports.size(), 2u);
  const auto out = dir_ / "out";
  EXPECT_TRUE(fs::exists(out / "graph_stats.txt"));
  EXPECT_TRUE(fs::exists(out / "datasets" / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "paths" / "cpr" / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "models" / "bb+bi" / "manifest.json"));
  EXPECT_TRUE(fs::exists(out / "reports" / "cpr.eval.json"));
  for (const auto& e : fs::recursive_directory_iterator(out)) {
    EXPECT_NE(e.path().extension(), ".partial") << e.path();
  }
  EXPECT_FALSE(p.dump_features().empty());
  auto corr = p.analyze_correlation();
  EXPECT_GT(corr.pairs, 0u);
}

TEST_F(PipelineTest, RerunsAreByteIdentical) {
  Pipeline(config("a")).compare();
  Pipeline(config("b")).compare();
  for (const auto* rel : {"reports/compare.json", "reports/cpr.eval.txt",
                          "datasets/manifest.json"}) {
    EXPECT_EQ(slurp(dir_ / "a" / rel), slurp(dir_ / "b" / rel)) << rel;
  }
  for (const auto& e : fs::recursive_directory_iterator(dir_ / "a" / "paths")) {
    if (!e.is_regular_file()) continue;
    const auto other = dir_ / "b" / fs::relative(e.path(), dir_ / "a");
    EXPECT_EQ(slurp(e.path()), slurp(other)) << e.path();
  }
}

TEST_F(PipelineTest, WorkerCountDoesNotChangeResults) {
  auto one = config("one");
  auto four = config("four");
  four.workers = 4;
  Pipeline(one).compare();
  Pipeline(four).compare();
  EXPECT_EQ(slurp(dir_ / "one" / "reports" / "compare.json"),
            slurp(dir_ / "four" / "reports" / "compare.json"));
}

TEST_F(PipelineTest, StaleArtifactsAreRefused) {
  {
    Pipeline p(config());
    p.build_datasets();
    p.extract();
  }
  auto changed = config();
  changed.seed = 2;
  EXPECT_THROW(Pipeline(changed).extract(), ConfigError);
  auto longer = config();
  longer.extraction.max_length = 5;
  EXPECT_THROW(Pipeline(longer).train(), ConfigError);
  EXPECT_NO_THROW(Pipeline(config()).train());
}

TEST_F(PipelineTest, HashesFollowRelevantSettings) {
  Pipeline a(config());
  auto c = config();
  c.train.lambda = 2.0;
  Pipeline b(c);
  EXPECT_EQ(a.dataset_hash(), b.dataset_hash());
  EXPECT_EQ(a.extract_hash(Method::kContext), b.extract_hash(Method::kContext));
  EXPECT_NE(a.train_hash({Method::kContext, false}), b.train_hash({Method::kContext, false}));
  auto t = config();
  t.extraction.theta = 0.7;
  Pipeline d(t);
  EXPECT_NE(a.extract_hash(Method::kContext), d.extract_hash(Method::kContext));
  EXPECT_EQ(a.extract_hash(Method::kBidirectional), d.extract_hash(Method::kBidirectional));
}

TEST_F(PipelineTest, MissingInputsAreConfigErrors) {
  auto c = config();
  c.embeddings = dir_ / "nope.txt";
  EXPECT_THROW(Pipeline(c).dry_run(), ConfigError);
  auto t = config();
  t.triples = dir_ / "nope.tsv";
  EXPECT_THROW(Pipeline(t).ingest(), ConfigError);
  auto r = config();
  r.relations = {"no_such_relation"};
  EXPECT_THROW(Pipeline(r).build_datasets(), ConfigError);
}

}  // namespace
}  // namespace cpr
