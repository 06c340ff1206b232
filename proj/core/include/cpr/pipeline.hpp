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
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cpr/dataset.hpp"
#include "cpr/embedding.hpp"
#include "cpr/evaluation.hpp"
#include "cpr/experiment.hpp"
#include "cpr/graph.hpp"

namespace cpr {

struct RunConfig {
  std::filesystem::path triples;
  char delimiter = '\t';
  std::filesystem::path embeddings;  // empty when not supplied
  VectorFormat embedding_format = VectorFormat::kText;
  TokenNormalizer normalizer;
  std::filesystem::path output = "cpr-out";

  std::vector<MethodSpec> methods = {{Method::kContext, false}};
  ExtractionSettings extraction;
  TrainConfig train;
  std::size_t min_frequency = 1;

  std::size_t min_instances = 1000;
  DatasetOptions dataset;
  std::vector<std::string> relations;  // explicit list, else selection by k
  std::optional<std::size_t> k;

  std::uint64_t seed = 1;
  std::size_t workers = 1;
  bool omit_timings = false;  // keep wall-clock fields out of artifacts
  std::size_t top_k = 10;
  std::size_t bins = 10;

  bool needs_embeddings() const;
  // Both throw ConfigError. The second checks that an embeddings file is
  // present when a configured method needs one.
  void validate() const;
  void validate_embeddings() const;
};

// Unknown keys and mistyped values raise ConfigError.
RunConfig config_from_json(const nlohmann::json& j);
void apply_config_json(RunConfig& config, const nlohmann::json& j);
nlohmann::json config_to_json(const RunConfig& config);
RunConfig load_config_file(const std::filesystem::path& path);

// "r<id>_<name with unsafe characters replaced>"
std::string relation_slug(const SymbolTables& symbols, RelationId relation);

using LogSink = std::function<void(const std::string&)>;

// Staged, resumable driver. Each stage reads the previous stage's artifacts
// under config.output and refuses them when their stamped configuration hash
// differs from the one the current configuration implies. Files are written
// as "<name>.partial" and renamed once complete.
class Pipeline {
 public:
  explicit Pipeline(RunConfig config, LogSink log = {});
  ~Pipeline();

  const RunConfig& config() const { return config_; }

  // Validates the configuration and input files without computing anything.
  void dry_run();

  GraphStats ingest();
  std::vector<RelationDataset> build_datasets();
  void extract();
  void train();
  std::vector<MethodReport> evaluate();
  // extract, train, and evaluate every configured method (skipping stages
  // whose artifacts are current), then write the comparison report.
  std::vector<MethodReport> compare();
  CorrelationReport analyze_correlation();
  // Writes per-relation top-k feature lists and returns them as text.
  std::string dump_features();

  // Loaded on first use and shared by every stage.
  const KnowledgeGraph& graph();
  const EntityVectors& vectors();

  std::string dataset_hash();
  std::string extract_hash(Method method);
  std::string train_hash(const MethodSpec& spec);

 private:
  struct State;

  std::vector<RelationDataset> load_datasets();
  void extract_method(Method method);
  void train_method(const MethodSpec& spec);
  MethodReport evaluate_method(const MethodSpec& spec);
  bool up_to_date(const std::filesystem::path& manifest,
                  const std::string& hash) const;
  void log(const std::string& message) const;

  RunConfig config_;
  LogSink log_;
  std::unique_ptr<State> state_;
};

}  // namespace cpr
