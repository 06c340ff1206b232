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
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cpr/classifier.hpp"
#include "cpr/dataset.hpp"
#include "cpr/embedding.hpp"
#include "cpr/evaluation.hpp"
#include "cpr/features.hpp"
#include "cpr/pathfinder.hpp"

namespace cpr {

// A path extractor plus the optional bigram augmentation of its features.
struct MethodSpec {
  Method method = Method::kContext;
  bool bigrams = false;

  std::string name() const;          // "cpr", "cpr+bi"
  std::string display_name() const;  // "C-PR", "C-PR+Bi"

  friend auto operator<=>(const MethodSpec&, const MethodSpec&) = default;
  friend bool operator==(const MethodSpec&, const MethodSpec&) = default;
};

std::optional<MethodSpec> parse_method_spec(std::string_view text);
// Comma-separated list; throws ConfigError on unknown or repeated names.
std::vector<MethodSpec> parse_method_list(std::string_view text);
// The eight extractor/bigram combinations.
std::vector<MethodSpec> all_method_specs();

enum class Split { kTrain = 0, kTest = 1 };
std::string_view split_name(Split split);

struct ExtractionSettings {
  int max_length = 7;
  int num_walkers = 20;
  double theta = 0.5;
  double dna_threshold = 0.05;
  std::size_t relation_cap = 32;

  void validate() const;  // throws ConfigError
};

// relation seed -> instance seed; shared by every method so all extractors
// see the same walker streams for the same instance.
std::uint64_t instance_seed(std::uint64_t relation_seed, Split split,
                            std::size_t index);

PathQuery make_query(const ExtractionSettings& settings,
                     const LabeledInstance& instance, RelationId relation,
                     std::uint64_t seed);

struct SplitPaths {
  std::vector<PathSet> paths;  // aligned with the split's instances
  ExtractionStats stats;
};

struct RelationPaths {
  SplitPaths train;
  SplitPaths test;
  double seconds = 0.0;
};

// Extracts paths for every instance of both splits on the graph, which should
// already hide the relation's test positives.
RelationPaths extract_relation_paths(Method method, const KnowledgeGraph& graph,
                                     const EntityVectors* vectors,
                                     const RelationDataset& dataset,
                                     const ExtractionSettings& settings,
                                     std::size_t workers = 1);

std::vector<FeatureSet> paths_to_features(std::span<const PathSet> paths,
                                          bool bigrams);
std::vector<int> instance_labels(std::span<const LabeledInstance> instances);

struct RelationModel {
  FeatureVocabulary vocabulary;
  FeatureMatrix train_matrix;
  FeatureMatrix test_matrix;
  std::vector<int> train_labels;
  std::vector<int> test_labels;
  LRModel model;
  std::vector<double> test_scores;
  double train_seconds = 0.0;
};

// Vocabulary from the training split only, then matrices, training, and
// test scoring.
RelationModel fit_relation(const RelationPaths& paths,
                           const RelationDataset& dataset, bool bigrams,
                           const SymbolTables& symbols,
                           const TrainConfig& config,
                           std::size_t min_frequency = 1);

struct RelationResult {
  RelationId relation{};
  std::string relation_name;
  std::optional<double> average_precision;
  double f1_positive = 0.0;
  double f1_negative = 0.0;
  std::size_t features = 0;
  std::size_t train_instances = 0;
  std::size_t test_instances = 0;
  double extract_seconds = 0.0;
  double train_seconds = 0.0;
  std::vector<std::string> warnings;
};

// AP, and F1 at a 0.5 decision threshold, of test scores.
RelationResult score_relation(std::span<const double> scores,
                              std::span<const int> labels);

struct MethodReport {
  MethodSpec spec;
  std::vector<RelationResult> relations;
  // Means over relations; MAP skips relations whose AP is undefined.
  double map = 0.0;
  std::size_t map_relations = 0;
  double mean_f1_positive = 0.0;
  double mean_f1_negative = 0.0;
  double mean_features = 0.0;
  double mean_extract_seconds = 0.0;
  double mean_train_seconds = 0.0;
};

MethodReport summarize_method(const MethodSpec& spec,
                              std::vector<RelationResult> relations);

struct ExperimentSettings {
  ExtractionSettings extraction;
  TrainConfig train;
  std::size_t min_frequency = 1;
  std::size_t workers = 1;
};

// Runs every method over the same datasets. Each relation is evaluated on
// the graph with its test positives hidden; methods that share an extractor
// share its paths.
std::vector<MethodReport> compare_methods(
    const KnowledgeGraph& graph, const EntityVectors* vectors,
    std::span<const RelationDataset> datasets,
    std::span<const MethodSpec> methods, const ExperimentSettings& settings);

std::string render_comparison_text(std::span<const MethodReport> reports,
                                   bool include_timings = true);
std::string render_relation_text(const MethodReport& report,
                                 bool include_timings = true);
// One record per relation x method plus per-method aggregates.
nlohmann::json comparison_to_json(std::span<const MethodReport> reports,
                                  bool include_timings = true);

}  // namespace cpr
