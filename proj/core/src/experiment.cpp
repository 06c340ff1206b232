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
#include "cpr/experiment.hpp"

#include <algorithm>
#include <chrono>
#include <iomanip>
#include <map>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "cpr/error.hpp"
#include "cpr/parallel.hpp"

namespace cpr {
namespace {

constexpr std::uint64_t kInstanceSalt = 0x696e7374616e6365ULL;

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
      .count();
}

std::string display_method(Method m) {
  switch (m) {
    case Method::kContext: return "C-PR";
    case Method::kBidirectional: return "BB-PR";
    case Method::kUnidirectional: return "B-PR";
    case Method::kDna: return "DNA-PR";
  }
  return "?";
}

template <typename F>
auto annotate(const MethodSpec& spec, const std::string& relation, F&& body) {
  const std::string where = "[" + spec.name() + " / " + relation + "] ";
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError(where + e.what());
  } catch (const DataError& e) {
    throw DataError(where + e.what());
  } catch (const std::exception& e) {
    throw RuntimeFailure(where + e.what());
  }
}

SplitPaths extract_split(Method method, const KnowledgeGraph& graph,
                         const EntityVectors* vectors,
                         const RelationDataset& dataset, Split split,
                         const ExtractionSettings& settings,
                         std::size_t workers) {
  const auto& instances =
      split == Split::kTrain ? dataset.train : dataset.test;
  SplitPaths out;
  out.paths.resize(instances.size());
  std::vector<ExtractionStats> stats(instances.size());
  ExtractOptions options;
  options.dna_threshold = settings.dna_threshold;
  parallel_for(instances.size(), workers, [&](std::size_t i) {
    const auto query =
        make_query(settings, instances[i], dataset.relation,
                   instance_seed(dataset.seed, split, i));
    auto result = extract_paths(method, graph, vectors, query, options);
    out.paths[i] = std::move(result.paths);
    stats[i] = result.stats;
  });
  for (const auto& s : stats) out.stats += s;
  return out;
}

}  // namespace

std::string MethodSpec::name() const {
  return std::string(method_name(method)) + (bigrams ? "+bi" : "");
}

std::string MethodSpec::display_name() const {
  return display_method(method) + (bigrams ? "+Bi" : "");
}

std::optional<MethodSpec> parse_method_spec(std::string_view text) {
  MethodSpec spec;
  constexpr std::string_view kSuffix = "+bi";
  if (text.size() > kSuffix.size() &&
      text.substr(text.size() - kSuffix.size()) == kSuffix) {
    spec.bigrams = true;
    text.remove_suffix(kSuffix.size());
  }
  auto m = parse_method(text);
  if (!m) return std::nullopt;
  spec.method = *m;
  return spec;
}

std::vector<MethodSpec> parse_method_list(std::string_view text) {
  std::vector<MethodSpec> out;
  std::set<MethodSpec> seen;
  while (!text.empty()) {
    const auto comma = text.find(',');
    auto item = text.substr(0, comma);
    text = comma == std::string_view::npos ? std::string_view{}
                                           : text.substr(comma + 1);
    while (!item.empty() && item.front() == ' ') item.remove_prefix(1);
    while (!item.empty() && item.back() == ' ') item.remove_suffix(1);
    if (item.empty()) continue;
    auto spec = parse_method_spec(item);
    if (!spec) {
      throw ConfigError("unknown method '" + std::string(item) +
                        "' (expected cpr, bb, b, or dna, optionally +bi)");
    }
    if (!seen.insert(*spec).second) {
      throw ConfigError("method '" + std::string(item) + "' listed twice");
    }
    out.push_back(*spec);
  }
  if (out.empty()) throw ConfigError("no methods given");
  return out;
}

std::vector<MethodSpec> all_method_specs() {
  std::vector<MethodSpec> out;
  for (Method m : {Method::kContext, Method::kUnidirectional,
                   Method::kBidirectional, Method::kDna}) {
    out.push_back({m, false});
    out.push_back({m, true});
  }
  return out;
}

std::string_view split_name(Split split) {
  return split == Split::kTrain ? "train" : "test";
}

void ExtractionSettings::validate() const {
  if (max_length < 1) throw ConfigError("eta must be at least 1");
  if (num_walkers < 1) throw ConfigError("walkers must be at least 1");
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw ConfigError("theta must lie in [0, 1]");
  }
  if (!(dna_threshold >= -1.0 && dna_threshold <= 1.0)) {
    throw ConfigError("dna threshold must lie in [-1, 1]");
  }
  if (relation_cap < 1) throw ConfigError("relation cap must be at least 1");
}

std::uint64_t instance_seed(std::uint64_t relation_seed, Split split,
                            std::size_t index) {
  return derive_seed(relation_seed, kInstanceSalt,
                     static_cast<std::uint64_t>(split), index);
}

PathQuery make_query(const ExtractionSettings& settings,
                     const LabeledInstance& instance, RelationId relation,
                     std::uint64_t seed) {
  PathQuery q;
  q.source = instance.head;
  q.target = instance.tail;
  q.query_relation = relation;
  q.max_length = settings.max_length;
  q.num_walkers = settings.num_walkers;
  q.theta = settings.theta;
  q.seed = seed;
  q.relation_cap = settings.relation_cap;
  return q;
}

RelationPaths extract_relation_paths(Method method, const KnowledgeGraph& graph,
                                     const EntityVectors* vectors,
                                     const RelationDataset& dataset,
                                     const ExtractionSettings& settings,
                                     std::size_t workers) {
  const auto start = std::chrono::steady_clock::now();
  RelationPaths out;
  out.train = extract_split(method, graph, vectors, dataset, Split::kTrain,
                            settings, workers);
  out.test = extract_split(method, graph, vectors, dataset, Split::kTest,
                           settings, workers);
  out.seconds = seconds_since(start);
  return out;
}

std::vector<FeatureSet> paths_to_features(std::span<const PathSet> paths,
                                          bool bigrams) {
  std::vector<FeatureSet> out;
  out.reserve(paths.size());
  for (const auto& p : paths) {
    out.push_back(bigrams ? bigram_augment(p) : path_features(p));
  }
  return out;
}

std::vector<int> instance_labels(std::span<const LabeledInstance> instances) {
  std::vector<int> out;
  out.reserve(instances.size());
  for (const auto& inst : instances) out.push_back(inst.positive ? 1 : 0);
  return out;
}

RelationModel fit_relation(const RelationPaths& paths,
                           const RelationDataset& dataset, bool bigrams,
                           const SymbolTables& symbols,
                           const TrainConfig& config,
                           std::size_t min_frequency) {
  RelationModel out;
  const auto train_features = paths_to_features(paths.train.paths, bigrams);
  const auto test_features = paths_to_features(paths.test.paths, bigrams);
  out.vocabulary = FeatureVocabulary::build(train_features, min_frequency);
  out.train_matrix = build_matrix(train_features, out.vocabulary);
  out.test_matrix = build_matrix(test_features, out.vocabulary);
  out.train_labels = instance_labels(dataset.train);
  out.test_labels = instance_labels(dataset.test);
  const auto fingerprint = out.vocabulary.fingerprint(symbols);

  const auto start = std::chrono::steady_clock::now();
  out.model = train(out.train_matrix, out.train_labels, config);
  out.train_seconds = seconds_since(start);
  out.model.vocabulary_fingerprint = fingerprint;
  out.test_scores = score_matrix(out.model, out.test_matrix, fingerprint);
  return out;
}

RelationResult score_relation(std::span<const double> scores,
                              std::span<const int> labels) {
  RelationResult r;
  r.average_precision = average_precision(scores, labels);
  if (!r.average_precision) {
    r.warnings.push_back("no test positives; average precision undefined");
  }
  std::vector<int> decisions;
  decisions.reserve(scores.size());
  for (double s : scores) decisions.push_back(s >= 0.5 ? 1 : 0);
  auto f1 = f1_scores(decisions, labels);
  r.f1_positive = f1.positive;
  r.f1_negative = f1.negative;
  for (auto& w : f1.warnings) r.warnings.push_back(std::move(w));
  return r;
}

MethodReport summarize_method(const MethodSpec& spec,
                              std::vector<RelationResult> relations) {
  MethodReport m;
  m.spec = spec;
  m.relations = std::move(relations);
  const double n = static_cast<double>(m.relations.size());
  for (const auto& r : m.relations) {
    if (r.average_precision) {
      m.map += *r.average_precision;
      ++m.map_relations;
    }
    m.mean_f1_positive += r.f1_positive;
    m.mean_f1_negative += r.f1_negative;
    m.mean_features += static_cast<double>(r.features);
    m.mean_extract_seconds += r.extract_seconds;
    m.mean_train_seconds += r.train_seconds;
  }
  if (m.map_relations > 0) m.map /= static_cast<double>(m.map_relations);
  if (n > 0) {
    m.mean_f1_positive /= n;
    m.mean_f1_negative /= n;
    m.mean_features /= n;
    m.mean_extract_seconds /= n;
    m.mean_train_seconds /= n;
  }
  return m;
}

std::vector<MethodReport> compare_methods(
    const KnowledgeGraph& graph, const EntityVectors* vectors,
    std::span<const RelationDataset> datasets,
    std::span<const MethodSpec> methods, const ExperimentSettings& settings) {
  settings.extraction.validate();
  settings.train.validate();
  for (const auto& spec : methods) {
    if (method_uses_embeddings(spec.method) && vectors == nullptr) {
      throw ConfigError("method " + spec.name() + " needs entity embeddings");
    }
  }
  // results[relation][method]
  std::vector<std::vector<RelationResult>> results(
      datasets.size(), std::vector<RelationResult>(methods.size()));
  const bool across_relations = datasets.size() > 1;
  const std::size_t outer = across_relations ? settings.workers : 1;
  const std::size_t inner = across_relations ? 1 : settings.workers;

  parallel_for(datasets.size(), outer, [&](std::size_t d) {
    const auto& dataset = datasets[d];
    const std::string rel_name = graph.symbols().relation_name(dataset.relation);
    const auto eval = evaluation_graph(graph, dataset.test_positive_triples());
    std::map<Method, RelationPaths> cache;
    for (std::size_t m = 0; m < methods.size(); ++m) {
      const auto& spec = methods[m];
      results[d][m] = annotate(spec, rel_name, [&] {
        auto it = cache.find(spec.method);
        if (it == cache.end()) {
          it = cache
                   .emplace(spec.method,
                            extract_relation_paths(spec.method, eval.graph,
                                                   vectors, dataset,
                                                   settings.extraction, inner))
                   .first;
        }
        const auto& paths = it->second;
        auto fitted = fit_relation(paths, dataset, spec.bigrams,
                                   graph.symbols(), settings.train,
                                   settings.min_frequency);
        auto r = score_relation(fitted.test_scores, fitted.test_labels);
        r.relation = dataset.relation;
        r.relation_name = rel_name;
        r.features = fitted.vocabulary.size();
        r.train_instances = dataset.train.size();
        r.test_instances = dataset.test.size();
        r.extract_seconds = paths.seconds;
        r.train_seconds = fitted.train_seconds;
        for (const auto& w : fitted.model.warnings) r.warnings.push_back(w);
        return r;
      });
    }
  });

  std::vector<MethodReport> out;
  for (std::size_t m = 0; m < methods.size(); ++m) {
    std::vector<RelationResult> column;
    for (auto& row : results) column.push_back(std::move(row[m]));
    out.push_back(summarize_method(methods[m], std::move(column)));
  }
  return out;
}

std::string render_comparison_text(std::span<const MethodReport> reports,
                                   bool include_timings) {
  std::ostringstream os;
  os << std::fixed;
  os << std::left << std::setw(12) << "method" << std::right << std::setw(9)
     << "MAP" << std::setw(10) << "F1(+)" << std::setw(10) << "F1(-)"
     << std::setw(12) << "#features";
  if (include_timings) os << std::setw(12) << "extract(s)" << std::setw(10) << "train(s)";
  os << '\n';
  for (const auto& r : reports) {
    os << std::left << std::setw(12) << r.spec.display_name() << std::right
       << std::setprecision(4) << std::setw(9) << r.map << std::setw(10)
       << r.mean_f1_positive << std::setw(10) << r.mean_f1_negative
       << std::setprecision(1) << std::setw(12) << r.mean_features;
    if (include_timings) {
      os << std::setprecision(3) << std::setw(12) << r.mean_extract_seconds
         << std::setw(10) << r.mean_train_seconds;
    }
    os << '\n';
  }
  return os.str();
}

std::string render_relation_text(const MethodReport& report,
                                 bool include_timings) {
  std::ostringstream os;
  os << std::fixed;
  os << report.spec.display_name() << '\n';
  os << std::left << std::setw(32) << "relation" << std::right << std::setw(9)
     << "AP" << std::setw(10) << "F1(+)" << std::setw(10) << "F1(-)"
     << std::setw(10) << "#feat" << std::setw(8) << "train" << std::setw(8)
     << "test";
  if (include_timings) os << std::setw(12) << "extract(s)" << std::setw(10) << "train(s)";
  os << '\n';
  for (const auto& r : report.relations) {
    os << std::left << std::setw(32) << r.relation_name << std::right
       << std::setprecision(4) << std::setw(9);
    if (r.average_precision) {
      os << *r.average_precision;
    } else {
      os << "n/a";
    }
    os << std::setw(10) << r.f1_positive << std::setw(10) << r.f1_negative
       << std::setw(10) << r.features << std::setw(8) << r.train_instances
       << std::setw(8) << r.test_instances;
    if (include_timings) {
      os << std::setprecision(3) << std::setw(12) << r.extract_seconds
         << std::setw(10) << r.train_seconds;
    }
    os << '\n';
  }
  os << std::setprecision(4) << "MAP=" << report.map << " over "
     << report.map_relations << " relation(s)\n";
  return os.str();
}

nlohmann::json comparison_to_json(std::span<const MethodReport> reports,
                                  bool include_timings) {
  nlohmann::json records = nlohmann::json::array();
  nlohmann::json summary = nlohmann::json::array();
  for (const auto& m : reports) {
    for (const auto& r : m.relations) {
      nlohmann::json rec = {
          {"method", m.spec.name()},
          {"relation", r.relation_name},
          {"average_precision",
           r.average_precision ? nlohmann::json(*r.average_precision)
                               : nlohmann::json(nullptr)},
          {"f1_positive", r.f1_positive},
          {"f1_negative", r.f1_negative},
          {"features", r.features},
          {"train_instances", r.train_instances},
          {"test_instances", r.test_instances},
          {"warnings", r.warnings},
      };
      if (include_timings) {
        rec["extract_seconds"] = r.extract_seconds;
        rec["train_seconds"] = r.train_seconds;
      }
      records.push_back(std::move(rec));
    }
    nlohmann::json agg = {
        {"method", m.spec.name()},
        {"map", m.map},
        {"map_relations", m.map_relations},
        {"mean_f1_positive", m.mean_f1_positive},
        {"mean_f1_negative", m.mean_f1_negative},
        {"mean_features", m.mean_features},
    };
    if (include_timings) {
      agg["mean_extract_seconds"] = m.mean_extract_seconds;
      agg["mean_train_seconds"] = m.mean_train_seconds;
    }
    summary.push_back(std::move(agg));
  }
  return {{"records", std::move(records)}, {"methods", std::move(summary)}};
}

}  // namespace cpr
