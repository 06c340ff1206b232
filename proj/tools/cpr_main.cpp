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

#include <cstdint>
#include <cstdlib>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "cpr/error.hpp"
#include "cpr/pipeline.hpp"

namespace {

// Flag values; each overrides the config file only when given.
struct Flags {
  std::optional<std::string> config_file;
  std::optional<std::string> triples;
  std::optional<std::string> delimiter;
  std::optional<std::string> embeddings;
  std::optional<std::string> embedding_format;
  bool lowercase = false;
  bool spaces_to_underscores = false;
  bool underscores_to_spaces = false;
  std::optional<std::string> output;
  std::optional<std::string> methods;
  std::optional<int> eta;
  std::optional<int> walkers;
  std::optional<double> theta;
  std::optional<double> dna_threshold;
  std::optional<std::size_t> relation_cap;
  std::optional<double> lambda;
  std::optional<double> tol;
  std::optional<int> max_iter;
  std::optional<std::string> class_weight;
  std::optional<std::size_t> min_frequency;
  std::optional<std::size_t> min_instances;
  std::optional<std::size_t> cap;
  std::optional<double> train_ratio;
  std::optional<std::string> relations;
  std::optional<std::size_t> k;
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> workers;
  bool omit_timings = false;
  std::optional<std::size_t> top_k;
  std::optional<std::size_t> bins;
  bool dry_run = false;
  bool print_config = false;
};

void add_flags(CLI::App& app, Flags& f) {
  app.add_option("--config", f.config_file, "JSON config file (flags win)");
  app.add_option("--triples", f.triples, "Triples file, one h<TAB>r<TAB>t per line");
  app.add_option("--delimiter", f.delimiter, "Triple field delimiter (default tab)");
  app.add_option("--embeddings", f.embeddings, "word2vec vectors file");
  app.add_option("--embedding-format", f.embedding_format, "text or binary")
      ->check(CLI::IsMember({"text", "binary"}));
  app.add_flag("--lowercase", f.lowercase, "Lowercase tokens before lookup");
  app.add_flag("--spaces-to-underscores", f.spaces_to_underscores,
               "Map spaces to underscores before lookup");
  app.add_flag("--underscores-to-spaces", f.underscores_to_spaces,
               "Map underscores to spaces before lookup");
  app.add_option("-o,--output", f.output, "Artifact directory");
  app.add_option("--method,--methods", f.methods,
                 "Comma-separated methods: cpr, bb, b, dna, each optionally +bi");
  app.add_option("--eta", f.eta, "Maximum path length in edges (default 7)");
  app.add_option("--walkers", f.walkers, "Random walks per entity pair (default 20)");
  app.add_option("--theta", f.theta, "Head/tail weight of contextual relevance (default 0.5)");
  app.add_option("--dna-threshold", f.dna_threshold,
                 "Similarity threshold of the dna walker (default 0.05)");
  app.add_option("--relation-cap", f.relation_cap,
                 "Relation paths inferred per walk at most (default 32)");
  app.add_option("--lambda", f.lambda, "L2 strength (default 1.0)");
  app.add_option("--tol", f.tol, "Optimizer tolerance (default 1e-4)");
  app.add_option("--max-iter", f.max_iter, "Optimizer iterations (default 200)");
  app.add_option("--class-weight", f.class_weight, "balanced or none")
      ->check(CLI::IsMember({"balanced", "none"}));
  app.add_option("--min-frequency", f.min_frequency,
                 "Drop features seen in fewer training instances");
  app.add_option("--min-instances", f.min_instances,
                 "Triples a relation needs to be selected (default 1000)");
  app.add_option("--cap", f.cap, "Positives per relation (default 1000)");
  app.add_option("--train-ratio", f.train_ratio, "Train share of positives (default 0.8)");
  app.add_option("--relations", f.relations, "Comma-separated relation names");
  app.add_option("-k", f.k, "Number of relations to select at random");
  app.add_option("--seed", f.seed, "Global seed (default 1)");
  app.add_option("-j,--workers", f.workers, "Worker threads (default 1)");
  app.add_flag("--omit-timings", f.omit_timings,
               "Leave wall-clock fields out of artifacts");
  app.add_option("--top-k", f.top_k, "Features per relation in dump-features (default 10)");
  app.add_option("--bins", f.bins, "Histogram bins for analyze-correlation (default 10)");
  app.add_flag("--dry-run", f.dry_run,
               "Validate configuration and inputs, then exit");
  app.add_flag("--print-config", f.print_config,
               "Print the resolved configuration as JSON to stdout");
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::string item;
  for (char c : text + ",") {
    if (c == ',') {
      if (!item.empty()) out.push_back(item);
      item.clear();
    } else {
      item += c;
    }
  }
  return out;
}

cpr::RunConfig resolve(const Flags& f) {
  cpr::RunConfig c;
  if (f.config_file) c = cpr::load_config_file(*f.config_file);
  nlohmann::json j = nlohmann::json::object();
  if (f.triples) j["triples"] = *f.triples;
  if (f.delimiter) j["delimiter"] = *f.delimiter;
  if (f.embeddings) j["embeddings"] = *f.embeddings;
  if (f.embedding_format) j["embedding_format"] = *f.embedding_format;
  if (f.lowercase) j["lowercase"] = true;
  if (f.spaces_to_underscores) j["spaces_to_underscores"] = true;
  if (f.underscores_to_spaces) j["underscores_to_spaces"] = true;
  if (f.output) j["output"] = *f.output;
  if (f.methods) j["methods"] = *f.methods;
  if (f.eta) j["eta"] = *f.eta;
  if (f.walkers) j["walkers"] = *f.walkers;
  if (f.theta) j["theta"] = *f.theta;
  if (f.dna_threshold) j["dna_threshold"] = *f.dna_threshold;
  if (f.relation_cap) j["relation_cap"] = *f.relation_cap;
  if (f.lambda) j["lambda"] = *f.lambda;
  if (f.tol) j["tol"] = *f.tol;
  if (f.max_iter) j["max_iter"] = *f.max_iter;
  if (f.class_weight) j["class_weight"] = *f.class_weight;
  if (f.min_frequency) j["min_frequency"] = *f.min_frequency;
  if (f.min_instances) j["min_instances"] = *f.min_instances;
  if (f.cap) j["cap"] = *f.cap;
  if (f.train_ratio) j["train_ratio"] = *f.train_ratio;
  if (f.relations) {
    j["relations"] = split_list(*f.relations);
    if (f.config_file) j["k"] = nullptr;
  }
  if (f.k) {
    j["k"] = *f.k;
    if (f.config_file) j["relations"] = std::vector<std::string>{};
  }
  if (f.seed) j["seed"] = *f.seed;
  if (f.workers) j["workers"] = *f.workers;
  if (f.omit_timings) j["omit_timings"] = true;
  if (f.top_k) j["top_k"] = *f.top_k;
  if (f.bins) j["bins"] = *f.bins;
  cpr::apply_config_json(c, j);
  return c;
}

int run(const std::string& command, const Flags& flags) {
  const auto config = resolve(flags);
  if (flags.print_config) {
    std::cout << cpr::config_to_json(config).dump(2) << '\n';
  }
  cpr::Pipeline pipeline(config, [](const std::string& line) {
    std::cerr << "[cpr] " << line << '\n';
  });
  if (flags.dry_run) {
    pipeline.dry_run();
    return 0;
  }
  if (command == "ingest") {
    std::cout << cpr::format_stats(pipeline.ingest());
  } else if (command == "dataset") {
    const auto datasets = pipeline.build_datasets();
    const auto& symbols = pipeline.graph().symbols();
    for (const auto& ds : datasets) {
      std::cout << symbols.relation_name(ds.relation) << '\t' << ds.train.size()
                << " train\t" << ds.test.size() << " test\n";
    }
  } else if (command == "extract") {
    pipeline.extract();
  } else if (command == "train") {
    pipeline.train();
  } else if (command == "eval") {
    for (const auto& r : pipeline.evaluate()) {
      std::cout << cpr::render_relation_text(r, !config.omit_timings) << '\n';
    }
  } else if (command == "run") {
    pipeline.ingest();
    pipeline.build_datasets();
    pipeline.extract();
    pipeline.train();
    for (const auto& r : pipeline.evaluate()) {
      std::cout << cpr::render_relation_text(r, !config.omit_timings) << '\n';
    }
  } else if (command == "compare") {
    const auto reports = pipeline.compare();
    std::cout << cpr::render_comparison_text(reports, !config.omit_timings);
  } else if (command == "analyze-correlation") {
    std::cout << cpr::render_correlation_text(pipeline.analyze_correlation());
  } else if (command == "dump-features") {
    std::cout << pipeline.dump_features();
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relation path extraction and path-ranking experiments"};
  app.require_subcommand(1);
  app.fallthrough();
  Flags flags;
  add_flags(app, flags);
  const std::vector<std::pair<std::string, std::string>> commands = {
      {"ingest", "Load the triples and write graph statistics"},
      {"dataset", "Select relations and write train/test instances"},
      {"extract", "Extract relation paths for every instance"},
      {"train", "Build features and train one classifier per relation"},
      {"eval", "Score test instances and write per-relation reports"},
      {"run", "ingest, dataset, extract, train, and eval in sequence"},
      {"compare", "Run every configured method and write a comparison table"},
      {"analyze-correlation", "Histogram of pair similarity against labels"},
      {"dump-features", "Write the top-weighted features per relation"},
  };
  for (const auto& [name, help] : commands) app.add_subcommand(name, help);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }
  const std::string command = app.get_subcommands().front()->get_name();
  try {
    return run(command, flags);
  } catch (const cpr::ConfigError& e) {
    std::cerr << "cpr: configuration error: " << e.what() << '\n';
    return 1;
  } catch (const cpr::DataError& e) {
    std::cerr << "cpr: data error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "cpr: failure: " << e.what() << '\n';
    return 3;
  }
}
