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

#include "cpr/pipeline.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iomanip>
#include <mutex>
#include <set>
#include <sstream>
#include <unordered_set>

#include <nlohmann/json.hpp>

#include "cpr/error.hpp"
#include "cpr/parallel.hpp"
#include "cpr/random.hpp"

namespace cpr {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr std::uint64_t kSelectionSalt = 0x73656c656374ULL;
constexpr std::uint64_t kRelationSalt = 0x72656c6174696f6eULL;
constexpr std::string_view kStampPrefix = "# config-hash: ";

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

std::string hash_of(const json& j) {
  return hex64(Fingerprint().add(j.dump()).value());
}

std::string stamp(const std::string& hash) {
  return std::string(kStampPrefix) + hash + "\n";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("missing artifact " + path.string() +
                      " (run the producing stage first)");
  }
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// The file is complete only once renamed; an interrupted stage leaves a
// "*.partial" file that no reader opens.
void write_file(const fs::path& path, const std::string& content) {
  fs::create_directories(path.parent_path());
  fs::path partial = path;
  partial += ".partial";
  {
    std::ofstream out(partial, std::ios::binary | std::ios::trunc);
    if (!out) throw RuntimeFailure("cannot write " + partial.string());
    out << content;
    out.flush();
    if (!out) throw RuntimeFailure("write failed for " + partial.string());
  }
  fs::rename(partial, path);
}

void write_json(const fs::path& path, const json& j) {
  write_file(path, j.dump(2) + "\n");
}

json read_json(const fs::path& path) {
  try {
    return json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

// Checks the stamp on the first line and returns the remaining content.
std::string read_stamped(const fs::path& path, const std::string& expected) {
  std::string content = read_file(path);
  const auto eol = content.find('\n');
  const std::string first = content.substr(0, eol);
  if (first.rfind(kStampPrefix, 0) != 0) {
    throw DataError(path.string(), 1, "missing config-hash stamp");
  }
  const std::string found = first.substr(kStampPrefix.size());
  if (found != expected) {
    throw ConfigError(path.string() + " was produced by a different "
                      "configuration (hash " + found + ", expected " +
                      expected + ")");
  }
  return eol == std::string::npos ? std::string() : content.substr(eol + 1);
}

void check_manifest(const json& manifest, const fs::path& path,
                    const std::string& expected) {
  const auto found = manifest.value("config_hash", std::string());
  if (found != expected) {
    throw ConfigError(path.string() + " was produced by a different "
                      "configuration (hash " + found + ", expected " +
                      expected + "); rerun the producing stage");
  }
}

std::string_view format_name(VectorFormat f) {
  return f == VectorFormat::kBinary ? "binary" : "text";
}

std::vector<std::string> split_fields(std::string_view line) {
  std::vector<std::string> out;
  while (true) {
    const auto pos = line.find('\t');
    out.emplace_back(line.substr(0, pos));
    if (pos == std::string_view::npos) break;
    line.remove_prefix(pos + 1);
  }
  return out;
}

template <typename T>
T get_as(const json& j, const char* key) {
  try {
    return j.get<T>();
  } catch (const json::exception&) {
    throw ConfigError(std::string("config key '") + key + "' has the wrong type");
  }
}

std::string stats_line(const ExtractionStats& s) {
  std::ostringstream os;
  os << "walks=" << s.walks << " successful=" << s.successful_walks
     << " rejected=" << s.rejected_candidates
     << " fallbacks=" << s.embedding_fallbacks;
  return os.str();
}

json stats_json(const ExtractionStats& s) {
  return {{"walks", s.walks},
          {"successful_walks", s.successful_walks},
          {"rejected_candidates", s.rejected_candidates},
          {"embedding_fallbacks", s.embedding_fallbacks}};
}

}  // namespace

// ---------------------------------------------------------------- config

bool RunConfig::needs_embeddings() const {
  return std::any_of(methods.begin(), methods.end(), [](const MethodSpec& m) {
    return method_uses_embeddings(m.method);
  });
}

void RunConfig::validate() const {
  if (triples.empty()) throw ConfigError("no triples file given");
  if (methods.empty()) throw ConfigError("no methods given");
  std::set<MethodSpec> unique(methods.begin(), methods.end());
  if (unique.size() != methods.size()) {
    throw ConfigError("a method is listed twice");
  }
  extraction.validate();
  try {
    train.validate();
  } catch (const std::exception& e) {
    throw ConfigError(e.what());
  }
  if (!(dataset.train_ratio > 0.0 && dataset.train_ratio <= 1.0)) {
    throw ConfigError("train ratio must lie in (0, 1]");
  }
  if (dataset.cap == 0) throw ConfigError("cap must be positive");
  if (workers == 0) throw ConfigError("workers must be positive");
  if (bins == 0) throw ConfigError("bins must be positive");
  if (!relations.empty() && k) {
    throw ConfigError("give either a relation list or k, not both");
  }
}

void RunConfig::validate_embeddings() const {
  if (!needs_embeddings()) return;
  if (embeddings.empty()) {
    throw ConfigError("methods cpr and dna need an embeddings file");
  }
  if (!fs::exists(embeddings)) {
    throw ConfigError("embeddings file not found: " + embeddings.string());
  }
}

void apply_config_json(RunConfig& c, const json& j) {
  if (!j.is_object()) throw ConfigError("config must be a JSON object");
  for (const auto& [key, v] : j.items()) {
    const char* k = key.c_str();
    if (key == "triples") {
      c.triples = get_as<std::string>(v, k);
    } else if (key == "delimiter") {
      auto d = get_as<std::string>(v, k);
      if (d == "tab" || d == "\\t") d = "\t";
      if (d.size() != 1) throw ConfigError("delimiter must be one character");
      c.delimiter = d[0];
    } else if (key == "embeddings") {
      c.embeddings = get_as<std::string>(v, k);
    } else if (key == "embedding_format") {
      const auto f = get_as<std::string>(v, k);
      if (f == "text") c.embedding_format = VectorFormat::kText;
      else if (f == "binary") c.embedding_format = VectorFormat::kBinary;
      else throw ConfigError("embedding_format must be text or binary");
    } else if (key == "lowercase") {
      c.normalizer.lowercase = get_as<bool>(v, k);
    } else if (key == "spaces_to_underscores") {
      c.normalizer.spaces_to_underscores = get_as<bool>(v, k);
    } else if (key == "underscores_to_spaces") {
      c.normalizer.underscores_to_spaces = get_as<bool>(v, k);
    } else if (key == "output") {
      c.output = get_as<std::string>(v, k);
    } else if (key == "methods") {
      if (v.is_string()) {
        c.methods = parse_method_list(v.get<std::string>());
      } else {
        std::string joined;
        for (const auto& m : get_as<std::vector<std::string>>(v, k)) {
          joined += m + ",";
        }
        c.methods = parse_method_list(joined);
      }
    } else if (key == "eta") {
      c.extraction.max_length = get_as<int>(v, k);
    } else if (key == "walkers") {
      c.extraction.num_walkers = get_as<int>(v, k);
    } else if (key == "theta") {
      c.extraction.theta = get_as<double>(v, k);
    } else if (key == "dna_threshold") {
      c.extraction.dna_threshold = get_as<double>(v, k);
    } else if (key == "relation_cap") {
      c.extraction.relation_cap = get_as<std::size_t>(v, k);
    } else if (key == "lambda") {
      c.train.lambda = get_as<double>(v, k);
    } else if (key == "tol") {
      c.train.tol = get_as<double>(v, k);
    } else if (key == "max_iter") {
      c.train.max_iter = get_as<int>(v, k);
    } else if (key == "class_weight") {
      const auto w = get_as<std::string>(v, k);
      if (w == "balanced") c.train.class_weight = ClassWeighting::kBalanced;
      else if (w == "none") c.train.class_weight = ClassWeighting::kNone;
      else throw ConfigError("class_weight must be balanced or none");
    } else if (key == "min_frequency") {
      c.min_frequency = get_as<std::size_t>(v, k);
    } else if (key == "min_instances") {
      c.min_instances = get_as<std::size_t>(v, k);
    } else if (key == "cap") {
      c.dataset.cap = get_as<std::size_t>(v, k);
    } else if (key == "train_ratio") {
      c.dataset.train_ratio = get_as<double>(v, k);
    } else if (key == "negatives_per_side") {
      c.dataset.negatives_per_side = get_as<std::size_t>(v, k);
    } else if (key == "max_retries") {
      c.dataset.max_retries = get_as<std::size_t>(v, k);
    } else if (key == "relations") {
      c.relations = get_as<std::vector<std::string>>(v, k);
    } else if (key == "k") {
      if (v.is_null()) c.k.reset();
      else c.k = get_as<std::size_t>(v, k);
    } else if (key == "seed") {
      c.seed = get_as<std::uint64_t>(v, k);
    } else if (key == "workers") {
      c.workers = get_as<std::size_t>(v, k);
    } else if (key == "omit_timings") {
      c.omit_timings = get_as<bool>(v, k);
    } else if (key == "top_k") {
      c.top_k = get_as<std::size_t>(v, k);
    } else if (key == "bins") {
      c.bins = get_as<std::size_t>(v, k);
    } else {
      throw ConfigError("unknown config key '" + key + "'");
    }
  }
}

RunConfig config_from_json(const json& j) {
  RunConfig c;
  apply_config_json(c, j);
  return c;
}

json config_to_json(const RunConfig& c) {
  std::vector<std::string> methods;
  for (const auto& m : c.methods) methods.push_back(m.name());
  json j = {
      {"triples", c.triples.string()},
      {"delimiter", std::string(1, c.delimiter)},
      {"embeddings", c.embeddings.string()},
      {"embedding_format", format_name(c.embedding_format)},
      {"lowercase", c.normalizer.lowercase},
      {"spaces_to_underscores", c.normalizer.spaces_to_underscores},
      {"underscores_to_spaces", c.normalizer.underscores_to_spaces},
      {"output", c.output.string()},
      {"methods", methods},
      {"eta", c.extraction.max_length},
      {"walkers", c.extraction.num_walkers},
      {"theta", c.extraction.theta},
      {"dna_threshold", c.extraction.dna_threshold},
      {"relation_cap", c.extraction.relation_cap},
      {"lambda", c.train.lambda},
      {"tol", c.train.tol},
      {"max_iter", c.train.max_iter},
      {"class_weight", c.train.class_weight == ClassWeighting::kBalanced
                           ? "balanced"
                           : "none"},
      {"min_frequency", c.min_frequency},
      {"min_instances", c.min_instances},
      {"cap", c.dataset.cap},
      {"train_ratio", c.dataset.train_ratio},
      {"negatives_per_side", c.dataset.negatives_per_side},
      {"max_retries", c.dataset.max_retries},
      {"relations", c.relations},
      {"k", c.k ? json(*c.k) : json(nullptr)},
      {"seed", c.seed},
      {"workers", c.workers},
      {"omit_timings", c.omit_timings},
      {"top_k", c.top_k},
      {"bins", c.bins},
  };
  return j;
}

RunConfig load_config_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path.string() + ": " + e.what());
  }
  return config_from_json(j);
}

std::string relation_slug(const SymbolTables& symbols, RelationId relation) {
  std::string name = symbols.relation_name(relation);
  for (char& ch : name) {
    const bool safe = (ch >= 'a' && ch <= 'z') || (ch >= 'A' && ch <= 'Z') ||
                      (ch >= '0' && ch <= '9') || ch == '-' || ch == '.';
    if (!safe) ch = '_';
  }
  if (name.size() > 60) name.resize(60);
  return "r" + std::to_string(static_cast<std::uint32_t>(relation)) + "_" + name;
}

// -------------------------------------------------------------- pipeline

struct Pipeline::State {
  std::optional<KnowledgeGraph> graph;
  std::string graph_fingerprint;
  std::optional<EntityVectors> vectors;
  std::optional<std::string> dataset_hash;
  std::map<Method, std::string> extract_hashes;
};

Pipeline::Pipeline(RunConfig config, LogSink log)
    : config_(std::move(config)),
      log_(std::move(log)),
      state_(std::make_unique<State>()) {
  config_.validate();
}

Pipeline::~Pipeline() = default;

void Pipeline::log(const std::string& message) const {
  if (log_) log_(message);
}

namespace {

template <typename F>
decltype(auto) run_stage(const Pipeline& p, const LogSink& log,
                         const std::string& name, F&& body) {
  (void)p;
  const auto start = std::chrono::steady_clock::now();
  if (log) log("stage " + name + ": start");
  struct Done {
    const LogSink& log;
    const std::string& name;
    std::chrono::steady_clock::time_point start;
    ~Done() {
      if (!log) return;
      const double s = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
      std::ostringstream os;
      os << "stage " << name << ": finished in " << std::fixed
         << std::setprecision(3) << s << " s";
      log(os.str());
    }
  };
  try {
    Done done{log, name, start};
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError("stage " + name + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("stage " + name + ": " + e.what());
  } catch (const std::exception& e) {
    throw RuntimeFailure("stage " + name + ": " + e.what());
  }
}

template <typename F>
decltype(auto) for_relation(const std::string& relation, F&& body) {
  try {
    return body();
  } catch (const ConfigError& e) {
    throw ConfigError("relation " + relation + ": " + e.what());
  } catch (const DataError& e) {
    throw DataError("relation " + relation + ": " + e.what());
  } catch (const std::exception& e) {
    throw RuntimeFailure("relation " + relation + ": " + e.what());
  }
}

}  // namespace

const KnowledgeGraph& Pipeline::graph() {
  if (!state_->graph) {
    // A path that does not exist is a configuration mistake; an unreadable
    // or malformed file is a data error.
    if (!fs::exists(config_.triples)) {
      throw ConfigError("triples file not found: " + config_.triples.string());
    }
    TripleFormat format;
    format.delimiter = config_.delimiter;
    state_->graph = load_graph(config_.triples, format);
    const auto& g = *state_->graph;
    const auto& sym = g.symbols();
    Fingerprint fp;
    for (const auto& t : g.triples()) {
      fp.add(sym.entity_name(t.head)).add("\t");
      fp.add(sym.relation_name(t.relation)).add("\t");
      fp.add(sym.entity_name(t.tail)).add("\n");
    }
    state_->graph_fingerprint = hex64(fp.value());
    log("loaded " + std::to_string(g.triple_count()) + " triples over " +
        std::to_string(g.entity_count()) + " entities and " +
        std::to_string(g.relation_count()) + " relations");
  }
  return *state_->graph;
}

const EntityVectors& Pipeline::vectors() {
  if (!state_->vectors) {
    if (config_.embeddings.empty()) {
      throw ConfigError("this stage needs an embeddings file");
    }
    if (!fs::exists(config_.embeddings)) {
      throw ConfigError("embeddings file not found: " + config_.embeddings.string());
    }
    const auto& g = graph();
    std::unordered_set<std::string> keep;
    for (const auto& name : g.symbols().entities.names()) {
      keep.insert(config_.normalizer(name));
    }
    VectorLoadOptions options;
    options.format = config_.embedding_format;
    options.normalizer = config_.normalizer;
    options.keep = &keep;
    const auto store = load_vectors(config_.embeddings, options);
    state_->vectors =
        EntityVectors::bind(g.symbols(), store, config_.normalizer);
    std::ostringstream os;
    os << "embeddings: dimension " << store.dimension() << ", "
       << state_->vectors->covered() << " of " << g.entity_count()
       << " entities covered (" << std::fixed << std::setprecision(1)
       << 100.0 * state_->vectors->coverage() << "%)";
    log(os.str());
  }
  return *state_->vectors;
}

std::string Pipeline::dataset_hash() {
  if (!state_->dataset_hash) {
    graph();
    json j = {{"graph", state_->graph_fingerprint},
              {"seed", config_.seed},
              {"min_instances", config_.min_instances},
              {"cap", config_.dataset.cap},
              {"train_ratio", config_.dataset.train_ratio},
              {"negatives_per_side", config_.dataset.negatives_per_side},
              {"max_retries", config_.dataset.max_retries},
              {"relations", config_.relations},
              {"k", config_.k ? json(*config_.k) : json(nullptr)}};
    state_->dataset_hash = hash_of(j);
  }
  return *state_->dataset_hash;
}

std::string Pipeline::extract_hash(Method method) {
  auto it = state_->extract_hashes.find(method);
  if (it != state_->extract_hashes.end()) return it->second;
  json j = {{"dataset", dataset_hash()},
            {"method", method_name(method)},
            {"eta", config_.extraction.max_length},
            {"walkers", config_.extraction.num_walkers},
            {"relation_cap", config_.extraction.relation_cap}};
  if (method == Method::kContext) j["theta"] = config_.extraction.theta;
  if (method == Method::kDna) {
    j["dna_threshold"] = config_.extraction.dna_threshold;
  }
  if (method_uses_embeddings(method)) {
    std::error_code ec;
    const auto size = fs::file_size(config_.embeddings, ec);
    j["embeddings"] = {
        {"path", config_.embeddings.string()},
        {"size", ec ? 0 : size},
        {"format", format_name(config_.embedding_format)},
        {"lowercase", config_.normalizer.lowercase},
        {"spaces_to_underscores", config_.normalizer.spaces_to_underscores},
        {"underscores_to_spaces", config_.normalizer.underscores_to_spaces}};
  }
  return state_->extract_hashes[method] = hash_of(j);
}

std::string Pipeline::train_hash(const MethodSpec& spec) {
  json j = {{"extract", extract_hash(spec.method)},
            {"bigrams", spec.bigrams},
            {"lambda", config_.train.lambda},
            {"tol", config_.train.tol},
            {"max_iter", config_.train.max_iter},
            {"class_weight",
             config_.train.class_weight == ClassWeighting::kBalanced},
            {"min_frequency", config_.min_frequency}};
  return hash_of(j);
}

bool Pipeline::up_to_date(const fs::path& manifest,
                          const std::string& hash) const {
  if (!fs::exists(manifest)) return false;
  try {
    return read_json(manifest).value("config_hash", std::string()) == hash;
  } catch (const Error&) {
    return false;
  }
}

void Pipeline::dry_run() {
  run_stage(*this, log_, "dry-run", [&] {
    config_.validate_embeddings();
    if (!fs::exists(config_.triples)) {
      throw ConfigError("triples file not found: " + config_.triples.string());
    }
    const auto& g = graph();
    for (const auto& name : config_.relations) {
      if (!g.symbols().find_relation(name)) {
        throw ConfigError("unknown relation '" + name + "'");
      }
    }
    if (!config_.embeddings.empty()) {
      std::ifstream in(config_.embeddings, std::ios::binary);
      if (!in) {
        throw ConfigError("cannot open embeddings file " +
                          config_.embeddings.string());
      }
      std::string header;
      std::getline(in, header);
      std::istringstream hs(header);
      std::size_t vocab = 0, dim = 0;
      if (!(hs >> vocab >> dim) || dim == 0) {
        throw DataError(config_.embeddings.string(), 1,
                        "expected '<vocab size> <dimension>' header");
      }
    }
    log("dry run: configuration and inputs are valid");
  });
}

GraphStats Pipeline::ingest() {
  return run_stage(*this, log_, "ingest", [&] {
    const auto& g = graph();
    const auto stats = g.stats();
    std::string body = format_stats(stats);
    std::ostringstream rel;
    std::vector<std::size_t> counts(g.relation_count(), 0);
    for (const auto& t : g.triples()) ++counts[static_cast<std::uint32_t>(t.relation)];
    for (std::size_t r = 0; r < counts.size(); ++r) {
      rel << "relation\t" << g.symbols().relation_name(RelationId{static_cast<std::uint32_t>(r)})
          << '\t' << counts[r] << '\n';
    }
    write_file(config_.output / "graph_stats.txt",
               stamp(state_->graph_fingerprint) + body + rel.str());
    return stats;
  });
}

std::vector<RelationDataset> Pipeline::build_datasets() {
  return run_stage(*this, log_, "dataset", [&] {
    const auto& g = graph();
    const auto& sym = g.symbols();
    std::vector<std::size_t> counts(g.relation_count(), 0);
    for (const auto& t : g.triples()) ++counts[static_cast<std::uint32_t>(t.relation)];

    std::vector<RelationId> relations;
    if (!config_.relations.empty()) {
      std::set<RelationId> seen;
      for (const auto& name : config_.relations) {
        auto r = sym.find_relation(name);
        if (!r) throw ConfigError("unknown relation '" + name + "'");
        if (!seen.insert(*r).second) continue;
        if (counts[static_cast<std::uint32_t>(*r)] < config_.min_instances) {
          log("warning: relation " + name + " has only " +
              std::to_string(counts[static_cast<std::uint32_t>(*r)]) +
              " triples (minimum " + std::to_string(config_.min_instances) +
              ")");
        }
        relations.push_back(*r);
      }
    } else {
      Rng rng(derive_seed(config_.seed, kSelectionSalt));
      relations = select_test_relations(g, config_.min_instances, config_.k, rng);
      if (relations.empty()) {
        throw ConfigError("no relation has at least " +
                          std::to_string(config_.min_instances) + " triples");
      }
    }

    const std::string hash = dataset_hash();
    const fs::path dir = config_.output / "datasets";
    std::vector<RelationDataset> out;
    json entries = json::array();
    for (RelationId r : relations) {
      const std::string name = sym.relation_name(r);
      auto ds = for_relation(name, [&] {
        return make_relation_dataset(
            g, r, derive_seed(config_.seed, kRelationSalt, static_cast<std::uint32_t>(r)),
            config_.dataset);
      });
      const std::string slug = relation_slug(sym, r);
      for (const auto& w : ds.warnings) log("warning: " + name + ": " + w);
      std::ostringstream train, test;
      write_instances(train, sym, ds.train);
      write_instances(test, sym, ds.test);
      write_file(dir / (slug + ".train.tsv"), stamp(hash) + train.str());
      write_file(dir / (slug + ".test.tsv"), stamp(hash) + test.str());
      entries.push_back({{"relation", name},
                         {"id", static_cast<std::uint32_t>(r)},
                         {"slug", slug},
                         {"seed", ds.seed},
                         {"train", ds.train.size()},
                         {"test", ds.test.size()},
                         {"train_shortfall", ds.train_shortfall},
                         {"test_shortfall", ds.test_shortfall},
                         {"warnings", ds.warnings}});
      log("dataset " + name + ": " + std::to_string(ds.train.size()) +
          " train / " + std::to_string(ds.test.size()) + " test instances");
      out.push_back(std::move(ds));
    }
    write_json(dir / "manifest.json", {{"format", "cpr-datasets/1"},
                                       {"config_hash", hash},
                                       {"seed", config_.seed},
                                       {"relations", entries}});
    return out;
  });
}

std::vector<RelationDataset> Pipeline::load_datasets() {
  const auto& sym = graph().symbols();
  const std::string hash = dataset_hash();
  const fs::path dir = config_.output / "datasets";
  const auto manifest = read_json(dir / "manifest.json");
  check_manifest(manifest, dir / "manifest.json", hash);
  std::vector<RelationDataset> out;
  for (const auto& e : manifest.at("relations")) {
    const auto name = e.at("relation").get<std::string>();
    const auto slug = e.at("slug").get<std::string>();
    RelationDataset ds;
    auto r = sym.find_relation(name);
    if (!r) throw DataError("dataset manifest names unknown relation " + name);
    ds.relation = *r;
    ds.seed = e.at("seed").get<std::uint64_t>();
    ds.train_shortfall = e.at("train_shortfall").get<std::size_t>();
    ds.test_shortfall = e.at("test_shortfall").get<std::size_t>();
    ds.warnings = e.at("warnings").get<std::vector<std::string>>();
    for (auto [split, target] :
         {std::pair{"train", &ds.train}, std::pair{"test", &ds.test}}) {
      const fs::path file = dir / (slug + "." + split + ".tsv");
      std::istringstream in(read_stamped(file, hash));
      *target = read_instances(in, sym, file.string());
      if (target->size() != e.at(split).get<std::size_t>()) {
        throw DataError(file.string() + ": instance count disagrees with manifest");
      }
    }
    out.push_back(std::move(ds));
  }
  return out;
}

namespace {

std::vector<PathSet> read_path_file(const fs::path& file,
                                    const std::string& hash,
                                    const SymbolTables& sym,
                                    std::span<const LabeledInstance> instances) {
  std::istringstream in(read_stamped(file, hash));
  std::vector<PathSet> out;
  std::string line;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto fields = split_fields(line);
    if (fields.size() != 4) {
      throw DataError(file.string(), line_no, "expected 4 tab-separated fields");
    }
    const std::size_t i = out.size();
    if (i >= instances.size() ||
        sym.find_entity(fields[0]) != instances[i].head ||
        sym.find_entity(fields[1]) != instances[i].tail ||
        fields[2] != (instances[i].positive ? "1" : "0")) {
      throw DataError(file.string(), line_no,
                      "instance does not match the dataset");
    }
    out.push_back(parse_path_set(sym, fields[3]));
  }
  if (out.size() != instances.size()) {
    throw DataError(file.string() + ": fewer path rows than instances");
  }
  return out;
}

}  // namespace

void Pipeline::extract_method(Method method) {
  const auto datasets = load_datasets();
  const EntityVectors* vec = method_uses_embeddings(method) ? &vectors() : nullptr;
  const auto& g = graph();
  const auto& sym = g.symbols();
  const std::string hash = extract_hash(method);
  const fs::path dir = config_.output / "paths" / std::string(method_name(method));
  const bool across = datasets.size() > 1;
  std::vector<RelationPaths> results(datasets.size());
  std::mutex log_mutex;

  parallel_for(datasets.size(), across ? config_.workers : 1, [&](std::size_t d) {
    const auto& ds = datasets[d];
    const std::string name = sym.relation_name(ds.relation);
    for_relation(name, [&] {
      const auto eval = evaluation_graph(g, ds.test_positive_triples());
      results[d] = extract_relation_paths(method, eval.graph, vec, ds,
                                          config_.extraction,
                                          across ? 1 : config_.workers);
      const std::string slug = relation_slug(sym, ds.relation);
      for (auto [split, instances, paths] :
           {std::tuple{"train", &ds.train, &results[d].train},
            std::tuple{"test", &ds.test, &results[d].test}}) {
        std::ostringstream os;
        for (std::size_t i = 0; i < instances->size(); ++i) {
          const auto& inst = (*instances)[i];
          os << sym.entity_name(inst.head) << '\t' << sym.entity_name(inst.tail)
             << '\t' << (inst.positive ? 1 : 0) << '\t'
             << render_path_set(sym, paths->paths[i]) << '\n';
        }
        write_file(dir / (slug + "." + split + ".paths"), stamp(hash) + os.str());
      }
      std::lock_guard lock(log_mutex);
      log("extract " + std::string(method_name(method)) + " " + name + ": " +
          stats_line(results[d].train.stats) + " (train), " +
          stats_line(results[d].test.stats) + " (test)");
    });
  });

  json entries = json::array();
  for (std::size_t d = 0; d < datasets.size(); ++d) {
    json e = {{"relation", sym.relation_name(datasets[d].relation)},
              {"slug", relation_slug(sym, datasets[d].relation)},
              {"train_stats", stats_json(results[d].train.stats)},
              {"test_stats", stats_json(results[d].test.stats)}};
    if (!config_.omit_timings) e["extract_seconds"] = results[d].seconds;
    entries.push_back(std::move(e));
  }
  write_json(dir / "manifest.json", {{"format", "cpr-paths/1"},
                                     {"config_hash", hash},
                                     {"dataset_hash", dataset_hash()},
                                     {"method", method_name(method)},
                                     {"relations", entries}});
}

void Pipeline::extract() {
  run_stage(*this, log_, "extract", [&] {
    config_.validate_embeddings();
    std::set<Method> done;
    for (const auto& spec : config_.methods) {
      if (done.insert(spec.method).second) extract_method(spec.method);
    }
  });
}

void Pipeline::train_method(const MethodSpec& spec) {
  const auto datasets = load_datasets();
  const auto& sym = graph().symbols();
  const std::string upstream = extract_hash(spec.method);
  const fs::path paths_dir =
      config_.output / "paths" / std::string(method_name(spec.method));
  check_manifest(read_json(paths_dir / "manifest.json"),
                 paths_dir / "manifest.json", upstream);
  const std::string hash = train_hash(spec);
  const fs::path dir = config_.output / "models" / spec.name();
  const bool across = datasets.size() > 1;
  std::vector<json> entries(datasets.size());

  parallel_for(datasets.size(), across ? config_.workers : 1, [&](std::size_t d) {
    const auto& ds = datasets[d];
    const std::string name = sym.relation_name(ds.relation);
    for_relation(name, [&] {
      const std::string slug = relation_slug(sym, ds.relation);
      RelationPaths paths;
      paths.train.paths = read_path_file(paths_dir / (slug + ".train.paths"),
                                         upstream, sym, ds.train);
      paths.test.paths = read_path_file(paths_dir / (slug + ".test.paths"),
                                        upstream, sym, ds.test);
      auto fitted = fit_relation(paths, ds, spec.bigrams, sym, config_.train,
                                 config_.min_frequency);
      std::ostringstream vocab, train_svm, test_svm;
      fitted.vocabulary.write(vocab, sym);
      fitted.train_matrix.write_libsvm(train_svm, fitted.train_labels);
      fitted.test_matrix.write_libsvm(test_svm, fitted.test_labels);
      write_file(dir / (slug + ".vocab.tsv"), stamp(hash) + vocab.str());
      write_file(dir / (slug + ".train.svm"), train_svm.str());
      write_file(dir / (slug + ".test.svm"), test_svm.str());
      auto model_json = model_to_json(fitted.model);
      model_json["config_hash"] = hash;
      model_json["relation"] = name;
      write_json(dir / (slug + ".model.json"), model_json);
      json e = {{"relation", name},
                {"slug", slug},
                {"features", fitted.vocabulary.size()},
                {"train_instances", ds.train.size()},
                {"test_instances", ds.test.size()},
                {"iterations", fitted.model.iterations},
                {"converged", fitted.model.converged},
                {"warnings", fitted.model.warnings}};
      if (!config_.omit_timings) e["train_seconds"] = fitted.train_seconds;
      entries[d] = std::move(e);
    });
  });
  log("train " + spec.name() + ": " + std::to_string(datasets.size()) +
      " relation model(s) written");
  write_json(dir / "manifest.json", {{"format", "cpr-models/1"},
                                     {"config_hash", hash},
                                     {"extract_hash", upstream},
                                     {"method", spec.name()},
                                     {"relations", entries}});
}

void Pipeline::train() {
  run_stage(*this, log_, "train", [&] {
    for (const auto& spec : config_.methods) train_method(spec);
  });
}

MethodReport Pipeline::evaluate_method(const MethodSpec& spec) {
  const auto& sym = graph().symbols();
  const std::string hash = train_hash(spec);
  const fs::path dir = config_.output / "models" / spec.name();
  const auto manifest = read_json(dir / "manifest.json");
  check_manifest(manifest, dir / "manifest.json", hash);

  std::map<std::string, double> extract_seconds;
  const fs::path paths_manifest =
      config_.output / "paths" / std::string(method_name(spec.method)) /
      "manifest.json";
  if (fs::exists(paths_manifest)) {
    for (const auto& e : read_json(paths_manifest).at("relations")) {
      if (e.contains("extract_seconds")) {
        extract_seconds[e.at("slug").get<std::string>()] =
            e.at("extract_seconds").get<double>();
      }
    }
  }

  std::vector<RelationResult> results;
  for (const auto& e : manifest.at("relations")) {
    const auto name = e.at("relation").get<std::string>();
    const auto slug = e.at("slug").get<std::string>();
    results.push_back(for_relation(name, [&] {
      std::istringstream vin(read_stamped(dir / (slug + ".vocab.tsv"), hash));
      const auto vocab = FeatureVocabulary::read(
          vin, sym, (dir / (slug + ".vocab.tsv")).string());
      const auto mj = read_json(dir / (slug + ".model.json"));
      check_manifest(mj, dir / (slug + ".model.json"), hash);
      const auto model = model_from_json(mj);
      std::ifstream sin(dir / (slug + ".test.svm"));
      if (!sin) throw ConfigError("missing artifact " + (dir / (slug + ".test.svm")).string());
      std::vector<int> labels;
      const auto x = FeatureMatrix::read_libsvm(
          sin, vocab.size(), labels, (dir / (slug + ".test.svm")).string());
      const auto scores = score_matrix(model, x, vocab.fingerprint(sym));
      auto r = score_relation(scores, labels);
      r.relation = *sym.find_relation(name);
      r.relation_name = name;
      r.features = vocab.size();
      r.train_instances = e.at("train_instances").get<std::size_t>();
      r.test_instances = labels.size();
      r.train_seconds = e.value("train_seconds", 0.0);
      if (auto it = extract_seconds.find(slug); it != extract_seconds.end()) {
        r.extract_seconds = it->second;
      }
      for (const auto& w : model.warnings) r.warnings.push_back(w);
      return r;
    }));
  }
  auto report = summarize_method(spec, std::move(results));
  const bool timings = !config_.omit_timings;
  const fs::path rdir = config_.output / "reports";
  write_file(rdir / (spec.name() + ".eval.txt"),
             stamp(hash) + render_relation_text(report, timings));
  const MethodReport single[] = {report};
  auto j = comparison_to_json(single, timings);
  j["config_hash"] = hash;
  write_json(rdir / (spec.name() + ".eval.json"), j);
  std::ostringstream os;
  os << std::fixed << std::setprecision(4) << "eval " << spec.name()
     << ": MAP=" << report.map << " F1(+)=" << report.mean_f1_positive
     << " F1(-)=" << report.mean_f1_negative
     << " features=" << std::setprecision(1) << report.mean_features;
  log(os.str());
  return report;
}

std::vector<MethodReport> Pipeline::evaluate() {
  return run_stage(*this, log_, "eval", [&] {
    std::vector<MethodReport> out;
    for (const auto& spec : config_.methods) out.push_back(evaluate_method(spec));
    return out;
  });
}

std::vector<MethodReport> Pipeline::compare() {
  return run_stage(*this, log_, "compare", [&] {
    config_.validate_embeddings();
    const fs::path ds_manifest = config_.output / "datasets" / "manifest.json";
    if (!up_to_date(ds_manifest, dataset_hash())) build_datasets();
    std::set<Method> extracted;
    json hashes = json::array();
    std::vector<MethodReport> reports;
    for (const auto& spec : config_.methods) {
      const fs::path pm = config_.output / "paths" /
                          std::string(method_name(spec.method)) / "manifest.json";
      if (extracted.insert(spec.method).second &&
          !up_to_date(pm, extract_hash(spec.method))) {
        extract_method(spec.method);
      }
      const fs::path mm = config_.output / "models" / spec.name() / "manifest.json";
      if (!up_to_date(mm, train_hash(spec))) train_method(spec);
      reports.push_back(evaluate_method(spec));
      hashes.push_back(train_hash(spec));
    }
    const std::string hash = hash_of(hashes);
    const bool timings = !config_.omit_timings;
    std::string text = stamp(hash) + render_comparison_text(reports, timings);
    for (const auto& r : reports) text += "\n" + render_relation_text(r, timings);
    write_file(config_.output / "reports" / "compare.txt", text);
    auto j = comparison_to_json(reports, timings);
    j["config_hash"] = hash;
    write_json(config_.output / "reports" / "compare.json", j);
    return reports;
  });
}

CorrelationReport Pipeline::analyze_correlation() {
  return run_stage(*this, log_, "analyze-correlation", [&] {
    const auto datasets = load_datasets();
    const auto& vec = vectors();
    std::vector<LabeledInstance> instances;
    for (const auto& ds : datasets) {
      instances.insert(instances.end(), ds.train.begin(), ds.train.end());
      instances.insert(instances.end(), ds.test.begin(), ds.test.end());
    }
    const auto report = similarity_label_analysis(instances, vec, config_.bins);
    std::error_code ec;
    const auto size = fs::file_size(config_.embeddings, ec);
    const std::string hash =
        hash_of({{"dataset", dataset_hash()},
                 {"embeddings", config_.embeddings.string()},
                 {"size", ec ? 0 : size},
                 {"bins", config_.bins}});
    write_file(config_.output / "reports" / "correlation.txt",
               stamp(hash) + render_correlation_text(report));
    auto fit_json = [](const std::optional<ExponentialFit>& f) {
      return f ? json{{"a", f->a}, {"b", f->b}, {"r_squared", f->r_squared},
                      {"points", f->points}}
               : json(nullptr);
    };
    write_json(config_.output / "reports" / "correlation.json",
               {{"config_hash", hash},
                {"edges", report.edges},
                {"positive_counts", report.positive_counts},
                {"negative_counts", report.negative_counts},
                {"positive_percent", report.positive_percent},
                {"negative_percent", report.negative_percent},
                {"positive_fit", fit_json(report.positive_fit)},
                {"negative_fit", fit_json(report.negative_fit)},
                {"pairs", report.pairs},
                {"missing_pairs", report.missing_pairs}});
    if (report.missing_pairs > 0) {
      log("warning: " + std::to_string(report.missing_pairs) +
          " instance(s) skipped for lack of a vector");
    }
    return report;
  });
}

std::string Pipeline::dump_features() {
  return run_stage(*this, log_, "dump-features", [&] {
    const auto& sym = graph().symbols();
    std::ostringstream all;
    for (const auto& spec : config_.methods) {
      const std::string hash = train_hash(spec);
      const fs::path dir = config_.output / "models" / spec.name();
      const auto manifest = read_json(dir / "manifest.json");
      check_manifest(manifest, dir / "manifest.json", hash);
      for (const auto& e : manifest.at("relations")) {
        const auto name = e.at("relation").get<std::string>();
        const auto slug = e.at("slug").get<std::string>();
        std::istringstream vin(read_stamped(dir / (slug + ".vocab.tsv"), hash));
        const auto vocab = FeatureVocabulary::read(
            vin, sym, (dir / (slug + ".vocab.tsv")).string());
        const auto model = model_from_json(read_json(dir / (slug + ".model.json")));
        const auto top = top_k_features(model, vocab, sym, config_.top_k);
        std::ostringstream os;
        os << "# " << spec.display_name() << " / " << name << '\n';
        for (std::size_t i = 0; i < top.size(); ++i) {
          char weight[32];
          std::snprintf(weight, sizeof weight, "%+.6f", top[i].weight);
          os << (i + 1) << '\t' << weight << '\t' << top[i].document_frequency
             << '\t' << top[i].text << '\n';
        }
        write_file(config_.output / "reports" / "features" / spec.name() /
                       (slug + ".top" + std::to_string(config_.top_k) + ".txt"),
                   stamp(hash) + os.str());
        all << os.str() << '\n';
      }
    }
    return all.str();
  });
}

}  // namespace cpr
