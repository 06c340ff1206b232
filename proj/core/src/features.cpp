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
#include "cpr/features.hpp"

#include <algorithm>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cpr/error.hpp"
#include "cpr/random.hpp"

namespace cpr {

namespace {
constexpr std::string_view kBigramPrefix = "bigram:";
}

FeatureSet path_features(const PathSet& paths) {
  FeatureSet out;
  for (const auto& p : paths) out.insert(Feature::of_path(p));
  return out;
}

FeatureSet bigram_augment(const PathSet& paths) {
  FeatureSet out = path_features(paths);
  for (const auto& p : paths) {
    for (std::size_t i = 0; i + 1 < p.steps.size(); ++i) {
      out.insert(Feature::bigram(p.steps[i], p.steps[i + 1]));
    }
  }
  return out;
}

std::string render_feature(const SymbolTables& symbols, const Feature& feature,
                           PathStyle style) {
  std::string body = render_path(symbols, feature.path, style);
  if (feature.kind == Feature::Kind::kBigram) {
    return std::string(kBigramPrefix) + body;
  }
  return body;
}

Feature parse_feature(const SymbolTables& symbols, std::string_view text) {
  if (text.starts_with(kBigramPrefix)) {
    auto path = parse_path(symbols, text.substr(kBigramPrefix.size()));
    if (path.steps.size() != 2) throw DataError("bigram must have 2 relations");
    return {Feature::Kind::kBigram, std::move(path)};
  }
  return Feature::of_path(parse_path(symbols, text));
}

FeatureVocabulary FeatureVocabulary::build(std::span<const FeatureSet> training,
                                           std::size_t min_frequency) {
  std::map<Feature, std::size_t> df;
  for (const auto& set : training) {
    for (const auto& f : set) ++df[f];
  }
  std::vector<std::pair<Feature, std::size_t>> kept;
  for (auto& [f, n] : df) {
    if (n >= min_frequency) kept.emplace_back(f, n);
  }
  std::stable_sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second > b.second;
  });
  FeatureVocabulary vocab;
  for (auto& [f, n] : kept) {
    vocab.index_.emplace(f, static_cast<std::uint32_t>(vocab.features_.size()));
    vocab.features_.push_back(f);
    vocab.frequencies_.push_back(n);
  }
  return vocab;
}

std::optional<std::uint32_t> FeatureVocabulary::index_of(
    const Feature& feature) const {
  if (auto it = index_.find(feature); it != index_.end()) return it->second;
  return std::nullopt;
}

std::uint64_t FeatureVocabulary::fingerprint(const SymbolTables& symbols) const {
  Fingerprint fp;
  fp.add(static_cast<std::uint64_t>(features_.size()));
  for (const auto& f : features_) fp.add(render_feature(symbols, f)).add("\n");
  return fp.value();
}

void FeatureVocabulary::write(std::ostream& out,
                              const SymbolTables& symbols) const {
  for (std::size_t i = 0; i < features_.size(); ++i) {
    out << i << '\t' << render_feature(symbols, features_[i]) << '\t'
        << frequencies_[i] << '\n';
  }
}

FeatureVocabulary FeatureVocabulary::read(std::istream& in,
                                          const SymbolTables& symbols,
                                          std::string_view source_name) {
  const std::string source(source_name);
  FeatureVocabulary vocab;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    const auto a = line.find('\t');
    const auto b = a == std::string::npos ? a : line.find('\t', a + 1);
    if (b == std::string::npos) {
      throw DataError(source, line_no, "expected index<TAB>feature<TAB>df");
    }
    std::size_t index = 0, df = 0;
    try {
      index = std::stoul(line.substr(0, a));
      df = std::stoul(line.substr(b + 1));
    } catch (const std::exception&) {
      throw DataError(source, line_no, "bad index or frequency");
    }
    if (index != vocab.features_.size()) {
      throw DataError(source, line_no, "feature indices must be contiguous");
    }
    Feature f = parse_feature(symbols, std::string_view(line).substr(a + 1, b - a - 1));
    vocab.index_.emplace(f, static_cast<std::uint32_t>(index));
    vocab.features_.push_back(std::move(f));
    vocab.frequencies_.push_back(df);
  }
  return vocab;
}

SparseRow binarize(const FeatureSet& features,
                   const FeatureVocabulary& vocabulary) {
  SparseRow row;
  for (const auto& f : features) {
    if (auto idx = vocabulary.index_of(f)) row.push_back(*idx);
  }
  std::sort(row.begin(), row.end());
  return row;
}

void FeatureMatrix::add_row(SparseRow row, std::size_t instance) {
  std::sort(row.begin(), row.end());
  row.erase(std::unique(row.begin(), row.end()), row.end());
  if (!row.empty() && row.back() >= columns_) {
    throw std::out_of_range("feature index " + std::to_string(row.back()) +
                            " outside matrix with " + std::to_string(columns_) +
                            " columns");
  }
  rows_.push_back(std::move(row));
  instances_.push_back(instance);
}

std::size_t FeatureMatrix::nonzeros() const {
  std::size_t n = 0;
  for (const auto& r : rows_) n += r.size();
  return n;
}

void FeatureMatrix::write_libsvm(std::ostream& out,
                                 std::span<const int> labels) const {
  if (labels.size() != rows_.size()) {
    throw std::invalid_argument("label count does not match matrix rows");
  }
  for (std::size_t i = 0; i < rows_.size(); ++i) {
    out << labels[i];
    for (auto idx : rows_[i]) out << ' ' << (idx + 1) << ":1";
    out << '\n';
  }
}

FeatureMatrix FeatureMatrix::read_libsvm(std::istream& in, std::size_t columns,
                                         std::vector<int>& labels,
                                         std::string_view source_name) {
  const std::string source(source_name);
  FeatureMatrix m(columns);
  labels.clear();
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line.front() == '#') continue;
    std::istringstream is(line);
    int label;
    if (!(is >> label)) throw DataError(source, line_no, "missing label");
    SparseRow row;
    std::string item;
    while (is >> item) {
      const auto colon = item.find(':');
      if (colon == std::string::npos || item.substr(colon + 1) != "1") {
        throw DataError(source, line_no, "expected idx:1, got '" + item + "'");
      }
      const auto idx = std::stoul(item.substr(0, colon));
      if (idx == 0 || idx > columns) {
        throw DataError(source, line_no, "column index out of range");
      }
      row.push_back(static_cast<std::uint32_t>(idx - 1));
    }
    labels.push_back(label);
    m.add_row(std::move(row), m.rows());
  }
  return m;
}

FeatureMatrix build_matrix(std::span<const FeatureSet> instances,
                           const FeatureVocabulary& vocabulary) {
  FeatureMatrix m(vocabulary.size());
  for (std::size_t i = 0; i < instances.size(); ++i) {
    m.add_row(binarize(instances[i], vocabulary), i);
  }
  return m;
}

}  // namespace cpr
