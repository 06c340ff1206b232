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
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "cpr/graph.hpp"
#include "cpr/path.hpp"

namespace cpr {

// A path feature, or a bigram of consecutive relations taken from inside a
// path. Bigrams live in their own namespace so that a genuine two-edge path
// and a mid-path bigram stay distinct features.
struct Feature {
  enum class Kind : std::uint8_t { kPath = 0, kBigram = 1 };

  Kind kind = Kind::kPath;
  RelationPath path;

  static Feature of_path(RelationPath p) { return {Kind::kPath, std::move(p)}; }
  static Feature bigram(SignedRelation a, SignedRelation b) {
    return {Kind::kBigram, RelationPath{{a, b}}};
  }

  friend auto operator<=>(const Feature&, const Feature&) = default;
  friend bool operator==(const Feature&, const Feature&) = default;
};

using FeatureSet = std::set<Feature>;

FeatureSet path_features(const PathSet& paths);
// paths plus every ordered consecutive relation pair of each path.
FeatureSet bigram_augment(const PathSet& paths);

// "bigram:" prefix for bigrams, otherwise the ascii path form.
std::string render_feature(const SymbolTables& symbols, const Feature& feature,
                           PathStyle style = PathStyle::kAscii);
Feature parse_feature(const SymbolTables& symbols, std::string_view text);

// Feature <-> dense column index, with training document frequencies.
// Index order: frequency descending, then Feature order.
class FeatureVocabulary {
 public:
  static FeatureVocabulary build(std::span<const FeatureSet> training,
                                 std::size_t min_frequency = 1);

  std::size_t size() const { return features_.size(); }
  bool empty() const { return features_.empty(); }
  const Feature& feature(std::size_t index) const { return features_.at(index); }
  std::size_t document_frequency(std::size_t index) const {
    return frequencies_.at(index);
  }
  std::optional<std::uint32_t> index_of(const Feature& feature) const;

  // Stable content hash, stamped into models to refuse mismatched matrices.
  std::uint64_t fingerprint(const SymbolTables& symbols) const;

  // `index<TAB>feature<TAB>df` per line.
  void write(std::ostream& out, const SymbolTables& symbols) const;
  static FeatureVocabulary read(std::istream& in, const SymbolTables& symbols,
                                std::string_view source_name);

  friend bool operator==(const FeatureVocabulary& a,
                         const FeatureVocabulary& b) {
    return a.features_ == b.features_ && a.frequencies_ == b.frequencies_;
  }

 private:
  std::vector<Feature> features_;
  std::vector<std::size_t> frequencies_;
  std::map<Feature, std::uint32_t> index_;
};

// Sorted column indices of the features present; everything else is 0.
using SparseRow = std::vector<std::uint32_t>;

SparseRow binarize(const FeatureSet& features,
                   const FeatureVocabulary& vocabulary);

// Binary instance x feature matrix. Stored values are implicitly 1.
class FeatureMatrix {
 public:
  explicit FeatureMatrix(std::size_t columns = 0) : columns_(columns) {}

  // Throws std::out_of_range if an index is >= cols().
  void add_row(SparseRow row, std::size_t instance);

  std::size_t rows() const { return rows_.size(); }
  std::size_t cols() const { return columns_; }
  const SparseRow& row(std::size_t i) const { return rows_.at(i); }
  std::size_t instance(std::size_t i) const { return instances_.at(i); }
  std::size_t nonzeros() const;

  // libSVM lines `label idx:1 idx:1 ...` with 1-based column indices.
  void write_libsvm(std::ostream& out, std::span<const int> labels) const;
  static FeatureMatrix read_libsvm(std::istream& in, std::size_t columns,
                                   std::vector<int>& labels,
                                   std::string_view source_name);

 private:
  std::size_t columns_;
  std::vector<SparseRow> rows_;
  std::vector<std::size_t> instances_;
};

FeatureMatrix build_matrix(std::span<const FeatureSet> instances,
                           const FeatureVocabulary& vocabulary);

}  // namespace cpr
