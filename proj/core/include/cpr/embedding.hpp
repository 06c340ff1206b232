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
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "cpr/graph.hpp"

namespace cpr {

enum class VectorFormat { kText, kBinary };

// Maps entity surface strings onto embedding vocabulary tokens. Multi-word
// entity names are spelled inconsistently across resources, so the mapping
// is configurable rather than fixed.
struct TokenNormalizer {
  bool lowercase = false;
  bool spaces_to_underscores = false;
  bool underscores_to_spaces = false;

  std::string operator()(std::string_view token) const;
};

struct VectorLoadOptions {
  VectorFormat format = VectorFormat::kText;
  TokenNormalizer normalizer;
  // When set, only tokens (after normalization) in this set are kept.
  const std::unordered_set<std::string>* keep = nullptr;
};

// Surface string -> dense float vector of a fixed dimension.
class EmbeddingStore {
 public:
  explicit EmbeddingStore(std::size_t dimension);

  // Throws DataError when the vector length differs from dimension().
  // A repeated word keeps its first vector.
  void add(std::string_view word, std::span<const float> vector);

  std::optional<std::span<const float>> find(std::string_view word) const;

  std::size_t dimension() const { return dimension_; }
  std::size_t size() const { return words_.size(); }
  std::span<const std::string> words() const { return words_; }

  // Vocabulary size announced by the file header (before filtering).
  std::size_t declared_size = 0;

 private:
  struct StringHash {
    using is_transparent = void;
    std::size_t operator()(std::string_view s) const noexcept {
      return std::hash<std::string_view>{}(s);
    }
  };
  std::size_t dimension_;
  std::vector<std::string> words_;
  std::vector<float> data_;
  std::unordered_map<std::string, std::size_t, StringHash, std::equal_to<>>
      index_;
};

// word2vec text (`<vocab> <dim>` header, then `word v1 .. vd` lines) or
// binary (same header, then `word` + ' ' + d little-endian float32 per
// entry) formats. Throws DataError on a dimension mismatch (naming the
// offending token) or a truncated payload.
EmbeddingStore load_vectors(const std::filesystem::path& path,
                            const VectorLoadOptions& options = {});
EmbeddingStore read_vectors(std::istream& in, std::string_view source_name,
                            const VectorLoadOptions& options = {});

void write_vectors(std::ostream& out, const EmbeddingStore& store,
                   VectorFormat format);

// Cosine similarity in [-1, 1]. Zero-norm inputs give 0. Throws
// std::invalid_argument on a dimension mismatch.
double cosine(std::span<const float> a, std::span<const float> b);

struct RelevanceParams {
  double theta = 0.5;  // weight of sim(v, h); 1 - theta goes to sim(v, t)

  void validate() const;
};

// theta * sim_vh + (1 - theta) * sim_vt.
constexpr double combine_relevance(double sim_vh, double sim_vt,
                                   double theta) {
  return theta * sim_vh + (1.0 - theta) * sim_vt;
}

// Entity-id indexed copy of the vectors that cover graph entities. Lookup
// failures are reported as std::nullopt ("no embedding"), never thrown.
class EntityVectors {
 public:
  EntityVectors() = default;
  EntityVectors(std::size_t entity_count, std::size_t dimension);

  static EntityVectors bind(const SymbolTables& symbols,
                            const EmbeddingStore& store,
                            const TokenNormalizer& normalizer = {});

  void assign(EntityId entity, std::span<const float> vector);

  bool has(EntityId entity) const {
    return to_index(entity) < rows_.size() && rows_[to_index(entity)] >= 0;
  }
  std::optional<std::span<const float>> vector(EntityId entity) const;

  // cosine(W_a, W_b), or nullopt if either entity lacks a vector.
  std::optional<double> similarity(EntityId a, EntityId b) const;

  // Contextual relevance of v to the pair (h, t).
  std::optional<double> relevance(EntityId v, EntityId h, EntityId t,
                                  const RelevanceParams& params = {}) const;

  std::size_t dimension() const { return dimension_; }
  std::size_t entity_count() const { return rows_.size(); }
  std::size_t covered() const { return covered_; }
  double coverage() const {
    return rows_.empty() ? 0.0
                         : static_cast<double>(covered_) / rows_.size();
  }

 private:
  std::size_t dimension_ = 0;
  std::size_t covered_ = 0;
  std::vector<std::int64_t> rows_;
  std::vector<float> data_;
};

}  // namespace cpr
