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
#include "cpr/embedding.hpp"

#include <algorithm>
#include <bit>
#include <cctype>
#include <cmath>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <stdexcept>

#include "cpr/error.hpp"

namespace cpr {

std::string TokenNormalizer::operator()(std::string_view token) const {
  std::string out(token);
  if (lowercase) {
    std::transform(out.begin(), out.end(), out.begin(), [](unsigned char c) {
      return static_cast<char>(std::tolower(c));
    });
  }
  if (spaces_to_underscores) std::replace(out.begin(), out.end(), ' ', '_');
  if (underscores_to_spaces) std::replace(out.begin(), out.end(), '_', ' ');
  return out;
}

EmbeddingStore::EmbeddingStore(std::size_t dimension) : dimension_(dimension) {
  if (dimension == 0) throw std::invalid_argument("dimension must be positive");
}

void EmbeddingStore::add(std::string_view word, std::span<const float> vector) {
  if (vector.size() != dimension_) {
    throw DataError("vector for '" + std::string(word) + "' has " +
                    std::to_string(vector.size()) + " components, expected " +
                    std::to_string(dimension_));
  }
  if (index_.contains(word)) return;
  index_.emplace(std::string(word), words_.size());
  words_.emplace_back(word);
  data_.insert(data_.end(), vector.begin(), vector.end());
}

std::optional<std::span<const float>> EmbeddingStore::find(
    std::string_view word) const {
  auto it = index_.find(word);
  if (it == index_.end()) return std::nullopt;
  return std::span<const float>(data_.data() + it->second * dimension_,
                                dimension_);
}

namespace {

struct Header {
  std::size_t vocab = 0;
  std::size_t dimension = 0;
};

Header read_header(std::istream& in, const std::string& source) {
  std::string line;
  if (!std::getline(in, line)) throw DataError(source + ": empty vector file");
  std::istringstream is(line);
  Header h;
  if (!(is >> h.vocab >> h.dimension) || h.dimension == 0) {
    throw DataError(source, 1, "expected header '<vocab> <dim>'");
  }
  return h;
}

bool keep_token(const VectorLoadOptions& options, const std::string& token) {
  return options.keep == nullptr || options.keep->contains(token);
}

void read_text_entries(std::istream& in, const std::string& source,
                       const Header& header, const VectorLoadOptions& options,
                       EmbeddingStore& store) {
  std::string line;
  std::vector<float> values;
  std::size_t line_no = 1;
  std::size_t entries = 0;
  while (entries < header.vocab && std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::istringstream is(line);
    std::string word;
    is >> word;
    values.clear();
    float v;
    while (is >> v) values.push_back(v);
    if (!is.eof()) {
      throw DataError(source, line_no, "non-numeric component for '" + word +
                                           "'");
    }
    if (values.size() != header.dimension) {
      throw DataError(source, line_no,
                      "token '" + word + "' has " +
                          std::to_string(values.size()) +
                          " components, expected " +
                          std::to_string(header.dimension));
    }
    ++entries;
    std::string token = options.normalizer(word);
    if (keep_token(options, token)) store.add(token, values);
  }
  if (entries != header.vocab) {
    throw DataError(source + ": header declares " +
                    std::to_string(header.vocab) + " entries, found " +
                    std::to_string(entries));
  }
}

float load_le_float(const unsigned char* p) {
  std::uint32_t bits = static_cast<std::uint32_t>(p[0]) |
                       (static_cast<std::uint32_t>(p[1]) << 8) |
                       (static_cast<std::uint32_t>(p[2]) << 16) |
                       (static_cast<std::uint32_t>(p[3]) << 24);
  return std::bit_cast<float>(bits);
}

void read_binary_entries(std::istream& in, const std::string& source,
                         const Header& header,
                         const VectorLoadOptions& options,
                         EmbeddingStore& store) {
  std::vector<unsigned char> payload(header.dimension * 4);
  std::vector<float> values(header.dimension);
  for (std::size_t entry = 0; entry < header.vocab; ++entry) {
    std::string word;
    int c;
    // Entries are separated by optional newlines in files written by the
    // reference tool.
    while ((c = in.get()) != EOF && (c == '\n' || c == '\r')) {}
    while (c != EOF && c != ' ') {
      word.push_back(static_cast<char>(c));
      c = in.get();
    }
    if (c == EOF) {
      throw DataError(source + ": truncated binary payload at entry " +
                      std::to_string(entry + 1) + " ('" + word + "')");
    }
    in.read(reinterpret_cast<char*>(payload.data()),
            static_cast<std::streamsize>(payload.size()));
    if (static_cast<std::size_t>(in.gcount()) != payload.size()) {
      throw DataError(source + ": truncated binary payload for token '" +
                      word + "'");
    }
    for (std::size_t i = 0; i < header.dimension; ++i) {
      values[i] = load_le_float(payload.data() + 4 * i);
    }
    std::string token = options.normalizer(word);
    if (keep_token(options, token)) store.add(token, values);
  }
}

}  // namespace

EmbeddingStore read_vectors(std::istream& in, std::string_view source_name,
                            const VectorLoadOptions& options) {
  const std::string source(source_name);
  const Header header = read_header(in, source);
  EmbeddingStore store(header.dimension);
  store.declared_size = header.vocab;
  if (options.format == VectorFormat::kText) {
    read_text_entries(in, source, header, options, store);
  } else {
    read_binary_entries(in, source, header, options, store);
  }
  return store;
}

EmbeddingStore load_vectors(const std::filesystem::path& path,
                            const VectorLoadOptions& options) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open vector file " + path.string());
  return read_vectors(in, path.string(), options);
}

void write_vectors(std::ostream& out, const EmbeddingStore& store,
                   VectorFormat format) {
  out << store.size() << ' ' << store.dimension() << '\n';
  for (const auto& word : store.words()) {
    const auto vec = *store.find(word);
    out << word;
    if (format == VectorFormat::kText) {
      for (float v : vec) out << ' ' << v;
    } else {
      out << ' ';
      for (float v : vec) {
        const auto bits = std::bit_cast<std::uint32_t>(v);
        const char bytes[4] = {static_cast<char>(bits & 0xff),
                               static_cast<char>((bits >> 8) & 0xff),
                               static_cast<char>((bits >> 16) & 0xff),
                               static_cast<char>((bits >> 24) & 0xff)};
        out.write(bytes, 4);
      }
    }
    out << '\n';
  }
}

double cosine(std::span<const float> a, std::span<const float> b) {
  if (a.size() != b.size()) {
    throw std::invalid_argument("cosine: dimension mismatch (" +
                                std::to_string(a.size()) + " vs " +
                                std::to_string(b.size()) + ")");
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += static_cast<double>(a[i]) * b[i];
    na += static_cast<double>(a[i]) * a[i];
    nb += static_cast<double>(b[i]) * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return std::clamp(dot / (std::sqrt(na) * std::sqrt(nb)), -1.0, 1.0);
}

void RelevanceParams::validate() const {
  if (!(theta >= 0.0 && theta <= 1.0)) {
    throw std::invalid_argument("theta must lie in [0, 1]");
  }
}

EntityVectors::EntityVectors(std::size_t entity_count, std::size_t dimension)
    : dimension_(dimension), rows_(entity_count, -1) {}

EntityVectors EntityVectors::bind(const SymbolTables& symbols,
                                  const EmbeddingStore& store,
                                  const TokenNormalizer& normalizer) {
  EntityVectors out(symbols.entities.size(), store.dimension());
  const auto names = symbols.entities.names();
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (auto vec = store.find(normalizer(names[i]))) {
      out.assign(EntityId{static_cast<std::uint32_t>(i)}, *vec);
    }
  }
  return out;
}

void EntityVectors::assign(EntityId entity, std::span<const float> vector) {
  if (vector.size() != dimension_) {
    throw std::invalid_argument("EntityVectors::assign: dimension mismatch");
  }
  auto& row = rows_.at(to_index(entity));
  if (row < 0) {
    row = static_cast<std::int64_t>(data_.size() / dimension_);
    data_.insert(data_.end(), vector.begin(), vector.end());
    ++covered_;
  } else {
    std::copy(vector.begin(), vector.end(),
              data_.begin() + row * static_cast<std::int64_t>(dimension_));
  }
}

std::optional<std::span<const float>> EntityVectors::vector(
    EntityId entity) const {
  if (!has(entity)) return std::nullopt;
  return std::span<const float>(
      data_.data() + rows_[to_index(entity)] * dimension_, dimension_);
}

std::optional<double> EntityVectors::similarity(EntityId a, EntityId b) const {
  auto va = vector(a);
  auto vb = vector(b);
  if (!va || !vb) return std::nullopt;
  return cosine(*va, *vb);
}

std::optional<double> EntityVectors::relevance(
    EntityId v, EntityId h, EntityId t, const RelevanceParams& params) const {
  auto svh = similarity(v, h);
  auto svt = similarity(v, t);
  if (!svh || !svt) return std::nullopt;
  return combine_relevance(*svh, *svt, params.theta);
}

}  // namespace cpr
