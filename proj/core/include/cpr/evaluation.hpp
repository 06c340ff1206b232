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
#include <vector>

#include "cpr/classifier.hpp"
#include "cpr/dataset.hpp"
#include "cpr/embedding.hpp"
#include "cpr/features.hpp"

namespace cpr {

// Mean over positives of precision at each positive's rank, after a stable
// descending sort by score (equal scores keep input order). nullopt when
// there are no positives.
std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const int> labels);

struct ConfusionCounts {
  std::size_t true_positive = 0;
  std::size_t false_positive = 0;
  std::size_t true_negative = 0;
  std::size_t false_negative = 0;
};

ConfusionCounts confusion(std::span<const int> decisions,
                          std::span<const int> labels);

struct F1Scores {
  double positive = 0.0;
  double negative = 0.0;
  std::vector<std::string> warnings;
};

// Per-class F1 = 2TP / (2TP + FP + FN). A class that is neither predicted
// nor present scores 0 and adds a warning.
F1Scores f1_scores(std::span<const int> decisions, std::span<const int> labels);

struct RankedFeature {
  std::uint32_t index = 0;
  double weight = 0.0;
  std::size_t document_frequency = 0;
  std::string text;
};

// Features by descending weight, ties by ascending index. k larger than
// the vocabulary returns everything.
std::vector<RankedFeature> top_k_features(const LRModel& model,
                                          const FeatureVocabulary& vocabulary,
                                          const SymbolTables& symbols,
                                          std::size_t k,
                                          PathStyle style = PathStyle::kDisplay);

struct ExponentialFit {
  double a = 0.0;  // y = a * exp(b * x)
  double b = 0.0;
  double r_squared = 0.0;  // of the linear fit to log(y)
  std::size_t points = 0;
};

// Least squares on (x, log y) over points with y > 0. nullopt with fewer
// than three such points.
std::optional<ExponentialFit> fit_exponential(std::span<const double> x,
                                              std::span<const double> y);

struct CorrelationReport {
  std::vector<double> edges;  // bins + 1 edges over the observed range
  std::vector<std::size_t> positive_counts;
  std::vector<std::size_t> negative_counts;
  // Normalized within each class; each sums to 100 when the class is
  // non-empty.
  std::vector<double> positive_percent;
  std::vector<double> negative_percent;
  std::optional<ExponentialFit> positive_fit;
  std::optional<ExponentialFit> negative_fit;
  std::size_t pairs = 0;
  std::size_t missing_pairs = 0;  // an endpoint had no vector
};

// Histogram of sim(h, t) per label over equal-width bins, with an
// exponential fit of per-bin percentage against bin centre.
CorrelationReport similarity_label_analysis(
    std::span<const LabeledInstance> instances, const EntityVectors& vectors,
    std::size_t bins = 10);

std::string render_correlation_text(const CorrelationReport& report);

}  // namespace cpr
