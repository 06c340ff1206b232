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
#include "cpr/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <stdexcept>

namespace cpr {

std::optional<double> average_precision(std::span<const double> scores,
                                        std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw std::invalid_argument("scores and labels differ in length");
  }
  std::vector<std::size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] > scores[b];
  });
  double sum = 0.0;
  std::size_t hits = 0;
  for (std::size_t rank = 0; rank < order.size(); ++rank) {
    if (labels[order[rank]] == 1) {
      ++hits;
      sum += static_cast<double>(hits) / static_cast<double>(rank + 1);
    }
  }
  if (hits == 0) return std::nullopt;
  return sum / static_cast<double>(hits);
}

ConfusionCounts confusion(std::span<const int> decisions,
                          std::span<const int> labels) {
  if (decisions.size() != labels.size()) {
    throw std::invalid_argument("decisions and labels differ in length");
  }
  ConfusionCounts c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool pred = decisions[i] == 1;
    const bool actual = labels[i] == 1;
    if (pred && actual) ++c.true_positive;
    else if (pred) ++c.false_positive;
    else if (actual) ++c.false_negative;
    else ++c.true_negative;
  }
  return c;
}

F1Scores f1_scores(std::span<const int> decisions, std::span<const int> labels) {
  const auto c = confusion(decisions, labels);
  F1Scores out;
  auto f1 = [&](std::size_t tp, std::size_t fp, std::size_t fn,
                const char* cls) {
    const std::size_t denom = 2 * tp + fp + fn;
    if (denom == 0) {
      out.warnings.push_back(std::string("F1 of the ") + cls +
                             " class is undefined (no members predicted or "
                             "present); reported as 0");
      return 0.0;
    }
    return 2.0 * static_cast<double>(tp) / static_cast<double>(denom);
  };
  out.positive = f1(c.true_positive, c.false_positive, c.false_negative,
                    "positive");
  out.negative = f1(c.true_negative, c.false_negative, c.false_positive,
                    "negative");
  return out;
}

std::vector<RankedFeature> top_k_features(const LRModel& model,
                                          const FeatureVocabulary& vocabulary,
                                          const SymbolTables& symbols,
                                          std::size_t k, PathStyle style) {
  if (model.weights.size() != vocabulary.size()) {
    throw std::invalid_argument("model and vocabulary sizes differ");
  }
  std::vector<std::uint32_t> order(vocabulary.size());
  std::iota(order.begin(), order.end(), 0U);
  std::stable_sort(order.begin(), order.end(),
                   [&](std::uint32_t a, std::uint32_t b) {
                     return model.weights[a] > model.weights[b];
                   });
  order.resize(std::min(k, order.size()));
  std::vector<RankedFeature> out;
  out.reserve(order.size());
  for (auto idx : order) {
    out.push_back({idx, model.weights[idx], vocabulary.document_frequency(idx),
                   render_feature(symbols, vocabulary.feature(idx), style)});
  }
  return out;
}

std::optional<ExponentialFit> fit_exponential(std::span<const double> x,
                                              std::span<const double> y) {
  if (x.size() != y.size()) throw std::invalid_argument("x/y length mismatch");
  std::vector<double> xs, ly;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (y[i] > 0.0) {
      xs.push_back(x[i]);
      ly.push_back(std::log(y[i]));
    }
  }
  const std::size_t n = xs.size();
  if (n < 3) return std::nullopt;
  const double mx = std::accumulate(xs.begin(), xs.end(), 0.0) / n;
  const double my = std::accumulate(ly.begin(), ly.end(), 0.0) / n;
  double sxx = 0.0, sxy = 0.0, syy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    sxx += (xs[i] - mx) * (xs[i] - mx);
    sxy += (xs[i] - mx) * (ly[i] - my);
    syy += (ly[i] - my) * (ly[i] - my);
  }
  if (sxx == 0.0) return std::nullopt;
  ExponentialFit fit;
  fit.b = sxy / sxx;
  const double intercept = my - fit.b * mx;
  fit.a = std::exp(intercept);
  double ss_res = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = ly[i] - (intercept + fit.b * xs[i]);
    ss_res += r * r;
  }
  fit.r_squared = syy > 0.0 ? 1.0 - ss_res / syy : 1.0;
  fit.points = n;
  return fit;
}

CorrelationReport similarity_label_analysis(
    std::span<const LabeledInstance> instances, const EntityVectors& vectors,
    std::size_t bins) {
  if (bins == 0) throw std::invalid_argument("bins must be positive");
  CorrelationReport report;
  std::vector<std::pair<double, bool>> points;
  for (const auto& inst : instances) {
    if (auto s = vectors.similarity(inst.head, inst.tail)) {
      points.emplace_back(*s, inst.positive);
    } else {
      ++report.missing_pairs;
    }
  }
  report.pairs = points.size();
  report.positive_counts.assign(bins, 0);
  report.negative_counts.assign(bins, 0);
  report.positive_percent.assign(bins, 0.0);
  report.negative_percent.assign(bins, 0.0);
  if (points.empty()) return report;

  const auto [lo_it, hi_it] = std::minmax_element(
      points.begin(), points.end(),
      [](const auto& a, const auto& b) { return a.first < b.first; });
  const double lo = lo_it->first;
  const double hi = hi_it->first;
  const double width = (hi - lo) / static_cast<double>(bins);
  for (std::size_t i = 0; i <= bins; ++i) report.edges.push_back(lo + width * i);
  report.edges.back() = hi;

  std::size_t n_pos = 0, n_neg = 0;
  for (const auto& [s, positive] : points) {
    std::size_t b = width > 0.0 ? static_cast<std::size_t>((s - lo) / width) : 0;
    b = std::min(b, bins - 1);
    if (positive) {
      ++report.positive_counts[b];
      ++n_pos;
    } else {
      ++report.negative_counts[b];
      ++n_neg;
    }
  }
  std::vector<double> centres(bins);
  for (std::size_t b = 0; b < bins; ++b) {
    centres[b] = 0.5 * (report.edges[b] + report.edges[b + 1]);
    if (n_pos > 0) report.positive_percent[b] = 100.0 * report.positive_counts[b] / n_pos;
    if (n_neg > 0) report.negative_percent[b] = 100.0 * report.negative_counts[b] / n_neg;
  }
  report.positive_fit = fit_exponential(centres, report.positive_percent);
  report.negative_fit = fit_exponential(centres, report.negative_percent);
  return report;
}

std::string render_correlation_text(const CorrelationReport& report) {
  std::ostringstream os;
  os << std::fixed << std::setprecision(4);
  os << "pairs=" << report.pairs << " missing=" << report.missing_pairs << '\n';
  os << std::left << std::setw(22) << "bin" << std::right << std::setw(10)
     << "%pos" << std::setw(10) << "%neg" << std::setw(8) << "n+"
     << std::setw(8) << "n-" << '\n';
  for (std::size_t b = 0; b + 1 < report.edges.size(); ++b) {
    std::ostringstream label;
    label << std::fixed << std::setprecision(4) << '[' << report.edges[b]
          << ", " << report.edges[b + 1] << ')';
    os << std::left << std::setw(22) << label.str() << std::right
       << std::setw(10) << report.positive_percent[b] << std::setw(10)
       << report.negative_percent[b] << std::setw(8)
       << report.positive_counts[b] << std::setw(8)
       << report.negative_counts[b] << '\n';
  }
  auto fit_line = [&](const char* name, const std::optional<ExponentialFit>& f) {
    os << name << ": ";
    if (!f) {
      os << "skipped (fewer than 3 non-empty bins)\n";
      return;
    }
    os << "y = " << f->a << " * exp(" << f->b << " x), R^2 = " << f->r_squared
       << " over " << f->points << " bins\n";
  };
  fit_line("positive fit", report.positive_fit);
  fit_line("negative fit", report.negative_fit);
  return os.str();
}

}  // namespace cpr
