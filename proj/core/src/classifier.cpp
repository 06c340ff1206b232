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
#include "cpr/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

#include <nlohmann/json.hpp>

#include "cpr/error.hpp"

namespace cpr {

namespace {

double log1p_exp(double z) {
  return z > 0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z));
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

double dot(std::span<const double> a, std::span<const double> b) {
  return std::inner_product(a.begin(), a.end(), b.begin(), 0.0);
}

double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

}  // namespace

void TrainConfig::validate() const {
  if (!(lambda > 0.0) || !std::isfinite(lambda)) {
    throw std::invalid_argument("lambda must be positive and finite");
  }
  if (!(tol > 0.0)) throw std::invalid_argument("tol must be positive");
  if (max_iter < 1) throw std::invalid_argument("max_iter must be >= 1");
}

LogisticObjective::LogisticObjective(const FeatureMatrix& x,
                                     std::span<const int> labels,
                                     const TrainConfig& config)
    : x_(&x), labels_(labels.begin(), labels.end()), lambda_(config.lambda) {
  if (labels.size() != x.rows()) {
    throw std::invalid_argument("label count does not match matrix rows");
  }
  std::size_t positives = 0;
  for (int y : labels_) {
    if (y != 0 && y != 1) throw std::invalid_argument("labels must be 0 or 1");
    positives += static_cast<std::size_t>(y);
  }
  const std::size_t n = labels_.size();
  const std::size_t negatives = n - positives;
  sample_weights_.assign(n, 1.0);
  if (config.class_weight == ClassWeighting::kBalanced && positives > 0 &&
      negatives > 0) {
    const double wp = static_cast<double>(n) / (2.0 * positives);
    const double wn = static_cast<double>(n) / (2.0 * negatives);
    for (std::size_t i = 0; i < n; ++i) {
      sample_weights_[i] = labels_[i] == 1 ? wp : wn;
    }
  }
}

double LogisticObjective::margin(std::span<const double> params,
                                 std::size_t row) const {
  double z = params.back();
  for (auto idx : x_->row(row)) z += params[idx];
  return z;
}

double LogisticObjective::value(std::span<const double> params) const {
  double f = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double z = margin(params, i);
    f += sample_weights_[i] * (log1p_exp(z) - labels_[i] * z);
  }
  const auto w = params.first(params.size() - 1);
  return f + 0.5 * lambda_ * dot(w, w);
}

double LogisticObjective::value_and_gradient(std::span<const double> params,
                                             std::span<double> gradient) const {
  const std::size_t d = x_->cols();
  std::fill(gradient.begin(), gradient.end(), 0.0);
  double f = 0.0;
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double z = margin(params, i);
    f += sample_weights_[i] * (log1p_exp(z) - labels_[i] * z);
    const double r = sample_weights_[i] * (sigmoid(z) - labels_[i]);
    for (auto idx : x_->row(i)) gradient[idx] += r;
    gradient[d] += r;
  }
  for (std::size_t j = 0; j < d; ++j) {
    gradient[j] += lambda_ * params[j];
    f += 0.5 * lambda_ * params[j] * params[j];
  }
  return f;
}

std::vector<double> LogisticObjective::curvature(
    std::span<const double> params) const {
  std::vector<double> out(labels_.size());
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    const double s = sigmoid(margin(params, i));
    out[i] = sample_weights_[i] * s * (1.0 - s);
  }
  return out;
}

void LogisticObjective::hessian_product(std::span<const double> curvature,
                                        std::span<const double> v,
                                        std::span<double> out) const {
  const std::size_t d = x_->cols();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < labels_.size(); ++i) {
    double xv = v[d];
    for (auto idx : x_->row(i)) xv += v[idx];
    const double r = curvature[i] * xv;
    for (auto idx : x_->row(i)) out[idx] += r;
    out[d] += r;
  }
  for (std::size_t j = 0; j < d; ++j) out[j] += lambda_ * v[j];
}

namespace {

// Conjugate gradient on H p = -g, truncated at the Eisenstat-Walker style
// forcing tolerance.
std::vector<double> newton_direction(const LogisticObjective& objective,
                                     std::span<const double> curvature,
                                     std::span<const double> gradient) {
  const std::size_t n = gradient.size();
  std::vector<double> p(n, 0.0), r(n), d(n), hd(n);
  for (std::size_t i = 0; i < n; ++i) r[i] = -gradient[i];
  d = r;
  double rr = dot(r, r);
  const double gnorm = std::sqrt(rr);
  const double target = std::min(0.5, std::sqrt(gnorm)) * gnorm;
  const std::size_t max_steps = std::min<std::size_t>(n, 250);
  for (std::size_t k = 0; k < max_steps && std::sqrt(rr) > target; ++k) {
    objective.hessian_product(curvature, d, hd);
    const double curv = dot(d, hd);
    if (curv <= 0.0) break;
    const double alpha = rr / curv;
    for (std::size_t i = 0; i < n; ++i) {
      p[i] += alpha * d[i];
      r[i] -= alpha * hd[i];
    }
    const double rr_next = dot(r, r);
    const double beta = rr_next / rr;
    rr = rr_next;
    for (std::size_t i = 0; i < n; ++i) d[i] = r[i] + beta * d[i];
  }
  if (dot(p, gradient) >= 0.0) {
    for (std::size_t i = 0; i < n; ++i) p[i] = -gradient[i];
  }
  return p;
}

}  // namespace

LRModel train(const FeatureMatrix& x, std::span<const int> labels,
              const TrainConfig& config) {
  config.validate();
  LRModel model;
  model.config = config;
  model.weights.assign(x.cols(), 0.0);

  const auto positives = static_cast<std::size_t>(
      std::count(labels.begin(), labels.end(), 1));
  if (labels.size() != x.rows()) {
    throw std::invalid_argument("label count does not match matrix rows");
  }
  if (positives == 0 || positives == labels.size()) {
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(labels.size() - positives);
    model.intercept = std::log((p + 0.5) / (n + 0.5));
    model.converged = true;
    model.warnings.push_back(
        "training labels contain a single class; fitted intercept only");
    return model;
  }

  const LogisticObjective objective(x, labels, config);
  const std::size_t n = objective.dimension();
  std::vector<double> params(n, 0.0), gradient(n), trial(n);
  double f = objective.value_and_gradient(params, gradient);
  if (!std::isfinite(f)) throw RuntimeFailure("non-finite objective");
  model.objective_trace.push_back(f);

  for (int iter = 1; iter <= config.max_iter; ++iter) {
    if (norm_inf(gradient) < config.tol) {
      model.converged = true;
      break;
    }
    const auto curv = objective.curvature(params);
    const auto step = newton_direction(objective, curv, gradient);
    const double slope = dot(step, gradient);

    double alpha = 1.0;
    double f_trial = 0.0;
    bool accepted = false;
    for (int ls = 0; ls < 60; ++ls) {
      for (std::size_t i = 0; i < n; ++i) trial[i] = params[i] + alpha * step[i];
      f_trial = objective.value(trial);
      if (!std::isfinite(f_trial)) {
        throw RuntimeFailure("non-finite objective during line search");
      }
      if (f_trial <= f + 1e-4 * alpha * slope) {
        accepted = true;
        break;
      }
      alpha *= 0.5;
    }
    model.iterations = iter;
    if (!accepted || f_trial > f) {
      // No representable decrease left along the Newton direction.
      model.converged = true;
      break;
    }
    params.swap(trial);
    const double decrease = f - f_trial;
    f = objective.value_and_gradient(params, gradient);
    model.objective_trace.push_back(f);
    if (decrease < config.tol * std::max(1.0, std::abs(f))) {
      model.converged = true;
      break;
    }
  }
  if (!model.converged) {
    model.warnings.push_back("solver hit max_iter before converging");
  }
  std::copy(params.begin(), params.end() - 1, model.weights.begin());
  model.intercept = params.back();
  return model;
}

double predict_proba(const LRModel& model, const SparseRow& row) {
  double z = model.intercept;
  for (auto idx : row) {
    if (idx >= model.weights.size()) {
      throw std::out_of_range("feature index " + std::to_string(idx) +
                              " outside model dimension " +
                              std::to_string(model.weights.size()));
    }
    z += model.weights[idx];
  }
  return sigmoid(z);
}

int decide(const LRModel& model, const SparseRow& row, double threshold) {
  return predict_proba(model, row) >= threshold ? 1 : 0;
}

std::vector<double> score_matrix(const LRModel& model, const FeatureMatrix& x,
                                 std::uint64_t vocabulary_fingerprint) {
  if (vocabulary_fingerprint != model.vocabulary_fingerprint) {
    throw ConfigError("feature matrix vocabulary does not match the model");
  }
  std::vector<double> scores(x.rows());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    scores[i] = predict_proba(model, x.row(i));
  }
  return scores;
}

namespace {

std::string hex64(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return buf;
}

}  // namespace

nlohmann::json model_to_json(const LRModel& model) {
  nlohmann::json j;
  j["format"] = "cpr-logistic-regression/1";
  j["vocabulary_fingerprint"] = hex64(model.vocabulary_fingerprint);
  j["dimension"] = model.weights.size();
  j["intercept"] = model.intercept;
  j["weights"] = model.weights;
  j["config"] = {
      {"lambda", model.config.lambda},
      {"tol", model.config.tol},
      {"max_iter", model.config.max_iter},
      {"class_weight", model.config.class_weight == ClassWeighting::kBalanced
                           ? "balanced"
                           : "none"}};
  j["iterations"] = model.iterations;
  j["converged"] = model.converged;
  j["warnings"] = model.warnings;
  return j;
}

LRModel model_from_json(const nlohmann::json& j) {
  try {
    if (j.at("format") != "cpr-logistic-regression/1") {
      throw DataError("unsupported model format");
    }
    LRModel m;
    m.vocabulary_fingerprint =
        std::stoull(j.at("vocabulary_fingerprint").get<std::string>(), nullptr, 16);
    m.intercept = j.at("intercept").get<double>();
    m.weights = j.at("weights").get<std::vector<double>>();
    if (m.weights.size() != j.at("dimension").get<std::size_t>()) {
      throw DataError("model dimension does not match weight count");
    }
    const auto& c = j.at("config");
    m.config.lambda = c.at("lambda").get<double>();
    m.config.tol = c.at("tol").get<double>();
    m.config.max_iter = c.at("max_iter").get<int>();
    m.config.class_weight = c.at("class_weight") == "balanced"
                                ? ClassWeighting::kBalanced
                                : ClassWeighting::kNone;
    m.iterations = j.value("iterations", 0);
    m.converged = j.value("converged", false);
    m.warnings = j.value("warnings", std::vector<std::string>{});
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw DataError(std::string("malformed model: ") + e.what());
  }
}

}  // namespace cpr
