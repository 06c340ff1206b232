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

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json_fwd.hpp>

#include "cpr/features.hpp"

namespace cpr {

enum class ClassWeighting { kNone, kBalanced };

struct TrainConfig {
  double lambda = 1.0;  // L2 strength on the weights (intercept is free)
  double tol = 1e-4;
  int max_iter = 200;
  ClassWeighting class_weight = ClassWeighting::kBalanced;

  void validate() const;
};

struct LRModel {
  std::vector<double> weights;
  double intercept = 0.0;
  TrainConfig config;
  std::uint64_t vocabulary_fingerprint = 0;

  int iterations = 0;
  bool converged = false;
  std::vector<double> objective_trace;  // objective after each iteration
  std::vector<std::string> warnings;

  std::size_t dimension() const { return weights.size(); }
};

// Weighted logistic loss plus lambda/2 * |w|^2 over a binary sparse
// matrix. Parameters are laid out as [w_0 .. w_{d-1}, intercept].
//
//   f(w, b) = sum_i c_i * (log(1 + exp(z_i)) - y_i * z_i) + lambda/2 |w|^2,
//   z_i = w . x_i + b
//
// With balanced weighting c_i = N / (2 * N_{y_i}); otherwise c_i = 1.
class LogisticObjective {
 public:
  LogisticObjective(const FeatureMatrix& x, std::span<const int> labels,
                    const TrainConfig& config);

  std::size_t dimension() const { return x_->cols() + 1; }
  std::span<const double> sample_weights() const { return sample_weights_; }

  double value(std::span<const double> params) const;
  double value_and_gradient(std::span<const double> params,
                            std::span<double> gradient) const;
  // c_i * s_i * (1 - s_i) at params; feeds hessian_product.
  std::vector<double> curvature(std::span<const double> params) const;
  void hessian_product(std::span<const double> curvature,
                       std::span<const double> v, std::span<double> out) const;

 private:
  double margin(std::span<const double> params, std::size_t row) const;

  const FeatureMatrix* x_;
  std::vector<int> labels_;
  std::vector<double> sample_weights_;
  double lambda_;
};

// Deterministic truncated-Newton (Newton-CG) solver with Armijo
// backtracking; the objective never increases between iterations. Stops
// when max|gradient| < tol, when the relative objective decrease drops
// below tol, or after max_iter iterations. Single-class input yields an
// intercept-only model and a warning. Throws RuntimeFailure on a
// non-finite objective.
LRModel train(const FeatureMatrix& x, std::span<const int> labels,
              const TrainConfig& config = {});

// sigma(w . x + b). Throws std::out_of_range on a column outside the model.
double predict_proba(const LRModel& model, const SparseRow& row);
int decide(const LRModel& model, const SparseRow& row, double threshold = 0.5);

// Scores every row after checking the matrix was built with the model's
// vocabulary. Throws ConfigError on a fingerprint mismatch.
std::vector<double> score_matrix(const LRModel& model, const FeatureMatrix& x,
                                 std::uint64_t vocabulary_fingerprint);

nlohmann::json model_to_json(const LRModel& model);
LRModel model_from_json(const nlohmann::json& j);

}  // namespace cpr
