// Copyright 2026 The warpfield Authors
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

#include <span>
#include <vector>

#include <Eigen/Dense>

#include "warpfield/inference.hpp"
#include "warpfield/model.hpp"

namespace warpfield {

/// A prediction target: process (zero-based), location and covariate row.
struct Query {
  int process = 0;
  Location s;
  Eigen::RowVectorXd x;  ///< q covariates, first one the intercept
};

struct PredictionResult {
  std::vector<int> process;
  PointSet locations;
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;              ///< of the latent process
  Eigen::VectorXd observation_variance;  ///< variance + τ_i²

  std::size_t size() const { return process.size(); }
};

/// Simple cokriging with plug-in parameters and β treated as known. Caches the
/// factorization of Σ_Z so repeated queries only cost triangular solves.
class Predictor {
 public:
  Predictor(ModelSpec spec, TrendCoefficients beta, const MultivariateDataset& ds,
            covariance::KernelEvaluation eval = covariance::KernelEvaluation::kAuto);

  PredictionResult predict(std::span<const Query> queries) const;

 private:
  ModelSpec spec_;
  TrendCoefficients beta_;
  covariance::KernelEvaluation eval_;
  int q_;
  std::vector<PointSet> warped_;
  Cholesky chol_;
  Eigen::VectorXd weights_;  // Σ_Z⁻¹ (Z − Xβ)
};

PredictionResult predict(const FitResult& fit, const MultivariateDataset& ds,
                         std::span<const Query> queries);

/// One query per location of `targets` (covariates taken from the dataset).
std::vector<Query> queries_for(const MultivariateDataset& targets);

/// CRPS of a Gaussian forecast N(mu, sd²) at y; |y - mu| when sd = 0.
double crps_gaussian(double y, double mu, double sd);

struct Scores {
  Eigen::VectorXd rmspe;  ///< per process, NaN when the process has no queries
  Eigen::VectorXd crps;
  Eigen::VectorXi count;
};

/// Scores predictions against truths in query order. With `observation_scale`
/// the predictive sd includes measurement error (hold-out measurements);
/// otherwise it is the latent sd (noise-free truth).
Scores score(const PredictionResult& pred, const Eigen::VectorXd& truth, int p,
             bool observation_scale);

}  // namespace warpfield
