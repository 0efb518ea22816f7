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

#include <cstdint>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "warpfield/covariance.hpp"
#include "warpfield/model.hpp"
#include "warpfield/params.hpp"
#include "warpfield/warp.hpp"

namespace warpfield {

/// Log restricted likelihood of `spec` given the observations in `ds`.
/// Throws NotPositiveDefiniteError when Σ_Z cannot be factorized.
double reml_loglik(const ModelSpec& spec, const MultivariateDataset& ds,
                   covariance::KernelEvaluation eval = covariance::KernelEvaluation::kAuto);

/// β̂ = (X'Σ⁻¹X)⁻¹ X'Σ⁻¹ Z. Coefficients of processes without data are zero.
TrendCoefficients gls_beta(const ModelSpec& spec, const MultivariateDataset& ds,
                           covariance::KernelEvaluation eval = covariance::KernelEvaluation::kAuto);

/// The restricted likelihood as a function of unconstrained coordinates.
class RemlObjective {
 public:
  RemlObjective(const MultivariateDataset& ds, ParamLayout layout,
                covariance::KernelEvaluation eval = covariance::KernelEvaluation::kAuto);

  /// L(θ), or -infinity when θ maps to an invalid or non-factorizable model.
  double value(const Eigen::VectorXd& theta) const;
  /// L(θ) and dL/dθ. The smoothness derivative of the Matérn kernel is taken
  /// by central differences in ν; everything else is analytic.
  double value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const;

  const ParamLayout& layout() const { return layout_; }
  const MultivariateDataset& data() const { return *ds_; }

 private:
  const MultivariateDataset* ds_;
  ParamLayout layout_;
  covariance::KernelEvaluation eval_;
  Eigen::MatrixXd x_;
  Eigen::VectorXd z_;
  double constant_ = 0.0;  // -(N - r)/2 log 2π + ½ log|X'X|
};

struct FitOptions {
  int max_iters = 2000;
  double tol_grad = 1e-6;
  double tol_rel_f = 1e-10;
  int restarts = 3;
  std::uint64_t seed = 0;
  bool staged = true;
  int threads = 0;  ///< 0: resolve from WARPFIELD_THREADS / hardware
  double warp_jitter = 0.1;  ///< sd of restart perturbations in warp coordinates
  std::set<std::string> fixed;
  bool homogenize = true;
  std::optional<warp::HomogenizationAnchors> anchors;
  covariance::KernelEvaluation kernel = covariance::KernelEvaluation::kAuto;
};

struct Convergence {
  int iterations = 0;
  int evaluations = 0;
  double gradient_norm = 0.0;
  std::string status;
};

struct HomogenizationResult {
  warp::HomogenizationAnchors anchors;
  warp::HomogenizedFrame frame;
  std::vector<PointSet> points;  ///< homogenized warped locations per process
  double a_tilde = 0.0;
};

struct FitResult {
  ModelSpec spec;
  std::vector<std::string> names;
  Eigen::VectorXd theta;
  TrendCoefficients beta;
  double reml_value = 0.0;
  double aic = 0.0;
  int k = 0;
  Convergence convergence;
  std::vector<double> trace;  ///< restricted log-likelihood per accepted iteration
  std::optional<HomogenizationResult> homogenized;
  std::vector<std::string> diagnostics;
  double seconds = 0.0;
  bool ok() const { return convergence.status != "failed"; }
};

/// Maximizes the restricted likelihood starting from `init`. Parameters of
/// `init` are the starting values; names in opts.fixed stay put.
FitResult fit(const ModelSpec& init, const MultivariateDataset& ds, const FitOptions& opts = {});

/// Homogenizes the warped locations of `ds` under `spec`.
HomogenizationResult homogenize_fit(const ModelSpec& spec, const MultivariateDataset& ds,
                                    std::optional<warp::HomogenizationAnchors> anchors = {});

struct ComplexityReport {
  double warp_cost = 0.0;    ///< N-weighted count of basis evaluations, Σ_i n_i Σ_l r_l
  double factor_cost = 0.0;  ///< N³ / 3 flops for the Cholesky factorization
  double warp_seconds = 0.0;
  double assembly_seconds = 0.0;
  double factor_seconds = 0.0;
  double total_seconds = 0.0;  ///< one restricted-likelihood evaluation
};

ComplexityReport complexity_report(const ModelSpec& spec, const MultivariateDataset& ds);

}  // namespace warpfield
