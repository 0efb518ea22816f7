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

#include <algorithm>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "warpfield/matern.hpp"
#include "warpfield/warp.hpp"

namespace warpfield {

/// Parameters of the parsimonious multivariate Matérn model: a common scale,
/// marginal smoothness nu_i with cross-smoothness (nu_i + nu_j) / 2, marginal
/// standard deviations, cross-correlations and measurement-error standard
/// deviations. Process indices are zero-based throughout the library.
struct ParsimoniousMaternParams {
  int p = 1;
  Eigen::VectorXd nu;
  double scale = 1.0;
  Eigen::VectorXd sigma;
  Eigen::MatrixXd rho;  ///< symmetric, unit diagonal
  Eigen::VectorXd tau;

  /// nu = 1, sigma = 1, rho = I, tau = 0.
  static ParsimoniousMaternParams defaults(int p);

  double cross_smoothness(int i, int j) const { return 0.5 * (nu[i] + nu[j]); }
  /// rho_ij sigma_i sigma_j (sigma_i^2 on the diagonal).
  double coefficient(int i, int j) const {
    // Ordered product so (i, j) and (j, i) round identically.
    return (i == j ? 1.0 : rho(i, j)) * (sigma[std::min(i, j)] * sigma[std::max(i, j)]);
  }
};

namespace covariance {

inline constexpr double kPsdEpsilon = 1e-8;

/// Stationary isotropic cross-covariance on the warped domain.
double cross_cov_D(const ParsimoniousMaternParams& params, int i, int j, const Eigen::VectorXd& h);

/// Sufficient bound on |rho_ij| for the parsimonious model in dimension d.
Eigen::MatrixXd rho_bound(const Eigen::VectorXd& nu, int d);

/// d log B_ij / d nu_i for i != j (zero on the diagonal).
Eigen::MatrixXd rho_bound_log_gradient(const Eigen::VectorXd& nu, int d, int i);

/// Throws InvalidParameterError for out-of-range parameters or |rho| above rho_bound.
void validate(const ParsimoniousMaternParams& params, int d);

/// C_ij,G(s, u) = C_ij,D(f∘g_i(s) - f∘g_j(u)).
double cross_cov_G(const ParsimoniousMaternParams& params, const warp::ProcessWarpSet& warps, int i,
                   int j, const Location& s, const Location& u);

enum class PsdCheck { kNone, kEigenvalues };

/// Strategy for evaluating the Matérn correlation over many distances.
enum class KernelEvaluation { kExact, kTabulated, kAuto };

/// Σ_G over per-process location lists, ordered process by process. With
/// kEigenvalues, throws InvalidParameterError when the smallest eigenvalue is
/// below -kPsdEpsilon times the spectral norm.
Eigen::MatrixXd assemble_sigma(const ParsimoniousMaternParams& params,
                               const warp::ProcessWarpSet& warps,
                               std::span<const PointSet> locations,
                               PsdCheck check = PsdCheck::kEigenvalues,
                               KernelEvaluation eval = KernelEvaluation::kExact);

/// Σ_G from already-warped locations.
Eigen::MatrixXd assemble_sigma_warped(const ParsimoniousMaternParams& params,
                                      std::span<const PointSet> warped,
                                      KernelEvaluation eval = KernelEvaluation::kExact);

/// Cross-covariances between warped observation locations (all processes,
/// stacked) and warped query points of one process: rows follow the
/// observations, columns the queries.
Eigen::MatrixXd cross_covariance_warped(const ParsimoniousMaternParams& params,
                                        std::span<const PointSet> warped_obs, int query_process,
                                        const PointSet& warped_queries,
                                        KernelEvaluation eval = KernelEvaluation::kExact);

/// Smallest eigenvalue relative to the spectral norm.
double relative_min_eigenvalue(const Eigen::MatrixXd& sigma);

/// ã = a |f(s_l) - f(s_k)|, the scale expressed in the homogenized frame.
struct TransformedScale {
  double a_tilde = 0.0;
};

TransformedScale transformed_scale(double scale, const warp::HomogenizedFrame& frame);

}  // namespace covariance
}  // namespace warpfield
