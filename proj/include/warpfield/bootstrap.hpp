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
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "warpfield/inference.hpp"
#include "warpfield/model.hpp"

namespace warpfield {

struct BootstrapOptions {
  int replicates = 1000;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  int threads = 0;
  /// Options for the replicate refits. Restarts, staging and threads are
  /// overridden (one warm-started run per replicate); max_iters defaults to 300.
  FitOptions fit;
  double max_failure_fraction = 0.2;

  BootstrapOptions() { fit.max_iters = 300; }
};

struct BootstrapReplicate {
  int index = 0;
  std::vector<std::pair<std::string, double>> values;  ///< identifiable quantities
  TrendCoefficients beta;
  PointSet homogenized;  ///< homogenized warped process-1 locations
};

struct Interval {
  std::string parameter;
  double lower = 0.0;
  double upper = 0.0;
  double level = 0.95;
};

struct BootstrapResult {
  int requested = 0;
  int failed = 0;
  std::vector<BootstrapReplicate> replicates;  ///< successful ones, by index
  std::vector<Interval> intervals;
};

/// Decorrelated residuals Z0 = L⁻¹(Z − Xβ̂) with L the Cholesky factor of Σ̂_Z.
struct Decorrelated {
  Cholesky chol;
  Eigen::VectorXd mean;  ///< Xβ̂
  Eigen::VectorXd residuals;
};

Decorrelated decorrelate(const ModelSpec& spec, const TrendCoefficients& beta,
                         const MultivariateDataset& ds);

/// Z_b = L Z0[indices] + Xβ̂.
Eigen::VectorXd recorrelate(const Decorrelated& dec, const std::vector<Eigen::Index>& indices);

/// Indices drawn uniformly with replacement for replicate `replicate`.
std::vector<Eigen::Index> resample_indices(Eigen::Index n, std::uint64_t seed, int replicate);

/// Quantile with linear interpolation between order statistics.
double percentile(std::vector<double> values, double prob);

/// Identifiable quantities of a fitted model: natural covariance parameters
/// and ã (the raw scale only when no warp is present).
std::vector<std::pair<std::string, double>> identifiable_quantities(
    const ModelSpec& spec, const std::optional<HomogenizationResult>& homogenized);

/// Decorrelate, resample, recorrelate, refit; percentile intervals at level 1 - alpha.
BootstrapResult bootstrap(const FitResult& fit, const MultivariateDataset& ds,
                          const BootstrapOptions& opts = {});

}  // namespace warpfield
