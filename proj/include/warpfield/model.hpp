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
#include <vector>

#include <Eigen/Dense>

#include "warpfield/covariance.hpp"
#include "warpfield/warp.hpp"

namespace warpfield {

/// Locations, observations and covariates of one process. `z` may be empty
/// when the dataset only describes where to simulate or predict.
struct ProcessData {
  PointSet locations;
  Eigen::VectorXd z;
  Eigen::MatrixXd covariates;  ///< n × q, first column ones by convention
};

struct MultivariateDataset {
  std::vector<ProcessData> processes;

  int p() const { return static_cast<int>(processes.size()); }
  int q() const;
  int dim() const;
  Eigen::Index size() const;
  Eigen::Index count(int process) const { return processes[process].locations.rows(); }
  bool has_observations() const;

  /// Observations stacked process by process.
  Eigen::VectorXd stacked_z() const;
  std::vector<PointSet> locations() const;

  /// Throws InputError on inconsistent shapes or non-finite values.
  void validate() const;

  /// Intercept-only dataset without observations.
  static MultivariateDataset at_locations(std::vector<PointSet> locations);
};

struct TrendCoefficients {
  Eigen::VectorXd beta;  ///< β_1, ..., β_p stacked
};

struct ModelSpec {
  ParsimoniousMaternParams params;
  warp::ProcessWarpSet warps;
  int q = 1;

  /// Identity warps around `params`.
  static ModelSpec stationary(ParsimoniousMaternParams params, int q = 1);
};

/// X = bdiag(X_1, ..., X_p).
Eigen::MatrixXd build_design(const MultivariateDataset& ds);

/// Adds τ_i² to the diagonal entries of process i.
void add_noise(Eigen::MatrixXd& sigma, const ParsimoniousMaternParams& params,
               const MultivariateDataset& ds);

/// Σ_Z = Σ_G + V.
Eigen::MatrixXd sigma_Z(const ModelSpec& spec, const MultivariateDataset& ds,
                        covariance::PsdCheck check = covariance::PsdCheck::kNone,
                        covariance::KernelEvaluation eval = covariance::KernelEvaluation::kAuto);

/// Cholesky factor with the diagonal jitter that was needed to obtain it.
struct Cholesky {
  Eigen::LLT<Eigen::MatrixXd> llt;
  double jitter = 0.0;

  Eigen::MatrixXd lower() const { return llt.matrixL(); }
  double log_det() const;
};

/// Factorizes, retrying with jitter 1e-10 · mean(diag) escalated tenfold up to
/// 1e-6 · mean(diag). Throws NotPositiveDefiniteError when all attempts fail.
Cholesky robust_cholesky(const Eigen::MatrixXd& sigma);

/// Z = Xβ + L w with L the Cholesky factor of Σ_Z and w standard normal.
std::vector<Eigen::VectorXd> simulate(const ModelSpec& spec, const MultivariateDataset& ds,
                                      const TrendCoefficients& beta, std::uint64_t seed);

struct Simulation {
  std::vector<Eigen::VectorXd> latent;    ///< Xβ + Y, noise free
  std::vector<Eigen::VectorXd> observed;  ///< latent + measurement error
};

/// Draws the latent field from Σ_G and adds independent measurement error.
Simulation simulate_with_truth(const ModelSpec& spec, const MultivariateDataset& ds,
                               const TrendCoefficients& beta, std::uint64_t seed);

/// Splits a stacked vector into per-process pieces following `ds`.
std::vector<Eigen::VectorXd> split_by_process(const Eigen::VectorXd& stacked,
                                              const MultivariateDataset& ds);

}  // namespace warpfield
