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
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "warpfield/config.hpp"
#include "warpfield/inference.hpp"
#include "warpfield/io.hpp"
#include "warpfield/predict.hpp"

namespace warpfield::experiment {

/// One simulated dataset split into observed and held-out grid locations.
struct SimulatedSplit {
  MultivariateDataset train;
  MultivariateDataset test;       ///< z holds the noisy held-out values
  Eigen::VectorXd test_latent;    ///< noise-free truth, stacked by process
  io::TruthTable truth;
};

/// Grid design of `sim`: sample observed locations (outside the block), hold
/// out the rest (or `test` of them), simulate both jointly from the truth.
SimulatedSplit simulate_split(const config::SimulationConfig& sim, std::uint64_t seed);

/// Observed locations of process 1 nearest to the lower-left, upper-right and
/// lower-right corners of the box.
warp::HomogenizationAnchors corner_anchors(const PointSet& locations, const Eigen::Vector2d& lo,
                                           const Eigen::Vector2d& hi);

struct ModelRun {
  std::string model;
  int replicate = 0;
  std::uint64_t seed = 0;
  Scores scores;
  FitResult fit;
  PredictionResult predictions;
  double truth_a_tilde = 0.0;  ///< ã of the simulating model under the same anchors
};

struct ExperimentResult {
  int p = 0;
  std::vector<ModelRun> runs;  ///< replicate-major, models in configured order
};

/// Runs every configured model on `replicates` simulated datasets.
ExperimentResult run(const config::Config& cfg, std::ostream* log = nullptr);

/// model,replicate,seed,rmspe_i,crps_i...,aic,reml,time_s
void write_runs(std::ostream& out, const ExperimentResult& result);
/// Averages per model in configured order: model,rmspe_i,crps_i...,aic,time_s
void write_summary(std::ostream& out, const ExperimentResult& result);

/// Self-contained matplotlib scripts for the prediction maps and the warped
/// (homogenized) locations; they read CSVs from their own directory.
std::string prediction_plot_script(const std::string& predictions_csv);
std::string warped_locations_plot_script(const std::string& homogenized_csv);

}  // namespace warpfield::experiment
