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
#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include <Eigen/Dense>
#include <json.hpp>

#include "warpfield/inference.hpp"
#include "warpfield/model.hpp"

namespace warpfield::config {

using Json = nlohmann::json;

/// A model to fit (or simulate from): parameters, warps, trend and fixed names.
struct ModelConfig {
  std::string name = "model";
  ModelSpec spec;
  std::set<std::string> fixed;
};

/// Locations are drawn from a regular grid; `sample` of them are observed and
/// the rest (or `test` of them) are held out for scoring.
struct SimulationConfig {
  Eigen::Vector2d lo{-0.5, -0.5};
  Eigen::Vector2d hi{0.5, 0.5};
  int resolution = 101;
  int sample = 1000;
  int test = 0;  ///< 0: every unsampled grid point
  std::optional<std::pair<Eigen::Vector2d, Eigen::Vector2d>> block;  ///< excluded from sampling
  ModelConfig truth;
  Eigen::VectorXd beta;  ///< p * q entries, zeros by default
};

struct DataConfig {
  std::optional<std::string> csv;
  std::optional<std::string> truth_csv;
  std::optional<SimulationConfig> simulate;
};

struct BootstrapConfig {
  int replicates = 200;
  double alpha = 0.05;
  int max_iters = 300;
};

struct OutputConfig {
  std::string directory = "out";
  bool plots = false;
};

/// Anchor choice for homogenization: the library default (farthest pair) or
/// the observed locations nearest to three corners of the grid box.
enum class AnchorRule { kFarthest, kCorners };

struct ExperimentSettings {
  std::vector<ModelConfig> models;
  int replicates = 1;
  bool observation_scale = false;  ///< score noisy hold-outs instead of the latent truth
  AnchorRule anchors = AnchorRule::kFarthest;
};

struct Config {
  std::uint64_t seed = 1;
  DataConfig data;
  std::optional<ModelConfig> model;
  FitOptions fit;
  BootstrapConfig bootstrap;
  OutputConfig output;
  std::optional<std::string> fit_report;
  std::optional<std::string> queries_csv;
  ExperimentSettings experiment;
  int threads = 0;
};

/// Parses and validates; unknown keys raise InputError naming the key path.
/// Relative paths are resolved against `base`.
Config parse(const Json& doc, const std::filesystem::path& base = {});
Config load(const std::string& path);

/// Model section <-> ModelConfig. `dim` is the spatial dimension.
ModelConfig parse_model(const Json& doc, const std::string& where = "model");
Json model_to_json(const ModelSpec& spec, const std::set<std::string>& fixed = {});

Json unit_to_json(const warp::WarpUnit& unit);
warp::WarpUnit unit_from_json(const Json& doc, const std::string& where);

/// Fit report: fitted model (re-loadable as a model section), β̂, θ̂ in raw
/// and natural form, ã, AIC, convergence and trace.
Json fit_report(const FitResult& fit);
/// The fitted model and trend stored in a fit report.
FitResult read_fit_report(const std::string& path);

}  // namespace warpfield::config
