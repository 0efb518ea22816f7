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

#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "warpfield/bootstrap.hpp"
#include "warpfield/model.hpp"
#include "warpfield/predict.hpp"

namespace warpfield::io {

/// Shortest-roundtrip-safe decimal text (17 significant digits).
std::string format_double(double value);

/// Minimal CSV table: header plus rows of raw cells.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::vector<std::string>> rows;

  /// Column index of `name`, -1 when absent.
  int column(const std::string& name) const;
};

CsvTable read_csv(std::istream& in);
CsvTable read_csv_file(const std::string& path);

/// Data CSV: process_id,x,y,z[,cov_1..cov_k] with 1-based process ids. The z
/// column may be absent (locations only). An intercept column is prepended to
/// the covariates. `p` forces the process count (0: the largest id).
MultivariateDataset parse_dataset(const CsvTable& table, int p = 0);
MultivariateDataset read_dataset(const std::string& path, int p = 0);
void write_dataset(std::ostream& out, const MultivariateDataset& ds);

/// Truth CSV: process_id,x,y,latent,z,observed.
struct TruthTable {
  MultivariateDataset all;  ///< every simulated location, z = noisy value
  std::vector<Eigen::VectorXd> latent;
  std::vector<std::vector<bool>> observed;
};
void write_truth(std::ostream& out, const TruthTable& truth);
TruthTable read_truth(const std::string& path, int p = 0);

/// Rows of `truth` with observed == false, as a dataset plus their latent
/// values stacked process by process.
MultivariateDataset held_out(const TruthTable& truth, Eigen::VectorXd* latent);

/// process_id,x,y,mean,sd,sd_obs
void write_predictions(std::ostream& out, const PredictionResult& pred);

/// process_id,rmspe,crps,count
void write_scores(std::ostream& out, const Scores& scores);

/// replicate,parameter,value
void write_bootstrap(std::ostream& out, const BootstrapResult& result);
/// parameter,lower,upper,level
void write_bootstrap_summary(std::ostream& out, const BootstrapResult& result);

/// process_id,x,y,hx,hy
void write_homogenized(std::ostream& out, const MultivariateDataset& ds,
                       const HomogenizationResult& h);

}  // namespace warpfield::io
