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

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace warpfield::optim {

/// Returns f(x); fills *grad when non-null. Non-finite values mark infeasible
/// points and make the line search retreat.
using Objective = std::function<double(const Eigen::VectorXd& x, Eigen::VectorXd* grad)>;

struct LbfgsOptions {
  int max_iters = 2000;
  double tol_grad = 1e-6;   ///< on the max-norm of the gradient
  double tol_rel_f = 1e-12;  ///< stall after three steps each decreasing less than this, relatively
  int memory = 10;
  int max_backtracks = 40;
  double max_step = 2.0;  ///< largest max-norm move per iteration
};

enum class Status { kConverged, kMaxIterations, kStalled, kFailed };

std::string to_string(Status status);

struct OptimResult {
  Eigen::VectorXd x;
  double value = 0.0;
  Eigen::VectorXd gradient;
  int iterations = 0;
  int evaluations = 0;
  Status status = Status::kFailed;
  std::vector<double> trace;  ///< objective after each accepted iteration
};

/// Limited-memory BFGS with Armijo backtracking.
OptimResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options = {});

}  // namespace warpfield::optim
