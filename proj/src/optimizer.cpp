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

#include "warpfield/optimizer.hpp"

#include <cmath>
#include <deque>
#include <limits>

namespace warpfield::optim {

std::string to_string(Status status) {
  switch (status) {
    case Status::kConverged:
      return "converged";
    case Status::kMaxIterations:
      return "max_iterations";
    case Status::kStalled:
      return "stalled";
    case Status::kFailed:
      return "failed";
  }
  return "unknown";
}

namespace {

struct Pair {
  Eigen::VectorXd s, y;
  double rho;
};

Eigen::VectorXd two_loop(const std::deque<Pair>& memory, const Eigen::VectorXd& g) {
  Eigen::VectorXd q = g;
  std::vector<double> alpha(memory.size());
  for (std::size_t k = memory.size(); k-- > 0;) {
    alpha[k] = memory[k].rho * memory[k].s.dot(q);
    q -= alpha[k] * memory[k].y;
  }
  if (!memory.empty()) {
    const auto& last = memory.back();
    q *= last.s.dot(last.y) / last.y.squaredNorm();
  }
  for (std::size_t k = 0; k < memory.size(); ++k) {
    const double beta = memory[k].rho * memory[k].y.dot(q);
    q += (alpha[k] - beta) * memory[k].s;
  }
  return -q;
}

}  // namespace

OptimResult minimize_lbfgs(const Objective& f, Eigen::VectorXd x0, const LbfgsOptions& options) {
  OptimResult result;
  result.x = std::move(x0);
  result.gradient = Eigen::VectorXd::Zero(result.x.size());
  result.value = f(result.x, &result.gradient);
  result.evaluations = 1;
  if (!std::isfinite(result.value) || !result.gradient.allFinite()) {
    result.status = Status::kFailed;
    return result;
  }
  if (result.x.size() == 0) {
    result.status = Status::kConverged;
    return result;
  }

  std::deque<Pair> memory;
  Eigen::VectorXd trial_grad(result.x.size());
  result.status = Status::kMaxIterations;
  int flat = 0;  // consecutive steps with negligible decrease
  for (int iter = 0; iter < options.max_iters; ++iter) {
    if (result.gradient.lpNorm<Eigen::Infinity>() <= options.tol_grad) {
      result.status = Status::kConverged;
      break;
    }
    Eigen::VectorXd dir = two_loop(memory, result.gradient);
    double slope = dir.dot(result.gradient);
    if (!(slope < 0.0)) {
      memory.clear();
      dir = -result.gradient;
      slope = dir.dot(result.gradient);
    }
    double step = 1.0;
    if (memory.empty()) step = std::min(1.0, 1.0 / dir.lpNorm<Eigen::Infinity>());
    const double longest = step * dir.lpNorm<Eigen::Infinity>();
    if (longest > options.max_step) step *= options.max_step / longest;

    bool accepted = false;
    Eigen::VectorXd trial;
    double trial_value = std::numeric_limits<double>::infinity();
    for (int bt = 0; bt < options.max_backtracks; ++bt) {
      trial = result.x + step * dir;
      trial_value = f(trial, &trial_grad);
      ++result.evaluations;
      if (std::isfinite(trial_value) && trial_grad.allFinite() &&
          trial_value <= result.value + 1e-4 * step * slope) {
        accepted = true;
        break;
      }
      step *= 0.5;
    }
    if (!accepted) {
      if (!memory.empty()) {
        // Stale curvature can produce poor directions; retry once from steepest descent.
        memory.clear();
        continue;
      }
      result.status = Status::kStalled;
      break;
    }

    Pair pair{trial - result.x, trial_grad - result.gradient, 0.0};
    const double sy = pair.s.dot(pair.y);
    if (sy > 1e-10 * pair.s.norm() * pair.y.norm()) {
      pair.rho = 1.0 / sy;
      memory.push_back(std::move(pair));
      if (static_cast<int>(memory.size()) > options.memory) memory.pop_front();
    }
    const double decrease = result.value - trial_value;
    result.x = std::move(trial);
    result.value = trial_value;
    result.gradient = trial_grad;
    result.iterations = iter + 1;
    result.trace.push_back(result.value);
    flat = decrease <= options.tol_rel_f * std::max(1.0, std::abs(result.value)) ? flat + 1 : 0;
    if (flat >= 3) {
      if (result.gradient.lpNorm<Eigen::Infinity>() <= options.tol_grad) {
        result.status = Status::kConverged;
      } else {
        result.status = Status::kStalled;
      }
      break;
    }
  }
  return result;
}

}  // namespace warpfield::optim
