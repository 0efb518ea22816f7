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

#include "warpfield/predict.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include <boost/math/distributions/normal.hpp>

#include "warpfield/errors.hpp"

namespace warpfield {

Predictor::Predictor(ModelSpec spec, TrendCoefficients beta, const MultivariateDataset& ds,
                     covariance::KernelEvaluation eval)
    : spec_(std::move(spec)), beta_(std::move(beta)), eval_(eval), q_(ds.q()) {
  ds.validate();
  if (spec_.params.p != ds.p()) throw InputError("model and data disagree on the process count");
  if (beta_.beta.size() != static_cast<Eigen::Index>(ds.p()) * q_) {
    throw InputError("trend coefficients must have p * q entries");
  }
  for (int i = 0; i < ds.p(); ++i) {
    warped_.push_back(warp::warp_points_for_process(spec_.warps, i, ds.processes[i].locations));
  }
  Eigen::MatrixXd sigma = covariance::assemble_sigma_warped(spec_.params, warped_, eval_);
  add_noise(sigma, spec_.params, ds);
  chol_ = robust_cholesky(sigma);
  weights_ = chol_.llt.solve(ds.stacked_z() - build_design(ds) * beta_.beta);
}

PredictionResult Predictor::predict(std::span<const Query> queries) const {
  const auto& prm = spec_.params;
  const int d = warped_.empty() ? 2 : static_cast<int>(warped_.front().cols());
  const Eigen::Index n = static_cast<Eigen::Index>(queries.size());
  PredictionResult out;
  out.process.resize(queries.size());
  out.locations.resize(n, d);
  out.mean.resize(n);
  out.variance.resize(n);
  out.observation_variance.resize(n);

  for (int i = 0; i < prm.p; ++i) {
    std::vector<Eigen::Index> rows;
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto& qr = queries[static_cast<std::size_t>(k)];
      if (qr.process < 0 || qr.process >= prm.p) throw InputError("query process out of range");
      if (qr.process == i) rows.push_back(k);
    }
    constexpr std::size_t kChunk = 1024;
    for (std::size_t start = 0; start < rows.size(); start += kChunk) {
      const std::size_t m = std::min(kChunk, rows.size() - start);
      PointSet pts(static_cast<Eigen::Index>(m), d);
      for (std::size_t k = 0; k < m; ++k) {
        const auto& qr = queries[static_cast<std::size_t>(rows[start + k])];
        if (qr.s.size() != d || !qr.s.allFinite()) throw InputError("query location is malformed");
        pts.row(static_cast<Eigen::Index>(k)) = qr.s.transpose();
      }
      const PointSet warped_q = warp::warp_points_for_process(spec_.warps, i, pts);
      const Eigen::MatrixXd cross =
          covariance::cross_covariance_warped(prm, warped_, i, warped_q, eval_);
      const Eigen::MatrixXd half = chol_.llt.matrixL().solve(cross);
      const double prior = prm.sigma[i] * prm.sigma[i];
      for (std::size_t k = 0; k < m; ++k) {
        const Eigen::Index row = rows[start + k];
        const Eigen::Index col = static_cast<Eigen::Index>(k);
        const auto& qr = queries[static_cast<std::size_t>(row)];
        if (qr.x.size() != q_) throw InputError("query covariate row must have q entries");
        const double trend = qr.x.dot(beta_.beta.segment(static_cast<Eigen::Index>(i) * q_, q_));
        double var = prior - half.col(col).squaredNorm();
        if (var < 0.0) {
          if (var < -1e-10 * std::max(1.0, prior)) {
            throw NotPositiveDefiniteError("negative prediction variance " + std::to_string(var));
          }
          var = 0.0;
        }
        out.process[static_cast<std::size_t>(row)] = i;
        out.locations.row(row) = qr.s.transpose();
        out.mean[row] = trend + cross.col(col).dot(weights_);
        out.variance[row] = var;
        out.observation_variance[row] = var + prm.tau[i] * prm.tau[i];
      }
    }
  }
  return out;
}

PredictionResult predict(const FitResult& fit, const MultivariateDataset& ds,
                         std::span<const Query> queries) {
  return Predictor(fit.spec, fit.beta, ds).predict(queries);
}

std::vector<Query> queries_for(const MultivariateDataset& targets) {
  std::vector<Query> out;
  for (int i = 0; i < targets.p(); ++i) {
    const auto& proc = targets.processes[i];
    for (Eigen::Index k = 0; k < proc.locations.rows(); ++k) {
      out.push_back({i, proc.locations.row(k).transpose(), proc.covariates.row(k)});
    }
  }
  return out;
}

double crps_gaussian(double y, double mu, double sd) {
  if (!(sd > 0.0)) return std::abs(y - mu);
  static const boost::math::normal_distribution<double> standard;
  const double z = (y - mu) / sd;
  return sd * (z * (2.0 * boost::math::cdf(standard, z) - 1.0) +
               2.0 * boost::math::pdf(standard, z) - 1.0 / std::sqrt(std::numbers::pi));
}

Scores score(const PredictionResult& pred, const Eigen::VectorXd& truth, int p,
             bool observation_scale) {
  if (truth.size() != static_cast<Eigen::Index>(pred.size())) {
    throw InputError("truth and predictions differ in length");
  }
  Scores s;
  s.rmspe = Eigen::VectorXd::Zero(p);
  s.crps = Eigen::VectorXd::Zero(p);
  s.count = Eigen::VectorXi::Zero(p);
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const int i = pred.process[k];
    const auto r = static_cast<Eigen::Index>(k);
    const double err = truth[r] - pred.mean[r];
    const double var = observation_scale ? pred.observation_variance[r] : pred.variance[r];
    s.rmspe[i] += err * err;
    s.crps[i] += crps_gaussian(truth[r], pred.mean[r], std::sqrt(var));
    ++s.count[i];
  }
  for (int i = 0; i < p; ++i) {
    if (s.count[i] == 0) {
      s.rmspe[i] = s.crps[i] = std::numeric_limits<double>::quiet_NaN();
    } else {
      s.rmspe[i] = std::sqrt(s.rmspe[i] / s.count[i]);
      s.crps[i] /= s.count[i];
    }
  }
  return s;
}

}  // namespace warpfield
