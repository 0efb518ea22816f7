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

#include "warpfield/covariance.hpp"

#include <cmath>
#include <variant>

#include <boost/math/special_functions/digamma.hpp>

#include "warpfield/errors.hpp"

namespace warpfield {

ParsimoniousMaternParams ParsimoniousMaternParams::defaults(int p) {
  ParsimoniousMaternParams params;
  params.p = p;
  params.nu = Eigen::VectorXd::Ones(p);
  params.scale = 1.0;
  params.sigma = Eigen::VectorXd::Ones(p);
  params.rho = Eigen::MatrixXd::Identity(p, p);
  params.tau = Eigen::VectorXd::Zero(p);
  return params;
}

namespace covariance {
namespace {

constexpr Eigen::Index kTabulateThreshold = 4096;

bool use_table(KernelEvaluation eval, Eigen::Index entries) {
  switch (eval) {
    case KernelEvaluation::kExact:
      return false;
    case KernelEvaluation::kTabulated:
      return true;
    case KernelEvaluation::kAuto:
      return entries > kTabulateThreshold;
  }
  return false;
}

template <class Kernel>
void fill_block(const Kernel& kernel, double scale, double coef, const PointSet& a,
                const PointSet& b, bool symmetric, Eigen::Ref<Eigen::MatrixXd> out) {
  const Eigen::Index dim = a.cols();
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    const Eigen::Index c_end = symmetric ? r + 1 : b.rows();
    for (Eigen::Index c = 0; c < c_end; ++c) {
      double d2 = 0.0;
      for (Eigen::Index k = 0; k < dim; ++k) {
        const double diff = a(r, k) - b(c, k);
        d2 += diff * diff;
      }
      out(r, c) = coef * kernel(scale * std::sqrt(d2));
    }
  }
  if (symmetric) {
    for (Eigen::Index r = 0; r < a.rows(); ++r) {
      for (Eigen::Index c = r + 1; c < a.rows(); ++c) out(r, c) = out(c, r);
    }
  }
}

void block(const ParsimoniousMaternParams& params, int i, int j, const PointSet& a, const PointSet& b,
           bool symmetric, KernelEvaluation eval, Eigen::Ref<Eigen::MatrixXd> out) {
  if (a.rows() == 0 || b.rows() == 0) return;
  MaternKernel kernel(params.cross_smoothness(i, j));
  const double coef = params.coefficient(i, j);
  if (use_table(eval, a.rows() * b.rows())) {
    MaternTable table(kernel);
    fill_block(table, params.scale, coef, a, b, symmetric, out);
  } else {
    fill_block(kernel, params.scale, coef, a, b, symmetric, out);
  }
}

}  // namespace

double cross_cov_D(const ParsimoniousMaternParams& params, int i, int j, const Eigen::VectorXd& h) {
  if (i < 0 || j < 0 || i >= params.p || j >= params.p) {
    throw std::out_of_range("process index out of range");
  }
  return params.coefficient(i, j) *
         matern_corr(h.norm(), params.cross_smoothness(i, j), params.scale);
}

Eigen::MatrixXd rho_bound(const Eigen::VectorXd& nu, int d) {
  const Eigen::Index p = nu.size();
  const double half_d = 0.5 * d;
  Eigen::MatrixXd bound = Eigen::MatrixXd::Ones(p, p);
  for (Eigen::Index i = 0; i < p; ++i) {
    for (Eigen::Index j = 0; j < p; ++j) {
      if (i == j) continue;
      const double mean = 0.5 * (nu[i] + nu[j]);
      const double log_b = 0.5 * std::lgamma(nu[i] + half_d) + 0.5 * std::lgamma(nu[j] + half_d) +
                           std::lgamma(mean) - 0.5 * std::lgamma(nu[i]) -
                           0.5 * std::lgamma(nu[j]) - std::lgamma(mean + half_d);
      bound(i, j) = std::exp(log_b);
    }
  }
  return bound;
}

Eigen::MatrixXd rho_bound_log_gradient(const Eigen::VectorXd& nu, int d, int i) {
  using boost::math::digamma;
  const Eigen::Index p = nu.size();
  const double half_d = 0.5 * d;
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(p, p);
  for (Eigen::Index j = 0; j < p; ++j) {
    if (j == i) continue;
    const double mean = 0.5 * (nu[i] + nu[j]);
    const double g = 0.5 * digamma(nu[i] + half_d) + 0.5 * digamma(mean) - 0.5 * digamma(nu[i]) -
                     0.5 * digamma(mean + half_d);
    grad(i, j) = g;
    grad(j, i) = g;
  }
  return grad;
}

void validate(const ParsimoniousMaternParams& params, int d) {
  const int p = params.p;
  if (p < 1) throw InvalidParameterError("need at least one process");
  if (params.nu.size() != p || params.sigma.size() != p || params.tau.size() != p ||
      params.rho.rows() != p || params.rho.cols() != p) {
    throw InvalidParameterError("parameter dimensions do not match the process count");
  }
  if (!(params.scale > 0.0) || !std::isfinite(params.scale)) {
    throw InvalidParameterError("scale must be positive");
  }
  for (int i = 0; i < p; ++i) {
    if (!(params.nu[i] > 0.0)) throw InvalidParameterError("smoothness must be positive");
    if (!(params.sigma[i] > 0.0)) throw InvalidParameterError("sigma must be positive");
    if (!(params.tau[i] >= 0.0)) throw InvalidParameterError("tau must be non-negative");
  }
  Eigen::MatrixXd bound = rho_bound(params.nu, d);
  for (int i = 0; i < p; ++i) {
    if (params.rho(i, i) != 1.0) throw InvalidParameterError("rho must have a unit diagonal");
    for (int j = i + 1; j < p; ++j) {
      if (params.rho(i, j) != params.rho(j, i)) throw InvalidParameterError("rho must be symmetric");
      if (std::abs(params.rho(i, j)) > bound(i, j)) {
        throw InvalidParameterError("rho_" + std::to_string(i + 1) + std::to_string(j + 1) +
                                    " exceeds the parsimonious validity bound");
      }
    }
  }
}

double cross_cov_G(const ParsimoniousMaternParams& params, const warp::ProcessWarpSet& warps, int i,
                   int j, const Location& s, const Location& u) {
  return cross_cov_D(params, i, j,
                     warp::warp_for_process(warps, i, s) - warp::warp_for_process(warps, j, u));
}

Eigen::MatrixXd assemble_sigma_warped(const ParsimoniousMaternParams& params,
                                      std::span<const PointSet> warped, KernelEvaluation eval) {
  const int p = params.p;
  if (static_cast<int>(warped.size()) != p) {
    throw InvalidParameterError("need one location list per process");
  }
  std::vector<Eigen::Index> offset(static_cast<std::size_t>(p) + 1, 0);
  for (int i = 0; i < p; ++i) offset[i + 1] = offset[i] + warped[i].rows();
  const Eigen::Index n = offset[p];
  Eigen::MatrixXd sigma(n, n);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      auto out = sigma.block(offset[i], offset[j], warped[i].rows(), warped[j].rows());
      block(params, i, j, warped[i], warped[j], i == j, eval, out);
      if (i != j) {
        sigma.block(offset[j], offset[i], warped[j].rows(), warped[i].rows()) = out.transpose();
      }
    }
  }
  return sigma;
}

Eigen::MatrixXd assemble_sigma(const ParsimoniousMaternParams& params,
                               const warp::ProcessWarpSet& warps,
                               std::span<const PointSet> locations, PsdCheck check,
                               KernelEvaluation eval) {
  if (warps.process_count() != params.p || static_cast<int>(locations.size()) != params.p) {
    throw InvalidParameterError("process count mismatch between parameters, warps and locations");
  }
  std::vector<PointSet> warped;
  warped.reserve(locations.size());
  for (int i = 0; i < params.p; ++i) {
    warped.push_back(warp::warp_points_for_process(warps, i, locations[i]));
  }
  Eigen::MatrixXd sigma = assemble_sigma_warped(params, warped, eval);
  if (check == PsdCheck::kEigenvalues && sigma.rows() > 0) {
    const double rel = relative_min_eigenvalue(sigma);
    if (rel < -kPsdEpsilon) {
      throw InvalidParameterError("assembled covariance is not nonnegative-definite (min eigenvalue " +
                                  std::to_string(rel) + " relative to its norm)");
    }
  }
  return sigma;
}

Eigen::MatrixXd cross_covariance_warped(const ParsimoniousMaternParams& params,
                                        std::span<const PointSet> warped_obs, int query_process,
                                        const PointSet& warped_queries, KernelEvaluation eval) {
  Eigen::Index n = 0;
  for (const auto& w : warped_obs) n += w.rows();
  Eigen::MatrixXd out(n, warped_queries.rows());
  Eigen::Index row = 0;
  for (int j = 0; j < params.p; ++j) {
    auto blk = out.block(row, 0, warped_obs[j].rows(), warped_queries.rows());
    block(params, j, query_process, warped_obs[j], warped_queries, false, eval, blk);
    row += warped_obs[j].rows();
  }
  return out;
}

double relative_min_eigenvalue(const Eigen::MatrixXd& sigma) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(sigma, Eigen::EigenvaluesOnly);
  const auto& ev = solver.eigenvalues();
  const double norm = std::max(std::abs(ev.minCoeff()), std::abs(ev.maxCoeff()));
  if (norm == 0.0) return 0.0;
  return ev.minCoeff() / norm;
}

TransformedScale transformed_scale(double scale, const warp::HomogenizedFrame& frame) {
  return {scale * frame.scale};
}

}  // namespace covariance
}  // namespace warpfield
