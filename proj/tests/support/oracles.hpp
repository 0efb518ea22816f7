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


// Dense reference implementations used as test oracles. Everything here goes
// through explicit inverses, determinants and std::cyl_bessel_k so it shares
// no numerical path with the library.
#pragma once

#include <cmath>
#include <cstdint>
#include <numbers>
#include <random>
#include <vector>

#include <Eigen/Dense>

#include "warpfield/model.hpp"
#include "warpfield/warp.hpp"

namespace oracle {

inline double matern(double h, double nu, double a) {
  const double x = a * h;
  if (x == 0.0) return 1.0;
  return std::pow(2.0, 1.0 - nu) / std::tgamma(nu) * std::pow(x, nu) * std::cyl_bessel_k(nu, x);
}

inline double matern_half(double x) { return std::exp(-x); }
inline double matern_three_halves(double x) { return (1.0 + x) * std::exp(-x); }
inline double matern_five_halves(double x) { return (1.0 + x + x * x / 3.0) * std::exp(-x); }

// Covariance of the latent fields between (i, s) and (j, u), warping with
// apply_warp one point at a time.
inline double cov_g(const warpfield::ModelSpec& spec, int i, int j, const Eigen::VectorXd& s,
                    const Eigen::VectorXd& u) {
  const auto& pr = spec.params;
  const Eigen::VectorXd fs = warpfield::warp::warp_for_process(spec.warps, i, s);
  const Eigen::VectorXd fu = warpfield::warp::warp_for_process(spec.warps, j, u);
  const double nu = 0.5 * (pr.nu[i] + pr.nu[j]);
  const double r = i == j ? 1.0 : pr.rho(i, j);
  return r * pr.sigma[i] * pr.sigma[j] * matern((fs - fu).norm(), nu, pr.scale);
}

struct Site {
  int process;
  Eigen::VectorXd s;
};

inline std::vector<Site> sites(const warpfield::MultivariateDataset& ds) {
  std::vector<Site> out;
  for (int i = 0; i < ds.p(); ++i)
    for (Eigen::Index k = 0; k < ds.count(i); ++k)
      out.push_back({i, ds.processes[i].locations.row(k).transpose()});
  return out;
}

inline Eigen::MatrixXd sigma_z(const warpfield::ModelSpec& spec, const warpfield::MultivariateDataset& ds) {
  const auto all = sites(ds);
  const Eigen::Index n = static_cast<Eigen::Index>(all.size());
  Eigen::MatrixXd sigma(n, n);
  for (Eigen::Index a = 0; a < n; ++a)
    for (Eigen::Index b = 0; b < n; ++b)
      sigma(a, b) = cov_g(spec, all[a].process, all[b].process, all[a].s, all[b].s);
  for (Eigen::Index a = 0; a < n; ++a) {
    const double t = spec.params.tau[all[a].process];
    sigma(a, a) += t * t;
  }
  return sigma;
}

inline Eigen::MatrixXd design(const warpfield::MultivariateDataset& ds) {
  const int q = ds.q();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(ds.size(), ds.p() * q);
  Eigen::Index row = 0;
  for (int i = 0; i < ds.p(); ++i)
    for (Eigen::Index k = 0; k < ds.count(i); ++k, ++row)
      x.block(row, i * q, 1, q) = ds.processes[i].covariates.row(k);
  return x;
}

inline Eigen::VectorXd stacked(const warpfield::MultivariateDataset& ds) {
  Eigen::VectorXd z(ds.size());
  Eigen::Index row = 0;
  for (const auto& pd : ds.processes) {
    z.segment(row, pd.z.size()) = pd.z;
    row += pd.z.size();
  }
  return z;
}

// Log restricted likelihood straight from its textbook form.
inline double reml(const warpfield::ModelSpec& spec, const warpfield::MultivariateDataset& ds) {
  const Eigen::MatrixXd sigma = sigma_z(spec, ds);
  const Eigen::MatrixXd x = design(ds);
  const Eigen::VectorXd z = stacked(ds);
  const Eigen::MatrixXd inv = sigma.inverse();
  const Eigen::MatrixXd xtsx = x.transpose() * inv * x;
  const Eigen::MatrixXd pi = inv - inv * x * xtsx.inverse() * x.transpose() * inv;
  const double n = static_cast<double>(z.size());
  const double r = static_cast<double>(x.cols());
  return -0.5 * (n - r) * std::log(2.0 * std::numbers::pi) + 0.5 * std::log((x.transpose() * x).determinant()) -
         0.5 * std::log(sigma.determinant()) - 0.5 * std::log(xtsx.determinant()) -
         0.5 * z.dot(pi * z);
}

inline Eigen::VectorXd gls(const warpfield::ModelSpec& spec, const warpfield::MultivariateDataset& ds) {
  const Eigen::MatrixXd inv = sigma_z(spec, ds).inverse();
  const Eigen::MatrixXd x = design(ds);
  return (x.transpose() * inv * x).inverse() * x.transpose() * inv * stacked(ds);
}

struct Conditional {
  double mean;
  double variance;
};

// Joint-Gaussian conditioning of the latent value at (process, s) on the data,
// with β known.
inline Conditional condition(const warpfield::ModelSpec& spec, const Eigen::VectorXd& beta,
                             const warpfield::MultivariateDataset& ds, int process,
                             const Eigen::VectorXd& s, const Eigen::RowVectorXd& x_row) {
  const auto all = sites(ds);
  const Eigen::Index n = static_cast<Eigen::Index>(all.size());
  Eigen::VectorXd c(n);
  for (Eigen::Index a = 0; a < n; ++a) c[a] = cov_g(spec, process, all[a].process, s, all[a].s);
  const Eigen::MatrixXd inv = sigma_z(spec, ds).inverse();
  const Eigen::VectorXd resid = stacked(ds) - design(ds) * beta;
  const int q = ds.q();
  const double prior_mean = x_row.dot(beta.segment(process * q, q));
  return {prior_mean + c.dot(inv * resid), cov_g(spec, process, process, s, s) - c.dot(inv * c)};
}

// Small helpers for random instances.
class Draw {
 public:
  explicit Draw(std::uint64_t seed) : gen_(seed) {}
  double uniform(double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(gen_); }
  double normal() { return std::normal_distribution<double>()(gen_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(gen_); }
  Eigen::MatrixXd points(int n, int d = 2, double lo = 0.0, double hi = 1.0) {
    Eigen::MatrixXd out(n, d);
    for (int r = 0; r < n; ++r)
      for (int c = 0; c < d; ++c) out(r, c) = uniform(lo, hi);
    return out;
  }
  Eigen::VectorXd normals(Eigen::Index n) {
    Eigen::VectorXd v(n);
    for (Eigen::Index k = 0; k < n; ++k) v[k] = normal();
    return v;
  }
  std::mt19937_64& engine() { return gen_; }

 private:
  std::mt19937_64 gen_;
};

}  // namespace oracle
