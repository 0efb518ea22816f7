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

#include "warpfield/model.hpp"

#include <cmath>
#include <string>

#include "warpfield/errors.hpp"
#include "warpfield/rng.hpp"

namespace warpfield {

int MultivariateDataset::q() const {
  for (const auto& proc : processes) {
    if (proc.covariates.cols() > 0) return static_cast<int>(proc.covariates.cols());
  }
  return 1;
}

int MultivariateDataset::dim() const {
  for (const auto& proc : processes) {
    if (proc.locations.cols() > 0) return static_cast<int>(proc.locations.cols());
  }
  return 2;
}

Eigen::Index MultivariateDataset::size() const {
  Eigen::Index n = 0;
  for (const auto& proc : processes) n += proc.locations.rows();
  return n;
}

bool MultivariateDataset::has_observations() const {
  for (const auto& proc : processes) {
    if (proc.z.size() != proc.locations.rows()) return false;
  }
  return true;
}

Eigen::VectorXd MultivariateDataset::stacked_z() const {
  if (!has_observations()) throw InputError("dataset has no observations");
  Eigen::VectorXd z(size());
  Eigen::Index row = 0;
  for (const auto& proc : processes) {
    z.segment(row, proc.z.size()) = proc.z;
    row += proc.z.size();
  }
  return z;
}

std::vector<PointSet> MultivariateDataset::locations() const {
  std::vector<PointSet> out;
  out.reserve(processes.size());
  for (const auto& proc : processes) out.push_back(proc.locations);
  return out;
}

void MultivariateDataset::validate() const {
  if (processes.empty()) throw InputError("dataset has no processes");
  const int d = dim();
  const int nq = q();
  for (std::size_t i = 0; i < processes.size(); ++i) {
    const auto& proc = processes[i];
    const std::string who = "process " + std::to_string(i + 1);
    if (proc.locations.rows() > 0 && proc.locations.cols() != d) {
      throw InputError(who + ": location dimension differs from other processes");
    }
    if (proc.covariates.rows() != proc.locations.rows() || proc.covariates.cols() != nq) {
      throw InputError(who + ": covariate matrix must be n x q");
    }
    if (proc.z.size() != 0 && proc.z.size() != proc.locations.rows()) {
      throw InputError(who + ": observation count differs from location count");
    }
    if (!proc.locations.allFinite() || !proc.covariates.allFinite() || !proc.z.allFinite()) {
      throw InputError(who + ": non-finite value");
    }
  }
}

MultivariateDataset MultivariateDataset::at_locations(std::vector<PointSet> locations) {
  MultivariateDataset ds;
  for (auto& loc : locations) {
    ProcessData proc;
    proc.covariates = Eigen::MatrixXd::Ones(loc.rows(), 1);
    proc.locations = std::move(loc);
    ds.processes.push_back(std::move(proc));
  }
  return ds;
}

ModelSpec ModelSpec::stationary(ParsimoniousMaternParams params, int q) {
  ModelSpec spec;
  spec.warps = warp::ProcessWarpSet::with_shared({}, params.p);
  spec.params = std::move(params);
  spec.q = q;
  return spec;
}

Eigen::MatrixXd build_design(const MultivariateDataset& ds) {
  const int p = ds.p();
  const int q = ds.q();
  Eigen::MatrixXd x = Eigen::MatrixXd::Zero(ds.size(), static_cast<Eigen::Index>(p) * q);
  Eigen::Index row = 0;
  for (int i = 0; i < p; ++i) {
    const auto& cov = ds.processes[i].covariates;
    x.block(row, static_cast<Eigen::Index>(i) * q, cov.rows(), q) = cov;
    row += cov.rows();
  }
  return x;
}

void add_noise(Eigen::MatrixXd& sigma, const ParsimoniousMaternParams& params,
               const MultivariateDataset& ds) {
  Eigen::Index row = 0;
  for (int i = 0; i < ds.p(); ++i) {
    const double t2 = params.tau[i] * params.tau[i];
    for (Eigen::Index k = 0; k < ds.count(i); ++k, ++row) sigma(row, row) += t2;
  }
}

Eigen::MatrixXd sigma_Z(const ModelSpec& spec, const MultivariateDataset& ds,
                        covariance::PsdCheck check, covariance::KernelEvaluation eval) {
  const auto locations = ds.locations();
  Eigen::MatrixXd sigma = covariance::assemble_sigma(spec.params, spec.warps, locations, check, eval);
  add_noise(sigma, spec.params, ds);
  return sigma;
}

double Cholesky::log_det() const {
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

Cholesky robust_cholesky(const Eigen::MatrixXd& sigma) {
  Cholesky out;
  out.llt.compute(sigma);
  if (out.llt.info() == Eigen::Success) return out;
  const double mean_diag = sigma.diagonal().mean();
  if (!(mean_diag > 0.0) || !std::isfinite(mean_diag)) {
    throw NotPositiveDefiniteError("covariance matrix has a non-positive diagonal");
  }
  for (double rel = 1e-10; rel <= 1e-6 * (1.0 + 1e-9); rel *= 10.0) {
    Eigen::MatrixXd jittered = sigma;
    jittered.diagonal().array() += rel * mean_diag;
    out.llt.compute(jittered);
    if (out.llt.info() == Eigen::Success) {
      out.jitter = rel * mean_diag;
      return out;
    }
  }
  throw NotPositiveDefiniteError("Cholesky factorization failed even with jitter 1e-6 * mean(diag)");
}

std::vector<Eigen::VectorXd> split_by_process(const Eigen::VectorXd& stacked,
                                              const MultivariateDataset& ds) {
  std::vector<Eigen::VectorXd> out;
  Eigen::Index row = 0;
  for (int i = 0; i < ds.p(); ++i) {
    out.emplace_back(stacked.segment(row, ds.count(i)));
    row += ds.count(i);
  }
  return out;
}

namespace {

Eigen::VectorXd normals(Rng& rng, Eigen::Index n) {
  Eigen::VectorXd w(n);
  for (Eigen::Index k = 0; k < n; ++k) w[k] = rng.normal();
  return w;
}

Eigen::VectorXd trend(const MultivariateDataset& ds, const TrendCoefficients& beta) {
  const Eigen::MatrixXd x = build_design(ds);
  if (beta.beta.size() != x.cols()) {
    throw InvalidParameterError("trend coefficient count must be p * q = " +
                                std::to_string(x.cols()));
  }
  return x * beta.beta;
}

}  // namespace

std::vector<Eigen::VectorXd> simulate(const ModelSpec& spec, const MultivariateDataset& ds,
                                      const TrendCoefficients& beta, std::uint64_t seed) {
  const Eigen::VectorXd mean = trend(ds, beta);
  const Cholesky chol = robust_cholesky(sigma_Z(spec, ds));
  Rng rng(seed);
  const Eigen::VectorXd z = mean + chol.llt.matrixL() * normals(rng, mean.size());
  return split_by_process(z, ds);
}

Simulation simulate_with_truth(const ModelSpec& spec, const MultivariateDataset& ds,
                               const TrendCoefficients& beta, std::uint64_t seed) {
  const Eigen::VectorXd mean = trend(ds, beta);
  const auto locations = ds.locations();
  const Cholesky chol = robust_cholesky(covariance::assemble_sigma(
      spec.params, spec.warps, locations, covariance::PsdCheck::kNone,
      covariance::KernelEvaluation::kAuto));
  Rng rng(seed);
  const Eigen::VectorXd latent = mean + chol.llt.matrixL() * normals(rng, mean.size());
  Eigen::VectorXd observed = latent;
  Eigen::Index row = 0;
  for (int i = 0; i < ds.p(); ++i) {
    for (Eigen::Index k = 0; k < ds.count(i); ++k, ++row) {
      observed[row] += spec.params.tau[i] * rng.normal();
    }
  }
  return {split_by_process(latent, ds), split_by_process(observed, ds)};
}

}  // namespace warpfield
