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

#include "warpfield/params.hpp"

#include <algorithm>
#include <cmath>

#include "warpfield/errors.hpp"

namespace warpfield {

std::string nu_name(int i) { return "nu_" + std::to_string(i + 1); }
std::string sigma_name(int i) { return "sigma_" + std::to_string(i + 1); }
std::string rho_name(int i, int j) {
  return "rho_" + std::to_string(i + 1) + "_" + std::to_string(j + 1);
}
std::string tau_name(int i) { return "tau_" + std::to_string(i + 1); }
std::string aligner_name(int i) { return "align_" + std::to_string(i + 1); }

ParamLayout::ParamLayout(ModelSpec base, std::set<std::string> fixed, int dim)
    : base_(std::move(base)), fixed_(std::move(fixed)), dim_(dim) {
  const int p = base_.params.p;
  if (base_.warps.process_count() != p) {
    throw InvalidParameterError("warp set and covariance parameters disagree on process count");
  }
  nu_.assign(p, -1);
  sigma_.assign(p, -1);
  tau_.assign(p, -1);
  aligner_.assign(p, -1);
  rho_ = Eigen::MatrixXi::Constant(p, p, -1);

  for (int i = 0; i < p; ++i) nu_[i] = add(nu_name(i));
  scale_ = add("scale");
  for (int i = 0; i < p; ++i) sigma_[i] = add(sigma_name(i));
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) rho_(i, j) = rho_(j, i) = add(rho_name(i, j));
  }
  for (int i = 0; i < p; ++i) tau_[i] = add(tau_name(i));

  auto add_warp = [&](const warp::WarpFunction& f, const std::string& group) {
    if (fixed_.count(group) || warp::free_parameter_count(f) == 0) return -1;
    const int offset = static_cast<int>(names_.size());
    for (std::size_t l = 0; l < f.layers.size(); ++l) {
      for (const auto& label : warp::parameter_labels(f.layers[l])) {
        names_.push_back(group + "." + std::to_string(l + 1) + "." + label);
      }
    }
    return offset;
  };
  shared_ = add_warp(base_.warps.shared, "shared");
  for (int i = 1; i < p; ++i) aligner_[i] = add_warp(base_.warps.aligners[i], aligner_name(i));

  std::set<std::string> known{"scale", "shared"};
  for (int i = 0; i < p; ++i) {
    known.insert({nu_name(i), sigma_name(i), tau_name(i)});
    if (i > 0) known.insert(aligner_name(i));
    for (int j = i + 1; j < p; ++j) known.insert(rho_name(i, j));
  }
  for (const auto& name : fixed_) {
    if (!known.count(name)) throw InputError("cannot fix unknown parameter '" + name + "'");
  }
}

int ParamLayout::add(const std::string& name) {
  if (fixed_.count(name)) return -1;
  names_.push_back(name);
  return static_cast<int>(names_.size()) - 1;
}

int ParamLayout::rho_index(int i, int j) const { return i == j ? -1 : rho_(i, j); }

std::vector<std::pair<int, int>> ParamLayout::warp_segments() const {
  std::vector<std::pair<int, int>> out;
  if (shared_ >= 0) {
    out.emplace_back(shared_, static_cast<int>(warp::free_parameter_count(base_.warps.shared)));
  }
  for (int i = 1; i < base_.params.p; ++i) {
    if (aligner_[i] >= 0) {
      out.emplace_back(aligner_[i],
                       static_cast<int>(warp::free_parameter_count(base_.warps.aligners[i])));
    }
  }
  return out;
}

ParamLayout ParamLayout::with_warps_fixed() const {
  auto fixed = fixed_;
  fixed.insert("shared");
  for (int i = 1; i < base_.params.p; ++i) fixed.insert(aligner_name(i));
  return ParamLayout(base_, fixed, dim_);
}

namespace {

const double kInsideOne = std::nextafter(1.0, 0.0);

double checked_log(double value, const std::string& name) {
  if (!(value > 0.0)) {
    throw InvalidParameterError(name + " must be positive to be optimized (fix it otherwise)");
  }
  return std::log(value);
}

void pack_warp(const warp::WarpFunction& f, Eigen::VectorXd& theta, int offset) {
  if (offset < 0) return;
  for (const auto& layer : f.layers) {
    const auto n = warp::free_parameter_count(layer);
    warp::pack_unit(layer, std::span<double>(theta.data() + offset, n));
    offset += static_cast<int>(n);
  }
}

void unpack_warp(warp::WarpFunction& f, const Eigen::VectorXd& theta, int offset) {
  if (offset < 0) return;
  for (auto& layer : f.layers) {
    const auto n = warp::free_parameter_count(layer);
    warp::unpack_unit(layer, std::span<const double>(theta.data() + offset, n));
    offset += static_cast<int>(n);
  }
}

}  // namespace

Eigen::VectorXd ParamLayout::pack(const ModelSpec& spec) const {
  const auto& prm = spec.params;
  const int p = prm.p;
  if (p != base_.params.p) throw InvalidParameterError("process count differs from the layout");
  Eigen::VectorXd theta(static_cast<Eigen::Index>(size()));
  for (int i = 0; i < p; ++i) {
    if (nu_[i] >= 0) theta[nu_[i]] = checked_log(prm.nu[i], nu_name(i));
    if (sigma_[i] >= 0) theta[sigma_[i]] = checked_log(prm.sigma[i], sigma_name(i));
    if (tau_[i] >= 0) theta[tau_[i]] = checked_log(prm.tau[i], tau_name(i));
  }
  if (scale_ >= 0) theta[scale_] = checked_log(prm.scale, "scale");
  const Eigen::MatrixXd bound = covariance::rho_bound(prm.nu, dim_);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (rho_(i, j) < 0) continue;
      double r = prm.rho(i, j) / bound(i, j);
      if (!(std::abs(r) < 1.0 + 1e-12)) {
        throw InvalidParameterError(rho_name(i, j) + " is not strictly inside its validity bound");
      }
      // A saturated fit can land on the bound to rounding.
      r = std::clamp(r, -kInsideOne, kInsideOne);
      theta[rho_(i, j)] = std::atanh(r);
    }
  }
  pack_warp(spec.warps.shared, theta, shared_);
  for (int i = 1; i < p; ++i) pack_warp(spec.warps.aligners[i], theta, aligner_[i]);
  return theta;
}

ModelSpec ParamLayout::unpack(const Eigen::VectorXd& theta) const {
  if (theta.size() != static_cast<Eigen::Index>(size())) {
    throw InvalidParameterError("parameter vector has the wrong length");
  }
  ModelSpec spec = base_;
  auto& prm = spec.params;
  const int p = prm.p;
  for (int i = 0; i < p; ++i) {
    if (nu_[i] >= 0) prm.nu[i] = std::exp(theta[nu_[i]]);
    if (sigma_[i] >= 0) prm.sigma[i] = std::exp(theta[sigma_[i]]);
    if (tau_[i] >= 0) prm.tau[i] = std::exp(theta[tau_[i]]);
  }
  if (scale_ >= 0) prm.scale = std::exp(theta[scale_]);
  const Eigen::MatrixXd bound = covariance::rho_bound(prm.nu, dim_);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) {
      if (rho_(i, j) < 0) continue;
      const double t = std::clamp(std::tanh(theta[rho_(i, j)]), -kInsideOne, kInsideOne);
      prm.rho(i, j) = prm.rho(j, i) = bound(i, j) * t;
    }
  }
  unpack_warp(spec.warps.shared, theta, shared_);
  for (int i = 1; i < p; ++i) unpack_warp(spec.warps.aligners[i], theta, aligner_[i]);
  return spec;
}

std::vector<std::pair<std::string, double>> natural_parameters(const ParsimoniousMaternParams& params) {
  std::vector<std::pair<std::string, double>> out;
  const int p = params.p;
  for (int i = 0; i < p; ++i) out.emplace_back(nu_name(i), params.nu[i]);
  out.emplace_back("scale", params.scale);
  for (int i = 0; i < p; ++i) out.emplace_back(sigma_name(i), params.sigma[i]);
  for (int i = 0; i < p; ++i) {
    for (int j = i + 1; j < p; ++j) out.emplace_back(rho_name(i, j), params.rho(i, j));
  }
  for (int i = 0; i < p; ++i) out.emplace_back(tau_name(i), params.tau[i]);
  return out;
}

}  // namespace warpfield
