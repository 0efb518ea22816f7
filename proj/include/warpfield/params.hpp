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

#include <set>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "warpfield/model.hpp"

namespace warpfield {

/// Maps a ModelSpec to the flat vector of unconstrained optimizer coordinates
/// and back. Positive parameters (ν, a, σ, τ) go through log, cross-
/// correlations through ρ_ij = B_ij(ν) tanh(η_ij), warp units through their own
/// transforms. Parameters named in `fixed` keep their template values: natural
/// names are nu_i, scale, sigma_i, rho_i_j, tau_i (1-based), warp groups are
/// "shared" and "align_i" (i >= 2).
class ParamLayout {
 public:
  explicit ParamLayout(ModelSpec base, std::set<std::string> fixed = {}, int dim = 2);

  std::size_t size() const { return names_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  const ModelSpec& base() const { return base_; }
  int dim() const { return dim_; }
  const std::set<std::string>& fixed() const { return fixed_; }

  Eigen::VectorXd pack(const ModelSpec& spec) const;
  ModelSpec unpack(const Eigen::VectorXd& theta) const;

  /// Coordinate index of a natural parameter, -1 when fixed.
  int nu_index(int i) const { return nu_[i]; }
  int scale_index() const { return scale_; }
  int sigma_index(int i) const { return sigma_[i]; }
  int rho_index(int i, int j) const;
  int tau_index(int i) const { return tau_[i]; }
  /// First coordinate of the shared warp / aligner i, -1 when fixed or empty.
  int shared_offset() const { return shared_; }
  int aligner_offset(int i) const { return aligner_[i]; }

  /// [offset, count) ranges of all free warp coordinates.
  std::vector<std::pair<int, int>> warp_segments() const;
  bool has_free_warps() const { return !warp_segments().empty(); }

  /// Same base with every warp group added to the fixed set.
  ParamLayout with_warps_fixed() const;

 private:
  int add(const std::string& name);

  ModelSpec base_;
  std::set<std::string> fixed_;
  int dim_;
  std::vector<std::string> names_;
  std::vector<int> nu_, sigma_, tau_, aligner_;
  Eigen::MatrixXi rho_;
  int scale_ = -1;
  int shared_ = -1;
};

/// Identifiable natural-scale quantities (nu_i, scale, sigma_i, rho_i_j, tau_i).
std::vector<std::pair<std::string, double>> natural_parameters(const ParsimoniousMaternParams& params);

std::string nu_name(int i);
std::string sigma_name(int i);
std::string rho_name(int i, int j);
std::string tau_name(int i);
std::string aligner_name(int i);

}  // namespace warpfield
