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

#include <complex>
#include <cstddef>
#include <span>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Dense>

namespace warpfield {

/// A point in the d-dimensional geographic (or warped) domain.
using Location = Eigen::VectorXd;

/// A set of points stored one per row (n × d).
using PointSet = Eigen::MatrixXd;

namespace warp {

inline constexpr double kDetEpsilon = 1e-8;
inline constexpr double kAreaEpsilon = 1e-10;
inline constexpr double kFdStep = 1e-5;
inline constexpr double kPoleEpsilon = 1e-12;

struct Identity {};

/// Monotone warp of one coordinate:
///   s_axis -> w_1 s_axis + sum_k w_{k+1} / (1 + exp(-steepness_k (s_axis - center_k))).
/// `weights` has one more entry than `steepness` and `centers`.
struct AxialWarp {
  int axis = 0;
  std::vector<double> weights{1.0};
  std::vector<double> steepness;
  std::vector<double> centers;
};

/// s -> s + weight * exp(-precision |s - center|^2) (s - center).
struct RadialBasis {
  double weight = 0.0;
  Location center;
  double precision = 1.0;
};

/// (a z + b) / (c z + d) acting on z = s_1 + i s_2. Two-dimensional only.
struct Mobius {
  std::complex<double> a{1.0, 0.0};
  std::complex<double> b{0.0, 0.0};
  std::complex<double> c{0.0, 0.0};
  std::complex<double> d{1.0, 0.0};
};

/// s -> matrix * s + shift.
struct Affine {
  Eigen::MatrixXd matrix;
  Eigen::VectorXd shift;
};

using WarpUnit = std::variant<Identity, AxialWarp, RadialBasis, Mobius, Affine>;

/// Composition of warping units; layers.front() is applied first.
struct WarpFunction {
  std::vector<WarpUnit> layers;
};

/// A shared warping function and one aligning function per process. The full
/// warp for process i is shared ∘ aligners[i]; aligners[0] must be the
/// identity so the first process fixes the common frame.
struct ProcessWarpSet {
  WarpFunction shared;
  std::vector<WarpFunction> aligners;

  /// Identity aligners for `process_count` processes around `shared`.
  static ProcessWarpSet with_shared(WarpFunction shared, int process_count);
  int process_count() const { return static_cast<int>(aligners.size()); }
};

// -- construction helpers ---------------------------------------------------

/// Axial unit with `basis` functions (identity plus basis-1 sigmoids) whose
/// centers are equally spaced over [lo, hi]. Starts at the identity map with
/// small positive sigmoid weights.
AxialWarp make_axial(int axis, int basis, double lo, double hi, double steepness,
                     double initial_sigmoid_weight = 1e-3);

/// resolution × resolution radial basis units at cell centers of the box.
std::vector<WarpUnit> make_radial_grid(int resolution, const Location& lo, const Location& hi,
                                       double precision);

Affine make_translation(const Location& shift);
Affine make_identity_affine(int dim);

// -- evaluation ---------------------------------------------------------------

Location apply_unit(const WarpUnit& unit, const Location& s);
Location apply_warp(const WarpFunction& f, const Location& s);

/// f ∘ g_i(s) with a zero-based process index.
Location warp_for_process(const ProcessWarpSet& warps, int process, const Location& s);

/// Intermediate inputs of every layer, recorded for backpropagation.
struct WarpTape {
  std::vector<PointSet> inputs;
};

PointSet warp_points(const WarpFunction& f, const PointSet& points, WarpTape* tape = nullptr);
PointSet warp_points_for_process(const ProcessWarpSet& warps, int process, const PointSet& points);

/// Throws InvalidParameterError when a unit violates its invariants.
void validate_unit(const WarpUnit& unit, int dim);
void validate(const ProcessWarpSet& warps, int dim);

/// Open interval of radial-basis weights for which the unit is injective for
/// every precision: 1 + w (1 - 2t) e^{-t} > 0 and 1 + w e^{-t} > 0 for t >= 0.
std::pair<double, double> radial_weight_interval();

struct InjectivityReport {
  bool injective = true;
  double min_abs_det = 0.0;
  Location worst_point;
  std::string diagnostic;
};

/// Sign consistency of the central-difference Jacobian determinant over probes.
InjectivityReport check_injective(const WarpFunction& f, const PointSet& probes,
                                  double step = kFdStep);

// -- unconstrained parameterization --------------------------------------------
//
// Optimizers work on unconstrained coordinates. Axial weights go through exp
// (strictly positive), radial weights through a logistic squash onto
// radial_weight_interval(), Möbius and affine entries are unconstrained.
// Axial centers/steepness and radial centers/precisions are structural and
// not part of the free coordinates.

std::size_t free_parameter_count(const WarpUnit& unit);
std::size_t free_parameter_count(const WarpFunction& f);
void pack_unit(const WarpUnit& unit, std::span<double> out);
void unpack_unit(WarpUnit& unit, std::span<const double> in);
std::vector<std::string> parameter_labels(const WarpUnit& unit);

/// Given dL/d(output) per point, returns dL/d(input) and accumulates dL/dθ
/// (unconstrained coordinates, layer order) into grad_params.
PointSet backpropagate(const WarpFunction& f, const WarpTape& tape, const PointSet& grad_out,
                       std::span<double> grad_params);

/// Number of basis functions evaluated per point (the r_l of a layer).
std::size_t basis_count(const WarpUnit& unit);

// -- homogenization -------------------------------------------------------------

/// Row indices into a reference location list.
struct HomogenizationAnchors {
  std::size_t k = 0;
  std::size_t l = 1;
  std::size_t m = 2;
};

/// b3 ∘ b2 ∘ b1: shift/scale, rotate, reflect.
struct HomogenizedFrame {
  Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  double scale = 1.0;  ///< |f(s_l) - f(s_k)|, multiplies scale parameters
  double angle = 0.0;
  double reflection = 1.0;

  Eigen::Vector2d apply(const Eigen::Vector2d& s) const;
  PointSet apply(const PointSet& points) const;
};

struct Homogenized {
  PointSet points;
  HomogenizedFrame frame;
};

Homogenized homogenize(const PointSet& warped, const HomogenizationAnchors& anchors);

/// The two locations farthest apart, then the one spanning the largest
/// triangle with them.
HomogenizationAnchors default_anchors(const PointSet& locations);

}  // namespace warp
}  // namespace warpfield
