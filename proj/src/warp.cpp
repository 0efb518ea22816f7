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

#include "warpfield/warp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "warpfield/errors.hpp"

namespace warpfield::warp {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
Overloaded(Ts...) -> Overloaded<Ts...>;

double logistic(double t) { return 1.0 / (1.0 + std::exp(-t)); }

std::complex<double> to_complex(const Location& s) {
  if (s.size() != 2) {
    throw UnsupportedDimensionError("Möbius units require d = 2, got d = " +
                                    std::to_string(s.size()));
  }
  return {s[0], s[1]};
}

std::complex<double> mobius_denominator(const Mobius& u, std::complex<double> z) {
  std::complex<double> den = u.c * z + u.d;
  if (std::abs(den) < kPoleEpsilon) {
    throw DomainError("Möbius unit evaluated at its pole");
  }
  return den;
}

Location apply_axial(const AxialWarp& u, const Location& s) {
  if (u.axis < 0 || u.axis >= s.size()) {
    throw UnsupportedDimensionError("axial warp axis out of range");
  }
  Location out = s;
  const double x = s[u.axis];
  double y = u.weights[0] * x;
  for (std::size_t k = 0; k < u.steepness.size(); ++k) {
    y += u.weights[k + 1] * logistic(u.steepness[k] * (x - u.centers[k]));
  }
  out[u.axis] = y;
  return out;
}

Location apply_radial(const RadialBasis& u, const Location& s) {
  Location diff = s - u.center;
  double e = std::exp(-u.precision * diff.squaredNorm());
  return s + u.weight * e * diff;
}

Location apply_mobius(const Mobius& u, const Location& s) {
  std::complex<double> z = to_complex(s);
  std::complex<double> w = (u.a * z + u.b) / mobius_denominator(u, z);
  Location out(2);
  out << w.real(), w.imag();
  return out;
}

Location apply_affine(const Affine& u, const Location& s) {
  if (u.matrix.cols() != s.size()) {
    throw UnsupportedDimensionError("affine unit dimension mismatch");
  }
  return u.matrix * s + u.shift;
}

}  // namespace

ProcessWarpSet ProcessWarpSet::with_shared(WarpFunction shared, int process_count) {
  ProcessWarpSet set;
  set.shared = std::move(shared);
  set.aligners.assign(static_cast<std::size_t>(process_count), WarpFunction{});
  return set;
}

AxialWarp make_axial(int axis, int basis, double lo, double hi, double steepness,
                     double initial_sigmoid_weight) {
  if (basis < 1) throw InputError("axial warp needs at least one basis function");
  AxialWarp u;
  u.axis = axis;
  const int sigmoids = basis - 1;
  u.weights.assign(static_cast<std::size_t>(basis), initial_sigmoid_weight);
  u.weights[0] = 1.0;
  for (int k = 0; k < sigmoids; ++k) {
    double t = sigmoids == 1 ? 0.5 : static_cast<double>(k) / (sigmoids - 1);
    u.centers.push_back(lo + t * (hi - lo));
    u.steepness.push_back(steepness);
  }
  return u;
}

std::vector<WarpUnit> make_radial_grid(int resolution, const Location& lo, const Location& hi,
                                       double precision) {
  if (lo.size() != 2 || hi.size() != 2) {
    throw UnsupportedDimensionError("radial grids are laid out in d = 2");
  }
  std::vector<WarpUnit> units;
  for (int i = 0; i < resolution; ++i) {
    for (int j = 0; j < resolution; ++j) {
      RadialBasis u;
      u.center = Location(2);
      u.center[0] = lo[0] + (i + 0.5) * (hi[0] - lo[0]) / resolution;
      u.center[1] = lo[1] + (j + 0.5) * (hi[1] - lo[1]) / resolution;
      u.precision = precision;
      units.emplace_back(std::move(u));
    }
  }
  return units;
}

Affine make_translation(const Location& shift) {
  Affine a;
  a.matrix = Eigen::MatrixXd::Identity(shift.size(), shift.size());
  a.shift = shift;
  return a;
}

Affine make_identity_affine(int dim) { return make_translation(Location::Zero(dim)); }

Location apply_unit(const WarpUnit& unit, const Location& s) {
  return std::visit(Overloaded{
                        [&](const Identity&) -> Location { return s; },
                        [&](const AxialWarp& u) { return apply_axial(u, s); },
                        [&](const RadialBasis& u) { return apply_radial(u, s); },
                        [&](const Mobius& u) { return apply_mobius(u, s); },
                        [&](const Affine& u) { return apply_affine(u, s); },
                    },
                    unit);
}

Location apply_warp(const WarpFunction& f, const Location& s) {
  Location x = s;
  for (const auto& layer : f.layers) x = apply_unit(layer, x);
  return x;
}

Location warp_for_process(const ProcessWarpSet& warps, int process, const Location& s) {
  if (process < 0 || process >= warps.process_count()) {
    throw std::out_of_range("process index out of range");
  }
  return apply_warp(warps.shared, apply_warp(warps.aligners[process], s));
}

PointSet warp_points(const WarpFunction& f, const PointSet& points, WarpTape* tape) {
  PointSet x = points;
  if (tape) tape->inputs.clear();
  for (const auto& layer : f.layers) {
    if (tape) tape->inputs.push_back(x);
    if (std::holds_alternative<Identity>(layer)) continue;
    PointSet y(x.rows(), x.cols());
    for (Eigen::Index r = 0; r < x.rows(); ++r) {
      Location row = x.row(r).transpose();
      y.row(r) = apply_unit(layer, row).transpose();
    }
    x = std::move(y);
  }
  return x;
}

PointSet warp_points_for_process(const ProcessWarpSet& warps, int process, const PointSet& points) {
  if (process < 0 || process >= warps.process_count()) {
    throw std::out_of_range("process index out of range");
  }
  return warp_points(warps.shared, warp_points(warps.aligners[process], points));
}

std::pair<double, double> radial_weight_interval() {
  // min_t (1 - 2t) e^{-t} = -2 e^{-3/2} at t = 3/2.
  return {-1.0, 0.5 * std::exp(1.5)};
}

void validate_unit(const WarpUnit& unit, int dim) {
  std::visit(Overloaded{
                 [](const Identity&) {},
                 [&](const AxialWarp& u) {
                   if (u.axis < 0 || u.axis >= dim) throw InvalidParameterError("axial axis out of range");
                   if (u.weights.size() != u.steepness.size() + 1 ||
                       u.centers.size() != u.steepness.size()) {
                     throw InvalidParameterError("axial warp: weights/steepness/centers size mismatch");
                   }
                   if (!(u.weights[0] > 0.0)) throw InvalidParameterError("axial warp: w_1 must be > 0");
                   for (std::size_t k = 1; k < u.weights.size(); ++k) {
                     if (!(u.weights[k] >= 0.0)) throw InvalidParameterError("axial warp: w_k must be >= 0");
                   }
                   for (double s : u.steepness) {
                     if (!(s > 0.0)) throw InvalidParameterError("axial warp: steepness must be > 0");
                   }
                 },
                 [&](const RadialBasis& u) {
                   auto [lo, hi] = radial_weight_interval();
                   if (!(u.weight > lo && u.weight < hi)) {
                     throw InvalidParameterError("radial basis weight outside the injective interval");
                   }
                   if (!(u.precision > 0.0)) throw InvalidParameterError("radial basis precision must be > 0");
                   if (u.center.size() != dim) throw InvalidParameterError("radial basis center dimension");
                 },
                 [&](const Mobius& u) {
                   if (dim != 2) throw UnsupportedDimensionError("Möbius units require d = 2");
                   if (std::abs(u.a * u.d - u.b * u.c) < kDetEpsilon) {
                     throw InvalidParameterError("degenerate Möbius transformation");
                   }
                 },
                 [&](const Affine& u) {
                   if (u.matrix.rows() != dim || u.matrix.cols() != dim || u.shift.size() != dim) {
                     throw InvalidParameterError("affine unit dimension mismatch");
                   }
                   if (std::abs(u.matrix.determinant()) < kDetEpsilon) {
                     throw InvalidParameterError("singular affine matrix");
                   }
                 },
             },
             unit);
}

void validate(const ProcessWarpSet& warps, int dim) {
  if (warps.aligners.empty()) throw InvalidParameterError("warp set has no processes");
  if (!warps.aligners[0].layers.empty()) {
    for (const auto& layer : warps.aligners[0].layers) {
      if (!std::holds_alternative<Identity>(layer)) {
        throw InvalidParameterError("the first process aligner must be the identity");
      }
    }
  }
  for (const auto& layer : warps.shared.layers) validate_unit(layer, dim);
  for (const auto& g : warps.aligners) {
    for (const auto& layer : g.layers) validate_unit(layer, dim);
  }
}

InjectivityReport check_injective(const WarpFunction& f, const PointSet& probes, double step) {
  InjectivityReport report;
  const Eigen::Index dim = probes.cols();
  std::vector<double> dets;
  dets.reserve(static_cast<std::size_t>(probes.rows()));
  for (Eigen::Index r = 0; r < probes.rows(); ++r) {
    Location s = probes.row(r).transpose();
    Eigen::MatrixXd jac(dim, dim);
    try {
      for (Eigen::Index c = 0; c < dim; ++c) {
        Location up = s, down = s;
        up[c] += step;
        down[c] -= step;
        jac.col(c) = (apply_warp(f, up) - apply_warp(f, down)) / (2.0 * step);
      }
    } catch (const DomainError& e) {
      report.injective = false;
      report.worst_point = s;
      report.diagnostic = std::string("evaluation failed: ") + e.what();
      return report;
    }
    dets.push_back(jac.determinant());
  }
  if (dets.empty()) return report;

  std::size_t positive = 0;
  for (double d : dets) positive += d > 0.0 ? 1 : 0;
  const double sign = positive * 2 >= dets.size() ? 1.0 : -1.0;
  std::size_t worst = 0;
  double worst_signed = std::numeric_limits<double>::infinity();
  report.min_abs_det = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < dets.size(); ++i) {
    report.min_abs_det = std::min(report.min_abs_det, std::abs(dets[i]));
    if (sign * dets[i] < worst_signed) {
      worst_signed = sign * dets[i];
      worst = i;
    }
  }
  report.worst_point = probes.row(static_cast<Eigen::Index>(worst)).transpose();
  report.injective = worst_signed > 0.0;
  std::ostringstream msg;
  msg << (report.injective ? "consistent" : "inconsistent") << " Jacobian sign; worst det "
      << sign * worst_signed << " at probe " << worst;
  report.diagnostic = msg.str();
  return report;
}

// -- parameterization -------------------------------------------------------------

std::size_t free_parameter_count(const WarpUnit& unit) {
  return std::visit(Overloaded{
                        [](const Identity&) -> std::size_t { return 0; },
                        [](const AxialWarp& u) { return u.weights.size(); },
                        [](const RadialBasis&) -> std::size_t { return 1; },
                        [](const Mobius&) -> std::size_t { return 8; },
                        [](const Affine& u) {
                          return static_cast<std::size_t>(u.matrix.size() + u.shift.size());
                        },
                    },
                    unit);
}

std::size_t free_parameter_count(const WarpFunction& f) {
  std::size_t n = 0;
  for (const auto& layer : f.layers) n += free_parameter_count(layer);
  return n;
}

std::size_t basis_count(const WarpUnit& unit) {
  return std::visit(Overloaded{
                        [](const Identity&) -> std::size_t { return 0; },
                        [](const AxialWarp& u) { return u.weights.size(); },
                        [](const RadialBasis&) -> std::size_t { return 1; },
                        [](const Mobius&) -> std::size_t { return 1; },
                        [](const Affine&) -> std::size_t { return 1; },
                    },
                    unit);
}

void pack_unit(const WarpUnit& unit, std::span<double> out) {
  std::visit(Overloaded{
                 [](const Identity&) {},
                 [&](const AxialWarp& u) {
                   for (std::size_t k = 0; k < u.weights.size(); ++k) {
                     if (!(u.weights[k] > 0.0)) {
                       throw InvalidParameterError("axial weights must be > 0 to be packed");
                     }
                     out[k] = std::log(u.weights[k]);
                   }
                 },
                 [&](const RadialBasis& u) {
                   auto [lo, hi] = radial_weight_interval();
                   double t = (u.weight - lo) / (hi - lo);
                   if (!(t > 0.0 && t < 1.0)) {
                     throw InvalidParameterError("radial weight outside the injective interval");
                   }
                   out[0] = std::log(t / (1.0 - t));
                 },
                 [&](const Mobius& u) {
                   const std::complex<double> coef[] = {u.a, u.b, u.c, u.d};
                   for (int k = 0; k < 4; ++k) {
                     out[2 * k] = coef[k].real();
                     out[2 * k + 1] = coef[k].imag();
                   }
                 },
                 [&](const Affine& u) {
                   std::size_t i = 0;
                   for (Eigen::Index r = 0; r < u.matrix.rows(); ++r) {
                     for (Eigen::Index c = 0; c < u.matrix.cols(); ++c) out[i++] = u.matrix(r, c);
                   }
                   for (Eigen::Index r = 0; r < u.shift.size(); ++r) out[i++] = u.shift[r];
                 },
             },
             unit);
}

void unpack_unit(WarpUnit& unit, std::span<const double> in) {
  std::visit(Overloaded{
                 [](Identity&) {},
                 [&](AxialWarp& u) {
                   for (std::size_t k = 0; k < u.weights.size(); ++k) u.weights[k] = std::exp(in[k]);
                 },
                 [&](RadialBasis& u) {
                   auto [lo, hi] = radial_weight_interval();
                   u.weight = lo + (hi - lo) * logistic(in[0]);
                 },
                 [&](Mobius& u) {
                   u.a = {in[0], in[1]};
                   u.b = {in[2], in[3]};
                   u.c = {in[4], in[5]};
                   u.d = {in[6], in[7]};
                 },
                 [&](Affine& u) {
                   std::size_t i = 0;
                   for (Eigen::Index r = 0; r < u.matrix.rows(); ++r) {
                     for (Eigen::Index c = 0; c < u.matrix.cols(); ++c) u.matrix(r, c) = in[i++];
                   }
                   for (Eigen::Index r = 0; r < u.shift.size(); ++r) u.shift[r] = in[i++];
                 },
             },
             unit);
}

std::vector<std::string> parameter_labels(const WarpUnit& unit) {
  std::vector<std::string> labels;
  std::visit(Overloaded{
                 [](const Identity&) {},
                 [&](const AxialWarp& u) {
                   for (std::size_t k = 0; k < u.weights.size(); ++k) {
                     labels.push_back("axial" + std::to_string(u.axis) + ".w" + std::to_string(k + 1));
                   }
                 },
                 [&](const RadialBasis&) { labels.push_back("rbf.w"); },
                 [&](const Mobius&) {
                   for (const char* c : {"a", "b", "c", "d"}) {
                     labels.push_back(std::string("mobius.") + c + ".re");
                     labels.push_back(std::string("mobius.") + c + ".im");
                   }
                 },
                 [&](const Affine& u) {
                   for (Eigen::Index r = 0; r < u.matrix.rows(); ++r) {
                     for (Eigen::Index c = 0; c < u.matrix.cols(); ++c) {
                       labels.push_back("affine.A" + std::to_string(r + 1) + std::to_string(c + 1));
                     }
                   }
                   for (Eigen::Index r = 0; r < u.shift.size(); ++r) {
                     labels.push_back("affine.d" + std::to_string(r + 1));
                   }
                 },
             },
             unit);
  return labels;
}

PointSet backpropagate(const WarpFunction& f, const WarpTape& tape, const PointSet& grad_out,
                       std::span<double> grad_params) {
  std::vector<std::size_t> offsets(f.layers.size() + 1, 0);
  for (std::size_t l = 0; l < f.layers.size(); ++l) {
    offsets[l + 1] = offsets[l] + free_parameter_count(f.layers[l]);
  }
  PointSet g = grad_out;
  for (std::size_t li = f.layers.size(); li-- > 0;) {
    const PointSet& x = tape.inputs[li];
    std::span<double> gp = grad_params.subspan(offsets[li], offsets[li + 1] - offsets[li]);
    std::visit(
        Overloaded{
            [](const Identity&) {},
            [&](const AxialWarp& u) {
              const int ax = u.axis;
              for (Eigen::Index r = 0; r < x.rows(); ++r) {
                const double xv = x(r, ax);
                const double go = g(r, ax);
                double slope = u.weights[0];
                gp[0] += go * u.weights[0] * xv;
                for (std::size_t k = 0; k < u.steepness.size(); ++k) {
                  double sg = logistic(u.steepness[k] * (xv - u.centers[k]));
                  slope += u.weights[k + 1] * u.steepness[k] * sg * (1.0 - sg);
                  gp[k + 1] += go * u.weights[k + 1] * sg;
                }
                g(r, ax) = go * slope;
              }
            },
            [&](const RadialBasis& u) {
              auto [lo, hi] = radial_weight_interval();
              const double t = (u.weight - lo) / (hi - lo);
              const double dw_du = (hi - lo) * t * (1.0 - t);
              for (Eigen::Index r = 0; r < x.rows(); ++r) {
                Eigen::VectorXd diff = x.row(r).transpose() - u.center;
                Eigen::VectorXd go = g.row(r).transpose();
                const double e = std::exp(-u.precision * diff.squaredNorm());
                const double proj = diff.dot(go);
                gp[0] += e * proj * dw_du;
                g.row(r) = ((1.0 + u.weight * e) * go -
                            2.0 * u.precision * u.weight * e * proj * diff)
                               .transpose();
              }
            },
            [&](const Mobius& u) {
              for (Eigen::Index r = 0; r < x.rows(); ++r) {
                std::complex<double> z(x(r, 0), x(r, 1));
                std::complex<double> go(g(r, 0), g(r, 1));
                std::complex<double> den = mobius_denominator(u, z);
                std::complex<double> phi = (u.a * z + u.b) / den;
                const std::complex<double> partial[] = {z / den, 1.0 / den, -z * phi / den,
                                                        -phi / den};
                for (int k = 0; k < 4; ++k) {
                  std::complex<double> v = std::conj(go) * partial[k];
                  gp[2 * k] += v.real();
                  gp[2 * k + 1] -= v.imag();
                }
                std::complex<double> deriv = (u.a * u.d - u.b * u.c) / (den * den);
                std::complex<double> gi = std::conj(deriv) * go;
                g(r, 0) = gi.real();
                g(r, 1) = gi.imag();
              }
            },
            [&](const Affine& u) {
              const Eigen::Index dim = u.matrix.rows();
              for (Eigen::Index r = 0; r < x.rows(); ++r) {
                std::size_t i = 0;
                for (Eigen::Index a = 0; a < dim; ++a) {
                  for (Eigen::Index b = 0; b < dim; ++b) gp[i++] += g(r, a) * x(r, b);
                }
                for (Eigen::Index a = 0; a < dim; ++a) gp[i++] += g(r, a);
              }
              g = (g * u.matrix).eval();
            },
        },
        f.layers[li]);
  }
  return g;
}

// -- homogenization -------------------------------------------------------------------

Eigen::Vector2d HomogenizedFrame::apply(const Eigen::Vector2d& s) const {
  Eigen::Vector2d b1 = (s - origin) / scale;
  const double c = std::cos(angle), sn = std::sin(angle);
  Eigen::Vector2d b2(c * b1[0] + sn * b1[1], -sn * b1[0] + c * b1[1]);
  return {b2[0], reflection * b2[1]};
}

PointSet HomogenizedFrame::apply(const PointSet& points) const {
  if (points.cols() != 2) throw UnsupportedDimensionError("homogenization is defined for d = 2");
  PointSet out(points.rows(), 2);
  for (Eigen::Index r = 0; r < points.rows(); ++r) {
    out.row(r) = apply(Eigen::Vector2d(points(r, 0), points(r, 1))).transpose();
  }
  return out;
}

Homogenized homogenize(const PointSet& warped, const HomogenizationAnchors& anchors) {
  if (warped.cols() != 2) throw UnsupportedDimensionError("homogenization is defined for d = 2");
  const auto n = static_cast<std::size_t>(warped.rows());
  if (anchors.k >= n || anchors.l >= n || anchors.m >= n) {
    throw AnchorDegeneracyError("anchor index out of range");
  }
  Eigen::Vector2d sk = warped.row(anchors.k).transpose();
  Eigen::Vector2d sl = warped.row(anchors.l).transpose();
  Eigen::Vector2d sm = warped.row(anchors.m).transpose();
  Eigen::Vector2d e1 = sl - sk, e2 = sm - sk;
  const double area = 0.5 * std::abs(e1[0] * e2[1] - e1[1] * e2[0]);
  if (!(area > kAreaEpsilon)) {
    throw AnchorDegeneracyError("warped anchors are colinear or coincident");
  }
  Homogenized h;
  h.frame.origin = sk;
  h.frame.scale = e1.norm();
  Eigen::Vector2d b1l = e1 / h.frame.scale;
  h.frame.angle = std::atan2(b1l[1], b1l[0]);
  h.frame.reflection = 1.0;
  Eigen::Vector2d bm = h.frame.apply(sm);
  h.frame.reflection = bm[1] < 0.0 ? -1.0 : 1.0;
  h.points = h.frame.apply(warped);
  return h;
}

HomogenizationAnchors default_anchors(const PointSet& locations) {
  const Eigen::Index n = locations.rows();
  if (n < 3) throw AnchorDegeneracyError("need at least three locations for anchors");
  HomogenizationAnchors a;
  double best = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = i + 1; j < n; ++j) {
      double d = (locations.row(i) - locations.row(j)).squaredNorm();
      if (d > best) {
        best = d;
        a.k = static_cast<std::size_t>(i);
        a.l = static_cast<std::size_t>(j);
      }
    }
  }
  Eigen::RowVectorXd base = locations.row(a.l) - locations.row(a.k);
  double best_area = -1.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::RowVectorXd v = locations.row(i) - locations.row(a.k);
    // Gram determinant generalizes the 2-d cross product.
    double area2 = base.squaredNorm() * v.squaredNorm() - std::pow(base.dot(v), 2);
    if (area2 > best_area) {
      best_area = area2;
      a.m = static_cast<std::size_t>(i);
    }
  }
  return a;
}

}  // namespace warpfield::warp
