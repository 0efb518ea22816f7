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

#include <vector>

namespace warpfield::covariance {

/// Modified Bessel function of the second kind, K_nu(x), for real nu and x > 0.
double bessel_k(double nu, double x);

/// Isotropic Matérn correlation
///   M(x) = 2^{1-nu} / Gamma(nu) x^nu K_nu(x),   x = a |h|,
/// with the nu-dependent constants of Temme's series precomputed once so a
/// kernel can be evaluated over many distances cheaply.
///
/// K_nu is computed from K_mu, K_{mu+1} (|mu| <= 1/2) by Temme's series for
/// x < 2 and Steed's continued fraction for x >= 2, followed by upward
/// recurrence in the order.
class MaternKernel {
 public:
  /// nu > 0. Order 0 is accepted only for bessel().
  explicit MaternKernel(double nu);

  double nu() const { return nu_; }

  /// M(x); 1 at x = 0.
  double operator()(double x) const;

  struct ValueSlope {
    double value;
    double slope;  ///< dM/dx; reported as 0 at x = 0
  };
  ValueSlope value_and_slope(double x) const;

  /// K_nu(x) for this kernel's order.
  double bessel(double x) const;

 private:
  struct Orders {
    double k_nu;        // K_nu(x), scaled by e^x when `scaled`
    double k_nu_minus;  // K_{nu-1}(x), same scaling
    bool scaled;
  };
  Orders evaluate(double x) const;

  double nu_;
  double mu_;
  int steps_;
  double gam1_, gam2_, gampl_, gammi_;
  double log_coef_;
};

/// Piecewise quintic Hermite interpolant of a MaternKernel on a uniform grid in
/// log x, for assembling large covariance matrices. Node second derivatives
/// come from the same Bessel pair as the slope, via
///   d²M/du² = 2 nu x M'(x) + x² M(x),   u = log x. Outside [x_min, x_max] it
/// defers to the exact kernel. The slope returned is the derivative of the
/// interpolant itself, so value and slope stay mutually consistent.
class MaternTable {
 public:
  explicit MaternTable(const MaternKernel& kernel, double x_min = 1e-4, double x_max = 50.0,
                       int nodes = 512);

  double operator()(double x) const;
  MaternKernel::ValueSlope value_and_slope(double x) const;
  const MaternKernel& kernel() const { return kernel_; }

 private:
  MaternKernel kernel_;
  double u_min_, u_max_, du_, inv_du_;
  std::vector<double> value_;
  std::vector<double> deriv_;   // dM/du
  std::vector<double> curve_;   // d²M/du²
};

double matern_corr(double h_norm, double nu, double a);

}  // namespace warpfield::covariance
