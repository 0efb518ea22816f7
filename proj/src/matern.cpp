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

#include "warpfield/matern.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <numbers>

#include "warpfield/errors.hpp"

namespace warpfield::covariance {
namespace {

constexpr double kEps = 1e-16;
constexpr double kSeriesLimit = 2.0;
constexpr int kMaxIter = 100000;

// Taylor coefficients of 1/Gamma(z) = sum_k c_k z^k (Abramowitz & Stegun 6.1.34).
constexpr std::array<double, 26> kRecipGamma = {
    1.0000000000000000,  0.5772156649015329,  -0.6558780715202538, -0.0420026350340952,
    0.1665386113822915,  -0.0421977345555443, -0.0096219715278770, 0.0072189432466630,
    -0.0011651675918591, -0.0002152416741149, 0.0001280502823882,  -0.0000201348547807,
    -0.0000012504934821, 0.0000011330272320,  -0.0000002056338417, 0.0000000061160950,
    0.0000000050020075,  -0.0000000011812746, 0.0000000001043427,  0.0000000000077823,
    -0.0000000000036968, 0.0000000000005100,  -0.0000000000000206, -0.0000000000000054,
    0.0000000000000014,  0.0000000000000001};

// gam1 = (1/Gamma(1-mu) - 1/Gamma(1+mu)) / (2 mu), gam2 = (1/Gamma(1-mu) + 1/Gamma(1+mu)) / 2.
// 1/Gamma(1+mu) = sum_k c_k mu^{k-1}, so odd/even coefficients split cleanly.
void temme_gammas(double mu, double& gam1, double& gam2, double& gampl, double& gammi) {
  const double mu2 = mu * mu;
  double even = 0.0, odd = 0.0, pw = 1.0;
  for (std::size_t k = 0; k + 1 < kRecipGamma.size(); k += 2) {
    odd += kRecipGamma[k] * pw;
    even += kRecipGamma[k + 1] * pw;
    pw *= mu2;
  }
  gam1 = -even;
  gam2 = odd;
  gampl = odd + mu * even;  // 1/Gamma(1+mu)
  gammi = odd - mu * even;  // 1/Gamma(1-mu)
}

}  // namespace

MaternKernel::MaternKernel(double nu) : nu_(nu) {
  if (!(nu >= 0.0) || !std::isfinite(nu)) {
    throw InvalidParameterError("Matérn smoothness must be positive and finite");
  }
  steps_ = static_cast<int>(nu + 0.5);
  mu_ = nu - steps_;
  temme_gammas(mu_, gam1_, gam2_, gampl_, gammi_);
  log_coef_ = nu > 0.0 ? (1.0 - nu) * std::numbers::ln2 - std::lgamma(nu) : 0.0;
}

MaternKernel::Orders MaternKernel::evaluate(double x) const {
  const double mu = mu_;
  const double xi = 1.0 / x;
  const double xi2 = 2.0 * xi;
  double kmu, kmu1;
  bool scaled;
  if (x < kSeriesLimit) {
    const double x2 = 0.5 * x;
    const double pimu = std::numbers::pi * mu;
    const double fact = std::abs(pimu) < kEps ? 1.0 : pimu / std::sin(pimu);
    double d = -std::log(x2);
    double e = mu * d;
    const double fact2 = std::abs(e) < kEps ? 1.0 : std::sinh(e) / e;
    double ff = fact * (gam1_ * std::cosh(e) + gam2_ * fact2 * d);
    double sum = ff;
    e = std::exp(e);
    double p = 0.5 * e / gampl_;
    double q = 0.5 / (e * gammi_);
    double c = 1.0;
    d = x2 * x2;
    double sum1 = p;
    for (int i = 1; i <= kMaxIter; ++i) {
      ff = (i * ff + p + q) / (i * static_cast<double>(i) - mu * mu);
      c *= d / i;
      p /= (i - mu);
      q /= (i + mu);
      const double del = c * ff;
      sum += del;
      sum1 += c * (p - i * ff);
      if (std::abs(del) < std::abs(sum) * kEps) break;
    }
    kmu = sum;
    kmu1 = sum1 * xi2;
    scaled = false;
  } else {
    // Steed's algorithm for the continued fraction CF2; values carry a factor e^x.
    double b = 2.0 * (1.0 + x);
    double d = 1.0 / b;
    double h = d, delh = d;
    double q1 = 0.0, q2 = 1.0;
    const double a1 = 0.25 - mu * mu;
    double q = a1, c = a1;
    double a = -a1;
    double s = 1.0 + q * delh;
    for (int i = 1; i <= kMaxIter; ++i) {
      a -= 2 * i;
      c = -a * c / (i + 1.0);
      const double qnew = (q1 - b * q2) / a;
      q1 = q2;
      q2 = qnew;
      q += c * qnew;
      b += 2.0;
      d = 1.0 / (b + a * d);
      delh = (b * d - 1.0) * delh;
      h += delh;
      const double dels = q * delh;
      s += dels;
      if (std::abs(dels / s) < kEps) break;
    }
    h = a1 * h;
    kmu = std::sqrt(std::numbers::pi / (2.0 * x)) / s;
    kmu1 = kmu * (mu + x + 0.5 - h) * xi;
    scaled = true;
  }
  double prev = kmu1 - mu * xi2 * kmu;  // K_{mu-1}
  for (int i = 1; i <= steps_; ++i) {
    const double next = (mu + i) * xi2 * kmu1 + kmu;
    prev = kmu;
    kmu = kmu1;
    kmu1 = next;
  }
  return {kmu, prev, scaled};
}

double MaternKernel::bessel(double x) const {
  if (!(x > 0.0)) throw DomainError("K_nu requires x > 0");
  Orders k = evaluate(x);
  return k.scaled ? k.k_nu * std::exp(-x) : k.k_nu;
}

double MaternKernel::operator()(double x) const { return value_and_slope(x).value; }

MaternKernel::ValueSlope MaternKernel::value_and_slope(double x) const {
  if (!(nu_ > 0.0)) throw InvalidParameterError("Matérn smoothness must be positive");
  if (x <= 0.0) return {1.0, 0.0};
  if (nu_ * -std::log(x) > 600.0) return {1.0, 0.0};
  Orders k = evaluate(x);
  const double log_scale = log_coef_ + nu_ * std::log(x) - (k.scaled ? x : 0.0);
  const double factor = std::exp(log_scale);
  return {factor * k.k_nu, -factor * k.k_nu_minus};
}

MaternTable::MaternTable(const MaternKernel& kernel, double x_min, double x_max, int nodes)
    : kernel_(kernel), u_min_(std::log(x_min)), u_max_(std::log(x_max)) {
  du_ = (u_max_ - u_min_) / (nodes - 1);
  inv_du_ = 1.0 / du_;
  value_.resize(static_cast<std::size_t>(nodes));
  deriv_.resize(static_cast<std::size_t>(nodes));
  curve_.resize(static_cast<std::size_t>(nodes));
  const double two_nu = 2.0 * kernel_.nu();
  for (int i = 0; i < nodes; ++i) {
    const double x = std::exp(u_min_ + i * du_);
    auto vs = kernel_.value_and_slope(x);
    const auto k = static_cast<std::size_t>(i);
    value_[k] = vs.value;
    deriv_[k] = vs.slope * x;
    curve_[k] = two_nu * vs.slope * x + x * x * vs.value;
  }
}

MaternKernel::ValueSlope MaternTable::value_and_slope(double x) const {
  if (x <= 0.0) return {1.0, 0.0};
  const double u = std::log(x);
  if (u < u_min_ || u >= u_max_) return kernel_.value_and_slope(x);
  const double t_full = (u - u_min_) * inv_du_;
  const auto i = static_cast<std::size_t>(t_full);
  const double t = t_full - static_cast<double>(i);
  const double y0 = value_[i], y1 = value_[i + 1];
  const double m0 = deriv_[i] * du_, m1 = deriv_[i + 1] * du_;
  const double h2 = du_ * du_;
  const double k0 = curve_[i] * h2, k1 = curve_[i + 1] * h2;
  const double t2 = t * t, t3 = t2 * t, t4 = t3 * t, t5 = t4 * t;
  const double s = 1.0 - t, s2 = s * s, s3 = s2 * s;
  // Quintic Hermite basis, with its t-derivative alongside.
  const double a0 = 1.0 - 10 * t3 + 15 * t4 - 6 * t5;
  const double a1 = t - 6 * t3 + 8 * t4 - 3 * t5;
  const double a2 = 0.5 * t2 * s3;
  const double b0 = 1.0 - a0;
  const double b1 = -4 * t3 + 7 * t4 - 3 * t5;
  const double b2 = 0.5 * t3 * s2;
  const double da0 = -30 * t2 * s2;
  const double da1 = 1.0 - 18 * t2 + 32 * t3 - 15 * t4;
  const double da2 = t * s2 * (1.0 - 2.5 * t);
  const double db1 = -12 * t2 + 28 * t3 - 15 * t4;
  const double db2 = t2 * s * (1.5 - 2.5 * t);
  const double value = a0 * y0 + a1 * m0 + a2 * k0 + b0 * y1 + b1 * m1 + b2 * k1;
  const double dvalue_dt = da0 * (y0 - y1) + da1 * m0 + da2 * k0 + db1 * m1 + db2 * k1;
  return {value, dvalue_dt * inv_du_ / x};
}

double MaternTable::operator()(double x) const { return value_and_slope(x).value; }

double bessel_k(double nu, double x) { return MaternKernel(std::abs(nu)).bessel(x); }

double matern_corr(double h_norm, double nu, double a) {
  if (!(h_norm >= 0.0) || !(a > 0.0)) throw DomainError("matern_corr: need |h| >= 0 and a > 0");
  return MaternKernel(nu)(a * h_norm);
}

}  // namespace warpfield::covariance
