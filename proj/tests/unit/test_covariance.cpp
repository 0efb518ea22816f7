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


#include <cmath>

#include <doctest.h>

#include "../support/instances.hpp"
#include "warpfield/covariance.hpp"
#include "warpfield/errors.hpp"

using namespace warpfield;
using covariance::assemble_sigma;
using covariance::cross_cov_D;
using covariance::cross_cov_G;

namespace {

ParsimoniousMaternParams table_params() {
  auto pr = ParsimoniousMaternParams::defaults(2);
  pr.nu << 0.5, 1.5;
  pr.sigma << 1.0, 0.9;
  pr.rho(0, 1) = pr.rho(1, 0) = 0.45;
  pr.tau << 0.2, 0.1;
  return pr;
}

}  // namespace

TEST_CASE("cross covariance on the warped domain") {
  auto pr = table_params();
  CHECK(cross_cov_D(pr, 0, 0, Eigen::Vector2d::Zero()) == doctest::Approx(1.0));
  CHECK(cross_cov_D(pr, 0, 1, Eigen::Vector2d::Zero()) == doctest::Approx(0.405).epsilon(1e-14));
  pr.scale = 1.0;
  const Eigen::Vector2d h(0.6, 0.8);
  CHECK(cross_cov_D(pr, 0, 1, h) == doctest::Approx(0.405 * std::cyl_bessel_k(1.0, 1.0)).epsilon(1e-10));
}

TEST_CASE("cross covariance is stationary and symmetric on the warped domain") {
  oracle::Draw draw(3);
  for (int t = 0; t < 50; ++t) {
    const auto pr = instances::random_params(draw, 2);
    const Eigen::Vector2d h(draw.uniform(-1, 1), draw.uniform(-1, 1));
    for (int i = 0; i < 2; ++i)
      for (int j = 0; j < 2; ++j) {
        CHECK(cross_cov_D(pr, i, j, h) == cross_cov_D(pr, i, j, Eigen::Vector2d(-h)));
        CHECK(cross_cov_D(pr, i, j, h) == cross_cov_D(pr, j, i, h));
      }
  }
}

TEST_CASE("rho bound") {
  Eigen::VectorXd nu(2);
  nu << 0.5, 1.5;
  CHECK(covariance::rho_bound(nu, 2)(0, 1) == doctest::Approx(std::sqrt(std::tgamma(2.5) / std::tgamma(0.5))));
  CHECK(covariance::rho_bound(nu, 2)(0, 1) == doctest::Approx(0.8660).epsilon(1e-4));
  nu << 1.2, 1.2;
  CHECK(covariance::rho_bound(nu, 2)(0, 1) == doctest::Approx(1.0));
  CHECK(covariance::rho_bound(Eigen::VectorXd::Constant(1, 0.7), 2).isApprox(Eigen::MatrixXd::Ones(1, 1)));
}

TEST_CASE("rho bound log gradient matches finite differences") {
  Eigen::VectorXd nu(3);
  nu << 0.4, 1.1, 2.3;
  for (int i = 0; i < 3; ++i) {
    const Eigen::MatrixXd g = covariance::rho_bound_log_gradient(nu, 2, i);
    Eigen::VectorXd up = nu, dn = nu;
    const double h = 1e-6;
    up[i] += h;
    dn[i] -= h;
    const Eigen::MatrixXd fd = (covariance::rho_bound(up, 2).array().log() -
                                covariance::rho_bound(dn, 2).array().log()) / (2 * h);
    CHECK((g - fd).cwiseAbs().maxCoeff() < 1e-7);
  }
}

TEST_CASE("validate rejects invalid parameters") {
  auto pr = table_params();
  CHECK_NOTHROW(covariance::validate(pr, 2));
  pr.rho(0, 1) = pr.rho(1, 0) = 0.9;
  CHECK_THROWS_AS(covariance::validate(pr, 2), InvalidParameterError);
  pr = table_params();
  pr.sigma[1] = -1.0;
  CHECK_THROWS_AS(covariance::validate(pr, 2), InvalidParameterError);
  pr = table_params();
  pr.rho(0, 1) = 0.3;
  CHECK_THROWS_AS(covariance::validate(pr, 2), InvalidParameterError);
}

TEST_CASE("assembled covariance for coincident locations") {
  std::vector<PointSet> one{Eigen::MatrixXd::Zero(1, 2)};
  const auto p1 = ParsimoniousMaternParams::defaults(1);
  CHECK(assemble_sigma(p1, warp::ProcessWarpSet::with_shared({}, 1), one)(0, 0) == doctest::Approx(1.0));

  std::vector<PointSet> two{Eigen::MatrixXd::Zero(1, 2), Eigen::MatrixXd::Zero(1, 2)};
  Eigen::Matrix2d expected;
  expected << 1.0, 0.405, 0.405, 0.81;
  const Eigen::MatrixXd sigma = assemble_sigma(table_params(), warp::ProcessWarpSet::with_shared({}, 2), two);
  CHECK((sigma - expected).cwiseAbs().maxCoeff() < 1e-14);
}

TEST_CASE("identity warps reduce to the stationary model") {
  oracle::Draw draw(5);
  const auto pr = instances::random_params(draw, 2);
  const auto ws = warp::ProcessWarpSet::with_shared({}, 2);
  for (int t = 0; t < 20; ++t) {
    const Eigen::Vector2d s(draw.uniform(0, 1), draw.uniform(0, 1)), u(draw.uniform(0, 1), draw.uniform(0, 1));
    CHECK(cross_cov_G(pr, ws, 0, 1, s, u) == doctest::Approx(cross_cov_D(pr, 0, 1, s - u)).epsilon(1e-14));
  }
}

TEST_CASE("a shared warp keeps the cross covariance symmetric") {
  oracle::Draw draw(7);
  const auto spec = instances::random_spec(draw, 2, true, false);
  const PointSet a = draw.points(15), b = draw.points(12);
  std::vector<PointSet> locs{a, b};
  const Eigen::MatrixXd sigma = assemble_sigma(spec.params, spec.warps, locs);
  CHECK(sigma.isApprox(sigma.transpose(), 0.0));
  for (int t = 0; t < 1000; ++t) {
    const Eigen::Vector2d s(draw.uniform(0, 1), draw.uniform(0, 1)), u(draw.uniform(0, 1), draw.uniform(0, 1));
    CHECK(std::abs(cross_cov_G(spec.params, spec.warps, 0, 1, s, u) -
                   cross_cov_G(spec.params, spec.warps, 1, 0, s, u)) <= 1e-14);
  }
}

TEST_CASE("a shifted aligner makes the cross covariance asymmetric") {
  auto pr = table_params();
  auto ws = warp::ProcessWarpSet::with_shared({}, 2);
  ws.aligners[1].layers = {warp::make_translation(Eigen::Vector2d(0.1, 0.0))};
  const Eigen::Vector2d s(0.3, 0.4), u(0.5, 0.2);
  const double c12 = cross_cov_G(pr, ws, 0, 1, s, u);
  const double c21 = cross_cov_G(pr, ws, 1, 0, s, u);
  CHECK(c12 == doctest::Approx(cross_cov_D(pr, 0, 1, s - u - Eigen::Vector2d(0.1, 0.0))));
  CHECK(c21 == doctest::Approx(cross_cov_D(pr, 1, 0, s - u + Eigen::Vector2d(0.1, 0.0))));
  CHECK(std::abs(c12 - c21) > 1e-6);
}

TEST_CASE("an affine aligner makes only the cross covariance nonstationary") {
  oracle::Draw draw(11);
  auto pr = table_params();
  auto ws = warp::ProcessWarpSet::with_shared({}, 2);
  warp::Affine g = warp::make_identity_affine(2);
  g.matrix << 1.3, 0.2, -0.1, 0.8;
  g.shift << 0.05, -0.02;
  ws.aligners[1].layers = {g};
  double marginal_spread = 0.0, cross_spread = 0.0;
  for (int t = 0; t < 100; ++t) {
    const Eigen::Vector2d s(draw.uniform(0, 1), draw.uniform(0, 1)), u(draw.uniform(0, 1), draw.uniform(0, 1));
    const Eigen::Vector2d shift(draw.uniform(-2, 2), draw.uniform(-2, 2));
    for (int i = 0; i < 2; ++i)
      marginal_spread = std::max(marginal_spread, std::abs(cross_cov_G(pr, ws, i, i, s, u) -
                                                           cross_cov_G(pr, ws, i, i, s + shift, u + shift)));
    cross_spread = std::max(cross_spread, std::abs(cross_cov_G(pr, ws, 0, 1, s, u) -
                                                   cross_cov_G(pr, ws, 0, 1, s + shift, u + shift)));
  }
  CHECK(marginal_spread < 1e-12);
  CHECK(cross_spread > 1e-6);
}

TEST_CASE("assembly agrees with pointwise evaluation") {
  oracle::Draw draw(13);
  const auto spec = instances::random_spec(draw, 2, true, true);
  std::vector<PointSet> locs{draw.points(9), draw.points(7)};
  const Eigen::MatrixXd sigma = assemble_sigma(spec.params, spec.warps, locs);
  double worst = 0.0;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (Eigen::Index a = 0; a < locs[i].rows(); ++a)
        for (Eigen::Index b = 0; b < locs[j].rows(); ++b) {
          const double ref = oracle::cov_g(spec, i, j, locs[i].row(a).transpose(), locs[j].row(b).transpose());
          const double got = sigma((i ? 9 : 0) + a, (j ? 9 : 0) + b);
          worst = std::max(worst, std::abs(got - ref));
        }
  CHECK(worst < 1e-10);
}

TEST_CASE("tabulated assembly is close to exact assembly") {
  oracle::Draw draw(17);
  const auto spec = instances::random_spec(draw, 2, true, true);
  std::vector<PointSet> locs{draw.points(30), draw.points(30)};
  using covariance::KernelEvaluation;
  using covariance::PsdCheck;
  const Eigen::MatrixXd exact = assemble_sigma(spec.params, spec.warps, locs, PsdCheck::kNone, KernelEvaluation::kExact);
  const Eigen::MatrixXd table = assemble_sigma(spec.params, spec.warps, locs, PsdCheck::kNone, KernelEvaluation::kTabulated);
  CHECK((exact - table).cwiseAbs().maxCoeff() < 1e-7);
}

TEST_CASE("validity sweep over random admissible models") {
  oracle::Draw draw(19);
  for (int t = 0; t < 100; ++t) {
    const auto spec = instances::random_spec(draw, 2, true, true);
    std::vector<PointSet> locs{draw.points(20), draw.points(20)};
    Eigen::MatrixXd sigma;
    REQUIRE_NOTHROW(sigma = assemble_sigma(spec.params, spec.warps, locs));
    CHECK(covariance::relative_min_eigenvalue(sigma) >= -1e-8);
  }
}

TEST_CASE("eigenvalue check flags jointly invalid correlations") {
  auto pr = ParsimoniousMaternParams::defaults(3);
  pr.rho << 1.0, 0.9, 0.9, 0.9, 1.0, -0.9, 0.9, -0.9, 1.0;
  std::vector<PointSet> locs(3, Eigen::MatrixXd::Zero(1, 2));
  CHECK_THROWS_AS(assemble_sigma(pr, warp::ProcessWarpSet::with_shared({}, 3), locs), InvalidParameterError);
}

TEST_CASE("transformed scale multiplies by the anchor distance") {
  warp::HomogenizedFrame frame;
  frame.scale = 2.5;
  CHECK(covariance::transformed_scale(1.2, frame).a_tilde == doctest::Approx(3.0));
}
