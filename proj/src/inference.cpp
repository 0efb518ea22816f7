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

#include "warpfield/inference.hpp"

#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>

#include "warpfield/errors.hpp"
#include "warpfield/optimizer.hpp"
#include "warpfield/parallel.hpp"
#include "warpfield/rng.hpp"

namespace warpfield {
namespace {

using covariance::KernelEvaluation;
using covariance::MaternKernel;
using covariance::MaternTable;

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// Design restricted to the columns of processes that have data; the others
// are not estimable.
// Numerical Jacobian check of every process warp over a probe grid spanning
// the data. The parameterization already keeps units injective; this catches
// folding from composition.
std::optional<std::string> injectivity_problem(const warp::ProcessWarpSet& warps,
                                               const MultivariateDataset& ds) {
  const int d = ds.dim();
  if (d != 2 || ds.size() == 0) return std::nullopt;
  Eigen::Vector2d lo = Eigen::Vector2d::Constant(std::numeric_limits<double>::infinity());
  Eigen::Vector2d hi = -lo;
  for (const auto& proc : ds.processes) {
    if (proc.locations.rows() == 0) continue;
    lo = lo.cwiseMin(proc.locations.colwise().minCoeff().transpose());
    hi = hi.cwiseMax(proc.locations.colwise().maxCoeff().transpose());
  }
  constexpr int kProbes = 21;
  PointSet grid(kProbes * kProbes, 2);
  for (int a = 0; a < kProbes; ++a) {
    for (int b = 0; b < kProbes; ++b) {
      grid.row(a * kProbes + b) << lo[0] + (hi[0] - lo[0]) * a / (kProbes - 1),
          lo[1] + (hi[1] - lo[1]) * b / (kProbes - 1);
    }
  }
  for (int i = 0; i < warps.process_count(); ++i) {
    warp::WarpFunction full = warps.aligners[i];
    full.layers.insert(full.layers.end(), warps.shared.layers.begin(), warps.shared.layers.end());
    const auto report = warp::check_injective(full, grid);
    if (!report.injective) {
      return "warp of process " + std::to_string(i + 1) + " may fold space: " + report.diagnostic;
    }
  }
  return std::nullopt;
}

Eigen::MatrixXd active_design(const MultivariateDataset& ds, std::vector<Eigen::Index>* columns) {
  const Eigen::MatrixXd full = build_design(ds);
  std::vector<Eigen::Index> keep;
  const int q = ds.q();
  for (int i = 0; i < ds.p(); ++i) {
    if (ds.count(i) == 0) continue;
    for (int c = 0; c < q; ++c) keep.push_back(static_cast<Eigen::Index>(i) * q + c);
  }
  Eigen::MatrixXd x(full.rows(), static_cast<Eigen::Index>(keep.size()));
  for (std::size_t c = 0; c < keep.size(); ++c) x.col(static_cast<Eigen::Index>(c)) = full.col(keep[c]);
  if (columns) *columns = std::move(keep);
  return x;
}

double design_log_det(const Eigen::MatrixXd& x) {
  Eigen::LLT<Eigen::MatrixXd> xtx(x.transpose() * x);
  if (xtx.info() != Eigen::Success) throw SingularDesignError("design matrix X is rank deficient");
  const Eigen::VectorXd diag = xtx.matrixLLT().diagonal();
  if (diag.minCoeff() <= 1e-10 * diag.maxCoeff()) {
    throw SingularDesignError("design matrix X is numerically rank deficient");
  }
  return 2.0 * diag.array().log().sum();
}

double reml_constant(const Eigen::MatrixXd& x) {
  const double n = static_cast<double>(x.rows());
  const double r = static_cast<double>(x.cols());
  return -0.5 * (n - r) * std::log(2.0 * std::numbers::pi) + 0.5 * design_log_det(x);
}

// Factorization-based pieces shared by the likelihood, its gradient and GLS.
struct Solved {
  double value = kNegInf;
  Eigen::VectorXd beta;      // GLS estimate over the active columns
  Eigen::MatrixXd inverse;   // Σ⁻¹ (only when requested)
  Eigen::MatrixXd sx;        // Σ⁻¹ X
  Eigen::LLT<Eigen::MatrixXd> m;  // X'Σ⁻¹X
  Eigen::VectorXd alpha;     // Σ⁻¹ (Z - Xβ̂) = Π Z
};

// Factorizes `sigma` in place. Returns false when Σ_Z or X'Σ⁻¹X is not
// positive definite.
bool solve(Eigen::MatrixXd& sigma, const Eigen::MatrixXd& x, const Eigen::VectorXd& z,
           double constant, bool want_inverse, Solved& out) {
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(sigma);
  if (llt.info() != Eigen::Success) return false;
  const auto lower = llt.matrixL();
  Eigen::VectorXd w = lower.solve(z);
  Eigen::MatrixXd v = lower.solve(x);
  out.m.compute(v.transpose() * v);
  if (out.m.info() != Eigen::Success) return false;
  const Eigen::VectorXd vtw = v.transpose() * w;
  out.beta = out.m.solve(vtw);
  const double quad = w.squaredNorm() - vtw.dot(out.beta);
  const double log_det_sigma = 2.0 * sigma.diagonal().array().log().sum();
  const double log_det_m = 2.0 * out.m.matrixLLT().diagonal().array().log().sum();
  out.value = constant - 0.5 * log_det_sigma - 0.5 * log_det_m - 0.5 * quad;
  if (!std::isfinite(out.value)) return false;
  const Eigen::VectorXd resid = w - v * out.beta;
  out.alpha = lower.transpose().solve(resid);
  if (want_inverse) {
    out.inverse = Eigen::MatrixXd::Identity(sigma.rows(), sigma.cols());
    llt.solveInPlace(out.inverse);
    out.sx = out.inverse * x;
  }
  return true;
}

struct Warped {
  std::vector<PointSet> points;
  std::vector<warp::WarpTape> align_tapes, shared_tapes;
};

Warped warp_all(const ModelSpec& spec, const MultivariateDataset& ds, bool record) {
  Warped out;
  const int p = ds.p();
  out.points.resize(p);
  if (record) {
    out.align_tapes.resize(p);
    out.shared_tapes.resize(p);
  }
  for (int i = 0; i < p; ++i) {
    const PointSet aligned = warp::warp_points(spec.warps.aligners[i], ds.processes[i].locations,
                                               record ? &out.align_tapes[i] : nullptr);
    out.points[i] = warp::warp_points(spec.warps.shared, aligned,
                                      record ? &out.shared_tapes[i] : nullptr);
  }
  return out;
}

bool all_finite(const std::vector<PointSet>& pts) {
  for (const auto& p : pts) {
    if (!p.allFinite()) return false;
  }
  return true;
}

bool use_table(KernelEvaluation eval, Eigen::Index n) {
  return eval == KernelEvaluation::kTabulated || (eval == KernelEvaluation::kAuto && n > 64);
}

// Kernel value/slope plus its ν-derivative, exact or tabulated.
class KernelWithNuDerivative {
 public:
  KernelWithNuDerivative(double nu, bool tabulate)
      : step_(nu * (tabulate ? 1e-4 : 1e-5)),
        exact_(nu),
        plus_(nu + step_),
        minus_(nu - step_) {
    if (tabulate) {
      table_.emplace(exact_);
      table_plus_.emplace(plus_);
      table_minus_.emplace(minus_);
    }
  }

  MaternKernel::ValueSlope value_and_slope(double x) const {
    return table_ ? table_->value_and_slope(x) : exact_.value_and_slope(x);
  }
  double nu_derivative(double x) const {
    const double hi = table_plus_ ? (*table_plus_)(x) : plus_(x);
    const double lo = table_minus_ ? (*table_minus_)(x) : minus_(x);
    return (hi - lo) / (2.0 * step_);
  }

 private:
  double step_;
  MaternKernel exact_, plus_, minus_;
  std::optional<MaternTable> table_, table_plus_, table_minus_;
};

}  // namespace

RemlObjective::RemlObjective(const MultivariateDataset& ds, ParamLayout layout,
                             KernelEvaluation eval)
    : ds_(&ds), layout_(std::move(layout)), eval_(eval) {
  ds.validate();
  z_ = ds.stacked_z();
  x_ = active_design(ds, nullptr);
  constant_ = reml_constant(x_);
}

double RemlObjective::value(const Eigen::VectorXd& theta) const {
  try {
    const ModelSpec spec = layout_.unpack(theta);
    const Warped warped = warp_all(spec, *ds_, false);
    if (!all_finite(warped.points)) return kNegInf;
    Eigen::MatrixXd sigma = covariance::assemble_sigma_warped(spec.params, warped.points, eval_);
    add_noise(sigma, spec.params, *ds_);
    Solved s;
    if (!solve(sigma, x_, z_, constant_, false, s)) return kNegInf;
    return s.value;
  } catch (const Error&) {
    return kNegInf;
  }
}

double RemlObjective::value_and_gradient(const Eigen::VectorXd& theta, Eigen::VectorXd& grad) const {
  grad = Eigen::VectorXd::Zero(theta.size());
  ModelSpec spec;
  Warped warped;
  Eigen::MatrixXd sigma;
  try {
    spec = layout_.unpack(theta);
    warped = warp_all(spec, *ds_, layout_.has_free_warps());
    if (!all_finite(warped.points)) return kNegInf;
    sigma = covariance::assemble_sigma_warped(spec.params, warped.points, eval_);
  } catch (const Error&) {
    return kNegInf;
  }
  add_noise(sigma, spec.params, *ds_);
  Solved s;
  if (!solve(sigma, x_, z_, constant_, true, s)) return kNegInf;

  // G = αα' − Π, with Π = Σ⁻¹ − Σ⁻¹X (X'Σ⁻¹X)⁻¹ X'Σ⁻¹; dL/dθ = ½ tr(G ∂Σ/∂θ).
  Eigen::MatrixXd& g = s.inverse;
  g *= -1.0;
  g.noalias() += s.sx * s.m.solve(s.sx.transpose());
  g.noalias() += s.alpha * s.alpha.transpose();

  const auto& prm = spec.params;
  const int p = prm.p;
  const int d = layout_.dim();
  const bool warp_grad = layout_.has_free_warps();
  const double a = prm.scale;
  const bool tabulate = use_table(eval_, ds_->size());

  std::vector<Eigen::Index> offset(static_cast<std::size_t>(p) + 1, 0);
  for (int i = 0; i < p; ++i) offset[i + 1] = offset[i] + ds_->count(i);

  // Block totals: for i != j the sums cover both blocks (i,j) and (j,i).
  Eigen::MatrixXd t0 = Eigen::MatrixXd::Zero(p, p), ta = t0, tq = t0;
  std::vector<PointSet> dy(p);
  for (int i = 0; i < p; ++i) dy[i] = PointSet::Zero(ds_->count(i), d);

  for (int i = 0; i < p; ++i) {
    for (int j = 0; j <= i; ++j) {
      const Eigen::Index ni = ds_->count(i), nj = ds_->count(j);
      if (ni == 0 || nj == 0) continue;
      const double coef = prm.coefficient(i, j);
      KernelWithNuDerivative kernel(prm.cross_smoothness(i, j), tabulate);
      const PointSet& yi = warped.points[i];
      const PointSet& yj = warped.points[j];
      double s0 = 0.0, sa = 0.0, sq = 0.0;
      for (Eigen::Index b = 0; b < nj; ++b) {
        const Eigen::Index gb = offset[j] + b;
        const Eigen::Index a_begin = (i == j) ? b + 1 : 0;
        for (Eigen::Index ia = a_begin; ia < ni; ++ia) {
          const Eigen::Index ga = offset[i] + ia;
          double r2 = 0.0;
          for (int k = 0; k < d; ++k) {
            const double diff = yi(ia, k) - yj(b, k);
            r2 += diff * diff;
          }
          const double r = std::sqrt(r2);
          const double x = a * r;
          const double gab = g(ga, gb);
          const auto vs = kernel.value_and_slope(x);
          s0 += 2.0 * gab * vs.value;
          if (x > 0.0) {
            sa += 2.0 * gab * vs.slope * x;
            sq += 2.0 * gab * kernel.nu_derivative(x);
            if (warp_grad) {
              const double w = gab * coef * vs.slope * a / r;
              for (int k = 0; k < d; ++k) {
                const double diff = w * (yi(ia, k) - yj(b, k));
                dy[i](ia, k) += diff;
                dy[j](b, k) -= diff;
              }
            }
          }
        }
      }
      if (i == j) {
        for (Eigen::Index k = 0; k < ni; ++k) s0 += g(offset[i] + k, offset[i] + k);
      }
      t0(i, j) = t0(j, i) = s0;
      ta(i, j) = ta(j, i) = sa;
      tq(i, j) = tq(j, i) = sq;
    }
  }

  // Single-block sums.
  auto single = [&](const Eigen::MatrixXd& t, int i, int j) { return i == j ? t(i, i) : 0.5 * t(i, j); };

  Eigen::MatrixXd drho = Eigen::MatrixXd::Zero(p, p);
  for (int i = 0; i < p; ++i) {
    for (int j = 0; j < p; ++j) {
      if (i != j) drho(i, j) = prm.sigma[i] * prm.sigma[j] * single(t0, i, j);
    }
  }
  const Eigen::MatrixXd bound = covariance::rho_bound(prm.nu, d);

  for (int k = 0; k < p; ++k) {
    if (layout_.sigma_index(k) >= 0) {
      double v = 0.0;
      for (int j = 0; j < p; ++j) v += prm.coefficient(k, j) * single(t0, k, j);
      grad[layout_.sigma_index(k)] = v;
    }
    if (layout_.nu_index(k) >= 0) {
      double v = 0.0;
      for (int j = 0; j < p; ++j) v += 0.5 * prm.coefficient(k, j) * single(tq, k, j);
      const Eigen::MatrixXd dlogb = covariance::rho_bound_log_gradient(prm.nu, d, k);
      for (int j = 0; j < p; ++j) {
        if (j != k && layout_.rho_index(k, j) >= 0) v += drho(k, j) * prm.rho(k, j) * dlogb(k, j);
      }
      grad[layout_.nu_index(k)] = v * prm.nu[k];
    }
    if (layout_.tau_index(k) >= 0) {
      double v = 0.0;
      for (Eigen::Index r = offset[k]; r < offset[k + 1]; ++r) v += g(r, r);
      grad[layout_.tau_index(k)] = prm.tau[k] * prm.tau[k] * v;
    }
    for (int j = k + 1; j < p; ++j) {
      const int idx = layout_.rho_index(k, j);
      if (idx < 0) continue;
      const double t = prm.rho(k, j) / bound(k, j);
      grad[idx] = drho(k, j) * bound(k, j) * (1.0 - t * t);
    }
  }
  if (layout_.scale_index() >= 0) {
    double v = 0.0;
    for (int i = 0; i < p; ++i) {
      for (int j = 0; j <= i; ++j) v += 0.5 * prm.coefficient(i, j) * ta(i, j);
    }
    grad[layout_.scale_index()] = v;
  }

  if (warp_grad) {
    std::vector<double> scratch(warp::free_parameter_count(spec.warps.shared), 0.0);
    for (int i = 0; i < p; ++i) {
      if (ds_->count(i) == 0) continue;
      std::span<double> shared_grad =
          layout_.shared_offset() >= 0
              ? std::span<double>(grad.data() + layout_.shared_offset(), scratch.size())
              : std::span<double>(scratch);
      const PointSet d_aligned =
          warp::backpropagate(spec.warps.shared, warped.shared_tapes[i], dy[i], shared_grad);
      if (layout_.aligner_offset(i) >= 0) {
        const auto n = warp::free_parameter_count(spec.warps.aligners[i]);
        warp::backpropagate(spec.warps.aligners[i], warped.align_tapes[i], d_aligned,
                            std::span<double>(grad.data() + layout_.aligner_offset(i), n));
      }
    }
  }
  return s.value;
}

double reml_loglik(const ModelSpec& spec, const MultivariateDataset& ds, KernelEvaluation eval) {
  ds.validate();
  const Eigen::MatrixXd x = active_design(ds, nullptr);
  Eigen::MatrixXd sigma = sigma_Z(spec, ds, covariance::PsdCheck::kNone, eval);
  Solved s;
  if (!solve(sigma, x, ds.stacked_z(), reml_constant(x), false, s)) {
    throw NotPositiveDefiniteError("Σ_Z or X'Σ⁻¹X is not positive definite");
  }
  return s.value;
}

TrendCoefficients gls_beta(const ModelSpec& spec, const MultivariateDataset& ds,
                           KernelEvaluation eval) {
  ds.validate();
  std::vector<Eigen::Index> columns;
  const Eigen::MatrixXd x = active_design(ds, &columns);
  design_log_det(x);
  Eigen::MatrixXd sigma = sigma_Z(spec, ds, covariance::PsdCheck::kNone, eval);
  Solved s;
  if (!solve(sigma, x, ds.stacked_z(), 0.0, false, s)) {
    throw NotPositiveDefiniteError("Σ_Z or X'Σ⁻¹X is not positive definite");
  }
  TrendCoefficients out;
  out.beta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(ds.p()) * ds.q());
  for (std::size_t c = 0; c < columns.size(); ++c) out.beta[columns[c]] = s.beta[static_cast<Eigen::Index>(c)];
  return out;
}

HomogenizationResult homogenize_fit(const ModelSpec& spec, const MultivariateDataset& ds,
                                    std::optional<warp::HomogenizationAnchors> anchors) {
  if (ds.dim() != 2) throw UnsupportedDimensionError("homogenization is defined for d = 2");
  if (ds.count(0) < 3) throw AnchorDegeneracyError("homogenization needs three process-1 locations");
  HomogenizationResult out;
  out.anchors = anchors ? *anchors : warp::default_anchors(ds.processes[0].locations);
  const Warped warped = warp_all(spec, ds, false);
  const warp::Homogenized h = warp::homogenize(warped.points[0], out.anchors);
  out.frame = h.frame;
  for (int i = 0; i < ds.p(); ++i) out.points.push_back(h.frame.apply(warped.points[i]));
  out.a_tilde = covariance::transformed_scale(spec.params.scale, h.frame).a_tilde;
  return out;
}

namespace {

optim::OptimResult maximize(const RemlObjective& objective, const Eigen::VectorXd& theta0,
                            const FitOptions& opts) {
  optim::LbfgsOptions lo;
  lo.max_iters = opts.max_iters;
  lo.tol_grad = opts.tol_grad;
  lo.tol_rel_f = opts.tol_rel_f;
  auto negated = [&](const Eigen::VectorXd& theta, Eigen::VectorXd* grad) {
    if (!grad) return -objective.value(theta);
    const double v = objective.value_and_gradient(theta, *grad);
    *grad *= -1.0;
    return -v;
  };
  return optim::minimize_lbfgs(negated, theta0, lo);
}

}  // namespace

FitResult fit(const ModelSpec& init, const MultivariateDataset& ds, const FitOptions& opts) {
  const auto started = std::chrono::steady_clock::now();
  ds.validate();
  if (!ds.has_observations()) throw InputError("fit needs observations for every location");
  const int dim = ds.dim();
  if (init.params.p != ds.p()) throw InputError("model and data disagree on the process count");
  const Eigen::MatrixXd x = active_design(ds, nullptr);
  if (ds.size() < x.cols() + 1) throw InputError("fit needs at least p*q + 1 observations");

  FitResult result;
  ModelSpec start = init;
  for (int i = 0; i < start.params.p; ++i) {
    if (!opts.fixed.count(tau_name(i)) && !(start.params.tau[i] > 0.0)) {
      start.params.tau[i] = 0.1 * start.params.sigma[i];
      result.diagnostics.push_back(tau_name(i) + " started at 0.1 * sigma (was zero)");
    }
    if (ds.count(i) == 0) {
      result.diagnostics.push_back("process " + std::to_string(i + 1) +
                                   " has no data; its parameters are not identified");
    }
  }
  covariance::validate(start.params, dim);
  warp::validate(start.warps, dim);

  int iterations = 0, evaluations = 0;
  ModelSpec staged = start;
  const ParamLayout full(start, opts.fixed, dim);
  if (opts.staged && full.has_free_warps()) {
    const ParamLayout stationary = full.with_warps_fixed();
    const RemlObjective objective(ds, stationary, opts.kernel);
    const auto r = maximize(objective, stationary.pack(start), opts);
    iterations += r.iterations;
    evaluations += r.evaluations;
    for (double v : r.trace) result.trace.push_back(-v);
    if (r.status != optim::Status::kFailed) staged = stationary.unpack(r.x);
  }

  const ParamLayout layout(staged, opts.fixed, dim);
  const RemlObjective objective(ds, layout, opts.kernel);
  const int restarts = layout.has_free_warps() ? std::max(1, opts.restarts) : 1;
  std::vector<optim::OptimResult> runs(static_cast<std::size_t>(restarts));
  const Eigen::VectorXd theta0 = layout.pack(staged);
  parallel_for(runs.size(), resolve_threads(opts.threads), [&](std::size_t r) {
    Eigen::VectorXd start_theta = theta0;
    if (r > 0) {
      Rng rng(derive_seed(opts.seed, r));
      for (auto [off, count] : layout.warp_segments()) {
        for (int k = 0; k < count; ++k) start_theta[off + k] += opts.warp_jitter * rng.normal();
      }
    }
    runs[r] = maximize(objective, start_theta, opts);
  });

  std::size_t best = 0;
  for (std::size_t r = 1; r < runs.size(); ++r) {
    if (runs[r].status == optim::Status::kFailed) continue;
    if (runs[best].status == optim::Status::kFailed || runs[r].value < runs[best].value) best = r;
  }
  const auto& run = runs[best];
  for (const auto& r : runs) {
    iterations += r.iterations;
    evaluations += r.evaluations;
  }
  for (double v : run.trace) result.trace.push_back(-v);

  result.names = layout.names();
  result.theta = run.x;
  result.spec = layout.unpack(run.x);
  result.k = static_cast<int>(layout.size());
  result.convergence.iterations = iterations;
  result.convergence.evaluations = evaluations;
  result.convergence.gradient_norm = run.gradient.size() ? run.gradient.lpNorm<Eigen::Infinity>() : 0.0;
  result.convergence.status = optim::to_string(run.status);
  if (run.status == optim::Status::kFailed) {
    result.reml_value = kNegInf;
    result.aic = std::numeric_limits<double>::infinity();
    result.diagnostics.push_back("restricted likelihood could not be evaluated at the start");
  } else {
    result.reml_value = -run.value;
    result.aic = 2.0 * result.k - 2.0 * result.reml_value;
    result.beta = gls_beta(result.spec, ds, opts.kernel);
    if (auto folded = injectivity_problem(result.spec.warps, ds)) {
      result.diagnostics.push_back(*folded);
    }
    if (opts.homogenize && dim == 2 && ds.count(0) >= 3) {
      try {
        result.homogenized = homogenize_fit(result.spec, ds, opts.anchors);
      } catch (const Error& e) {
        result.diagnostics.push_back(std::string("homogenization skipped: ") + e.what());
      }
    }
  }
  result.seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - started).count();
  return result;
}

ComplexityReport complexity_report(const ModelSpec& spec, const MultivariateDataset& ds) {
  using clock = std::chrono::steady_clock;
  auto seconds = [](clock::time_point a, clock::time_point b) {
    return std::chrono::duration<double>(b - a).count();
  };
  ComplexityReport report;
  const double n = static_cast<double>(ds.size());
  for (int i = 0; i < ds.p(); ++i) {
    double r = 0.0;
    for (const auto& layer : spec.warps.shared.layers) r += static_cast<double>(warp::basis_count(layer));
    for (const auto& layer : spec.warps.aligners[i].layers) {
      r += static_cast<double>(warp::basis_count(layer));
    }
    report.warp_cost += static_cast<double>(ds.count(i)) * r;
  }
  report.factor_cost = n * n * n / 3.0;

  const auto t0 = clock::now();
  const Warped warped = warp_all(spec, ds, false);
  const auto t1 = clock::now();
  Eigen::MatrixXd sigma = covariance::assemble_sigma_warped(spec.params, warped.points,
                                                            KernelEvaluation::kAuto);
  add_noise(sigma, spec.params, ds);
  const auto t2 = clock::now();
  Eigen::LLT<Eigen::Ref<Eigen::MatrixXd>> llt(sigma);
  const auto t3 = clock::now();
  report.warp_seconds = seconds(t0, t1);
  report.assembly_seconds = seconds(t1, t2);
  report.factor_seconds = seconds(t2, t3);
  if (ds.has_observations()) {
    const auto t4 = clock::now();
    reml_loglik(spec, ds);
    report.total_seconds = seconds(t4, clock::now());
  } else {
    report.total_seconds = seconds(t0, t3);
  }
  return report;
}

}  // namespace warpfield
