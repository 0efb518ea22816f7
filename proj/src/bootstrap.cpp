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

#include "warpfield/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <optional>
#include <mutex>

#include "warpfield/errors.hpp"
#include "warpfield/parallel.hpp"
#include "warpfield/params.hpp"
#include "warpfield/rng.hpp"

namespace warpfield {

Decorrelated decorrelate(const ModelSpec& spec, const TrendCoefficients& beta,
                         const MultivariateDataset& ds) {
  Decorrelated out;
  out.chol = robust_cholesky(sigma_Z(spec, ds));
  out.mean = build_design(ds) * beta.beta;
  out.residuals = out.chol.llt.matrixL().solve(ds.stacked_z() - out.mean);
  return out;
}

Eigen::VectorXd recorrelate(const Decorrelated& dec, const std::vector<Eigen::Index>& indices) {
  Eigen::VectorXd z0(static_cast<Eigen::Index>(indices.size()));
  for (std::size_t k = 0; k < indices.size(); ++k) z0[static_cast<Eigen::Index>(k)] = dec.residuals[indices[k]];
  return dec.chol.llt.matrixL() * z0 + dec.mean;
}

std::vector<Eigen::Index> resample_indices(Eigen::Index n, std::uint64_t seed, int replicate) {
  Rng rng(seed, static_cast<std::uint64_t>(replicate));
  std::vector<Eigen::Index> out(static_cast<std::size_t>(n));
  for (auto& idx : out) idx = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
  return out;
}

double percentile(std::vector<double> values, double prob) {
  if (values.empty()) throw InputError("percentile of an empty sample");
  std::sort(values.begin(), values.end());
  const double pos = prob * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const std::size_t hi = std::min(lo + 1, values.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return values[lo] + frac * (values[hi] - values[lo]);
}

std::vector<std::pair<std::string, double>> identifiable_quantities(
    const ModelSpec& spec, const std::optional<HomogenizationResult>& homogenized) {
  bool warped = !spec.warps.shared.layers.empty();
  for (const auto& a : spec.warps.aligners) warped = warped || !a.layers.empty();
  std::vector<std::pair<std::string, double>> out;
  for (auto& [name, value] : natural_parameters(spec.params)) {
    if (name == "scale" && warped) continue;
    out.emplace_back(name, value);
  }
  if (homogenized) out.emplace_back("a_tilde", homogenized->a_tilde);
  return out;
}

BootstrapResult bootstrap(const FitResult& fit, const MultivariateDataset& ds,
                          const BootstrapOptions& opts) {
  if (!fit.ok()) throw InputError("bootstrap needs a successful fit");
  if (opts.replicates < 1) throw InputError("bootstrap needs at least one replicate");
  if (!(opts.alpha > 0.0 && opts.alpha < 1.0)) throw InputError("alpha must lie in (0, 1)");
  const Decorrelated dec = decorrelate(fit.spec, fit.beta, ds);

  FitOptions fo = opts.fit;
  fo.restarts = 1;
  fo.staged = false;
  fo.threads = 1;
  if (fit.homogenized) fo.anchors = fit.homogenized->anchors;

  BootstrapResult result;
  result.requested = opts.replicates;
  std::vector<std::optional<BootstrapReplicate>> slots(static_cast<std::size_t>(opts.replicates));
  parallel_for(slots.size(), resolve_threads(opts.threads), [&](std::size_t b) {
    const int index = static_cast<int>(b);
    const Eigen::VectorXd zb = recorrelate(dec, resample_indices(dec.residuals.size(), opts.seed, index));
    MultivariateDataset replicate = ds;
    const auto pieces = split_by_process(zb, ds);
    for (int i = 0; i < ds.p(); ++i) replicate.processes[i].z = pieces[i];
    try {
      FitResult refit = warpfield::fit(fit.spec, replicate, fo);
      if (!refit.ok()) return;
      BootstrapReplicate rep;
      rep.index = index;
      rep.values = identifiable_quantities(refit.spec, refit.homogenized);
      rep.beta = refit.beta;
      if (refit.homogenized) rep.homogenized = refit.homogenized->points[0];
      slots[b] = std::move(rep);
    } catch (const Error&) {
    }
  });

  for (auto& slot : slots) {
    if (slot) {
      result.replicates.push_back(std::move(*slot));
    } else {
      ++result.failed;
    }
  }
  if (result.failed > opts.max_failure_fraction * opts.replicates) {
    throw BootstrapUnstableError(std::to_string(result.failed) + " of " +
                                 std::to_string(opts.replicates) + " bootstrap refits failed");
  }

  std::vector<std::string> order;
  std::map<std::string, std::vector<double>> samples;
  for (const auto& rep : result.replicates) {
    for (const auto& [name, value] : rep.values) {
      if (!samples.count(name)) order.push_back(name);
      samples[name].push_back(value);
    }
  }
  for (const auto& name : order) {
    result.intervals.push_back({name, percentile(samples[name], 0.5 * opts.alpha),
                                percentile(samples[name], 1.0 - 0.5 * opts.alpha), 1.0 - opts.alpha});
  }
  return result;
}

}  // namespace warpfield
