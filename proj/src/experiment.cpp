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

#include "warpfield/experiment.hpp"

#include <algorithm>
#include <limits>
#include <ostream>

#include "warpfield/errors.hpp"
#include "warpfield/parallel.hpp"
#include "warpfield/rng.hpp"

namespace warpfield::experiment {
namespace {

bool inside(const Eigen::Vector2d& s, const std::pair<Eigen::Vector2d, Eigen::Vector2d>& box) {
  return (s.array() >= box.first.array()).all() && (s.array() <= box.second.array()).all();
}

PointSet rows_of(const std::vector<Eigen::Vector2d>& grid, const std::vector<std::size_t>& idx) {
  PointSet out(static_cast<Eigen::Index>(idx.size()), 2);
  for (std::size_t k = 0; k < idx.size(); ++k) out.row(static_cast<Eigen::Index>(k)) = grid[idx[k]].transpose();
  return out;
}

void shuffle(std::vector<std::size_t>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

SimulatedSplit simulate_split(const config::SimulationConfig& sim, std::uint64_t seed) {
  const int r = sim.resolution;
  std::vector<Eigen::Vector2d> grid;
  grid.reserve(static_cast<std::size_t>(r) * r);
  for (int i = 0; i < r; ++i) {
    for (int j = 0; j < r; ++j) {
      grid.emplace_back(sim.lo[0] + (sim.hi[0] - sim.lo[0]) * i / (r - 1),
                        sim.lo[1] + (sim.hi[1] - sim.lo[1]) * j / (r - 1));
    }
  }
  std::vector<std::size_t> candidates, excluded;
  for (std::size_t k = 0; k < grid.size(); ++k) {
    if (sim.block && inside(grid[k], *sim.block)) {
      excluded.push_back(k);
    } else {
      candidates.push_back(k);
    }
  }
  if (static_cast<std::size_t>(sim.sample) > candidates.size()) {
    throw InputError("cannot sample " + std::to_string(sim.sample) + " locations from " +
                     std::to_string(candidates.size()) + " grid points");
  }
  Rng rng(seed, 1);
  shuffle(candidates, rng);
  std::vector<std::size_t> observed(candidates.begin(), candidates.begin() + sim.sample);
  std::vector<std::size_t> rest(candidates.begin() + sim.sample, candidates.end());
  rest.insert(rest.end(), excluded.begin(), excluded.end());
  std::sort(rest.begin(), rest.end());
  if (sim.test > 0 && static_cast<std::size_t>(sim.test) < rest.size()) {
    shuffle(rest, rng);
    rest.resize(static_cast<std::size_t>(sim.test));
  }
  std::sort(observed.begin(), observed.end());
  std::sort(rest.begin(), rest.end());

  const ModelSpec& truth = sim.truth.spec;
  const int p = truth.params.p;
  const PointSet obs_pts = rows_of(grid, observed);
  const PointSet test_pts = rows_of(grid, rest);
  PointSet all_pts(obs_pts.rows() + test_pts.rows(), 2);
  all_pts << obs_pts, test_pts;

  MultivariateDataset all = MultivariateDataset::at_locations(std::vector<PointSet>(p, all_pts));
  for (auto& proc : all.processes) {
    proc.covariates = Eigen::MatrixXd::Ones(all_pts.rows(), truth.q);
  }
  if (truth.q > 1) throw InputError("grid simulation supports intercept-only trends");
  const Simulation draw = simulate_with_truth(truth, all, {sim.beta}, derive_seed(seed, 2));

  SimulatedSplit out;
  const Eigen::Index n_obs = obs_pts.rows(), n_test = test_pts.rows();
  out.train = MultivariateDataset::at_locations(std::vector<PointSet>(p, obs_pts));
  out.test = MultivariateDataset::at_locations(std::vector<PointSet>(p, test_pts));
  out.test_latent.resize(p * n_test);
  out.truth.all = all;
  for (int i = 0; i < p; ++i) {
    out.train.processes[i].z = draw.observed[i].head(n_obs);
    out.test.processes[i].z = draw.observed[i].tail(n_test);
    out.test_latent.segment(i * n_test, n_test) = draw.latent[i].tail(n_test);
    out.truth.all.processes[i].z = draw.observed[i];
    out.truth.latent.push_back(draw.latent[i]);
    std::vector<bool> flags(static_cast<std::size_t>(n_obs + n_test), false);
    std::fill(flags.begin(), flags.begin() + n_obs, true);
    out.truth.observed.push_back(std::move(flags));
  }
  return out;
}

warp::HomogenizationAnchors corner_anchors(const PointSet& locations, const Eigen::Vector2d& lo,
                                           const Eigen::Vector2d& hi) {
  auto nearest = [&](const Eigen::Vector2d& target) {
    std::size_t best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index r = 0; r < locations.rows(); ++r) {
      const double d = (locations.row(r).transpose() - target).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = static_cast<std::size_t>(r);
      }
    }
    return best;
  };
  return {nearest(lo), nearest(hi), nearest(Eigen::Vector2d(hi[0], lo[1]))};
}

ExperimentResult run(const config::Config& cfg, std::ostream* log) {
  if (!cfg.data.simulate) throw InputError("experiment needs a data.simulate section");
  if (cfg.experiment.models.empty()) throw InputError("experiment needs at least one model");
  const auto& sim = *cfg.data.simulate;
  const int reps = std::max(1, cfg.experiment.replicates);
  const auto n_models = cfg.experiment.models.size();

  ExperimentResult result;
  result.p = sim.truth.spec.params.p;
  for (const auto& m : cfg.experiment.models) {
    if (m.spec.params.p != result.p) throw InputError("model '" + m.name + "' has the wrong process count");
  }
  std::vector<SimulatedSplit> splits(static_cast<std::size_t>(reps));
  const int threads = resolve_threads(cfg.threads);
  parallel_for(splits.size(), threads, [&](std::size_t r) {
    splits[r] = simulate_split(sim, derive_seed(cfg.seed, r));
  });

  result.runs.resize(static_cast<std::size_t>(reps) * n_models);
  parallel_for(result.runs.size(), threads, [&](std::size_t job) {
    const std::size_t r = job / n_models;
    const auto& model = cfg.experiment.models[job % n_models];
    const SimulatedSplit& split = splits[r];
    FitOptions fo = cfg.fit;
    fo.fixed = model.fixed;
    fo.seed = derive_seed(cfg.seed, 1000 + r);
    fo.threads = 1;
    if (cfg.experiment.anchors == config::AnchorRule::kCorners) {
      fo.anchors = corner_anchors(split.train.processes[0].locations, sim.lo, sim.hi);
    }
    ModelRun run;
    run.model = model.name;
    run.replicate = static_cast<int>(r);
    run.seed = derive_seed(cfg.seed, r);
    run.fit = fit(model.spec, split.train, fo);
    const auto anchors = run.fit.homogenized ? std::optional(run.fit.homogenized->anchors) : fo.anchors;
    run.truth_a_tilde = homogenize_fit(sim.truth.spec, split.train, anchors).a_tilde;
    if (run.fit.ok()) {
      const auto queries = queries_for(split.test);
      run.predictions = predict(run.fit, split.train, queries);
      const bool obs = cfg.experiment.observation_scale;
      run.scores =
          score(run.predictions, obs ? split.test.stacked_z() : split.test_latent, result.p, obs);
    }
    result.runs[job] = std::move(run);
  });
  if (log) {
    for (const auto& run : result.runs) {
      *log << run.model << " replicate " << run.replicate + 1 << ": reml " << run.fit.reml_value
           << ", " << run.fit.convergence.status << " after " << run.fit.convergence.iterations
           << " iterations, " << run.fit.seconds << " s\n";
    }
  }
  return result;
}

namespace {

void score_header(std::ostream& out, int p) {
  for (int i = 1; i <= p; ++i) out << ",rmspe_" << i << ",crps_" << i;
}

}  // namespace

void write_runs(std::ostream& out, const ExperimentResult& result) {
  out << "model,replicate,seed";
  score_header(out, result.p);
  out << ",aic,reml,time_s\n";
  for (const auto& run : result.runs) {
    out << run.model << ',' << run.replicate + 1 << ',' << run.seed;
    for (int i = 0; i < result.p; ++i) {
      const bool have = run.scores.rmspe.size() == result.p;
      out << ',' << io::format_double(have ? run.scores.rmspe[i] : std::nan(""));
      out << ',' << io::format_double(have ? run.scores.crps[i] : std::nan(""));
    }
    out << ',' << io::format_double(run.fit.aic) << ',' << io::format_double(run.fit.reml_value)
        << ',' << io::format_double(run.fit.seconds) << '\n';
  }
}

void write_summary(std::ostream& out, const ExperimentResult& result) {
  out << "model";
  score_header(out, result.p);
  out << ",aic,time_s\n";
  std::vector<std::string> order;
  for (const auto& run : result.runs) {
    if (std::find(order.begin(), order.end(), run.model) == order.end()) order.push_back(run.model);
  }
  for (const auto& name : order) {
    Eigen::VectorXd rm = Eigen::VectorXd::Zero(result.p), cr = rm;
    double aic = 0.0, secs = 0.0;
    int n = 0;
    for (const auto& run : result.runs) {
      if (run.model != name || run.scores.rmspe.size() != result.p) continue;
      rm += run.scores.rmspe;
      cr += run.scores.crps;
      aic += run.fit.aic;
      secs += run.fit.seconds;
      ++n;
    }
    out << name;
    for (int i = 0; i < result.p; ++i) {
      out << ',' << io::format_double(n ? rm[i] / n : std::nan("")) << ','
          << io::format_double(n ? cr[i] / n : std::nan(""));
    }
    out << ',' << io::format_double(n ? aic / n : std::nan("")) << ','
        << io::format_double(n ? secs / n : std::nan("")) << '\n';
  }
}

std::string prediction_plot_script(const std::string& predictions_csv) {
  return R"(#!/usr/bin/env python3
# Maps of predictive means and standard errors per process.
import csv, os, sys
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = os.path.join(here, ")" + predictions_csv + R"(")
rows = list(csv.DictReader(open(path)))
procs = sorted({int(r["process_id"]) for r in rows})
fig, axes = plt.subplots(len(procs), 2, figsize=(9, 4 * len(procs)), squeeze=False)
for k, pid in enumerate(procs):
    sel = [r for r in rows if int(r["process_id"]) == pid]
    x = [float(r["x"]) for r in sel]
    y = [float(r["y"]) for r in sel]
    for j, (col, title) in enumerate([("mean", "prediction"), ("sd", "prediction s.e.")]):
        ax = axes[k][j]
        sc = ax.scatter(x, y, c=[float(r[col]) for r in sel], s=12, marker="s", cmap="viridis")
        ax.set_title("process %d: %s" % (pid, title))
        ax.set_aspect("equal")
        fig.colorbar(sc, ax=ax)
fig.tight_layout()
out = os.path.splitext(path)[0] + ".png"
fig.savefig(out, dpi=120)
print(out)
)";
}

std::string warped_locations_plot_script(const std::string& homogenized_csv) {
  return R"(#!/usr/bin/env python3
# Homogenized warped locations, colored by their geographic coordinates.
import csv, os
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

here = os.path.dirname(os.path.abspath(__file__))
path = os.path.join(here, ")" + homogenized_csv + R"(")
rows = [r for r in csv.DictReader(open(path)) if r["process_id"] == "1"]
fig, axes = plt.subplots(1, 2, figsize=(10, 4.5))
for ax, col in zip(axes, ["x", "y"]):
    sc = ax.scatter([float(r["hx"]) for r in rows], [float(r["hy"]) for r in rows],
                    c=[float(r[col]) for r in rows], s=8, cmap="coolwarm")
    ax.set_title("warped locations colored by " + col)
    ax.set_aspect("equal")
    fig.colorbar(sc, ax=ax)
fig.tight_layout()
out = os.path.splitext(path)[0] + ".png"
fig.savefig(out, dpi=120)
print(out)
)";
}

}  // namespace warpfield::experiment
