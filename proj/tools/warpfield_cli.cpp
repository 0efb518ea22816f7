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

// Command-line front end: simulate | fit | predict | bootstrap | homogenize | experiment.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "warpfield/bootstrap.hpp"
#include "warpfield/config.hpp"
#include "warpfield/errors.hpp"
#include "warpfield/experiment.hpp"
#include "warpfield/inference.hpp"
#include "warpfield/io.hpp"
#include "warpfield/predict.hpp"

namespace fs = std::filesystem;
using namespace warpfield;

namespace {

constexpr int kUsageError = 1;
constexpr int kNumericalError = 2;

struct Options {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<int> threads;
};

config::Config load(const Options& opts) {
  config::Config cfg = config::load(opts.config);
  if (opts.seed) {
    cfg.seed = *opts.seed;
    cfg.fit.seed = *opts.seed;
  }
  if (opts.out) cfg.output.directory = fs::absolute(*opts.out).string();
  if (opts.threads) {
    cfg.threads = *opts.threads;
    cfg.fit.threads = *opts.threads;
  }
  fs::create_directories(cfg.output.directory);
  return cfg;
}

std::string out_path(const config::Config& cfg, const std::string& name) {
  return (fs::path(cfg.output.directory) / name).string();
}

std::ofstream open_out(const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write " + path);
  return out;
}

void write_text(const std::string& path, const std::string& text) { open_out(path) << text; }

const config::ModelConfig& require_model(const config::Config& cfg) {
  if (!cfg.model) throw InputError("config needs a 'model' section");
  return *cfg.model;
}

// Observed data: the CSV named in the config, or a fresh simulation.
MultivariateDataset load_data(const config::Config& cfg, int p) {
  if (cfg.data.csv) return io::read_dataset(*cfg.data.csv, p);
  if (cfg.data.simulate) return experiment::simulate_split(*cfg.data.simulate, cfg.seed).train;
  throw InputError("config needs data.csv or data.simulate");
}

FitResult load_fit(const config::Config& cfg) {
  const std::string path = cfg.fit_report ? *cfg.fit_report : out_path(cfg, "fit_report.json");
  return config::read_fit_report(path);
}

int cmd_simulate(const config::Config& cfg) {
  if (!cfg.data.simulate) throw InputError("simulate needs a data.simulate section");
  const auto split = experiment::simulate_split(*cfg.data.simulate, cfg.seed);
  auto data = open_out(out_path(cfg, "data.csv"));
  io::write_dataset(data, split.train);
  auto truth = open_out(out_path(cfg, "truth.csv"));
  io::write_truth(truth, split.truth);
  std::cerr << "simulated " << split.train.size() << " observations and "
            << split.test.size() << " held-out values into " << cfg.output.directory << "\n";
  return 0;
}

int cmd_fit(const config::Config& cfg) {
  const auto& model = require_model(cfg);
  const MultivariateDataset ds = load_data(cfg, model.spec.params.p);
  const FitResult result = fit(model.spec, ds, cfg.fit);
  open_out(out_path(cfg, "fit_report.json")) << config::fit_report(result).dump(2) << "\n";
  if (result.homogenized) {
    auto h = open_out(out_path(cfg, "homogenized.csv"));
    io::write_homogenized(h, ds, *result.homogenized);
    if (cfg.output.plots) {
      write_text(out_path(cfg, "plot_warped.py"),
                 experiment::warped_locations_plot_script("homogenized.csv"));
    }
  }
  std::cerr << "fit " << result.convergence.status << ": reml " << result.reml_value << ", aic "
            << result.aic << ", " << result.convergence.iterations << " iterations, "
            << result.seconds << " s\n";
  return result.ok() ? 0 : kNumericalError;
}

int cmd_predict(const config::Config& cfg) {
  const FitResult fitted = load_fit(cfg);
  const int p = fitted.spec.params.p;
  const MultivariateDataset ds = load_data(cfg, p);

  MultivariateDataset targets;
  std::optional<Eigen::VectorXd> truth;
  bool observation_scale = false;
  if (cfg.queries_csv) {
    targets = io::read_dataset(*cfg.queries_csv, p);
    if (targets.has_observations() && targets.size() > 0) {
      truth = targets.stacked_z();
      observation_scale = true;
    }
  } else if (cfg.data.truth_csv) {
    Eigen::VectorXd latent;
    targets = io::held_out(io::read_truth(*cfg.data.truth_csv, p), &latent);
    truth = latent;
  } else {
    throw InputError("predict needs queries_csv or data.truth_csv");
  }
  const auto queries = queries_for(targets);
  const PredictionResult pred = Predictor(fitted.spec, fitted.beta, ds).predict(queries);
  auto out = open_out(out_path(cfg, "predictions.csv"));
  io::write_predictions(out, pred);
  if (cfg.output.plots) {
    write_text(out_path(cfg, "plot_predictions.py"),
               experiment::prediction_plot_script("predictions.csv"));
  }
  if (truth && pred.size() > 0) {
    const Scores s = score(pred, *truth, p, observation_scale);
    auto sc = open_out(out_path(cfg, "scores.csv"));
    io::write_scores(sc, s);
    io::write_scores(std::cout, s);
  }
  std::cerr << "predicted " << pred.size() << " values\n";
  return 0;
}

int cmd_bootstrap(const config::Config& cfg) {
  FitResult fitted = load_fit(cfg);
  const MultivariateDataset ds = load_data(cfg, fitted.spec.params.p);
  BootstrapOptions bo;
  bo.replicates = cfg.bootstrap.replicates;
  bo.alpha = cfg.bootstrap.alpha;
  bo.seed = cfg.seed;
  bo.threads = cfg.threads;
  bo.fit = cfg.fit;
  bo.fit.max_iters = cfg.bootstrap.max_iters;
  if (cfg.model) bo.fit.fixed = cfg.model->fixed;
  const BootstrapResult result = bootstrap(fitted, ds, bo);
  auto reps = open_out(out_path(cfg, "bootstrap.csv"));
  io::write_bootstrap(reps, result);
  auto summary = open_out(out_path(cfg, "bootstrap_summary.csv"));
  io::write_bootstrap_summary(summary, result);
  io::write_bootstrap_summary(std::cout, result);
  std::cerr << result.replicates.size() << " replicates, " << result.failed << " failed\n";
  return 0;
}

int cmd_homogenize(const config::Config& cfg) {
  const FitResult fitted = load_fit(cfg);
  const MultivariateDataset ds = load_data(cfg, fitted.spec.params.p);
  std::optional<warp::HomogenizationAnchors> anchors;
  if (fitted.homogenized) anchors = fitted.homogenized->anchors;
  const HomogenizationResult h = homogenize_fit(fitted.spec, ds, anchors);
  auto out = open_out(out_path(cfg, "homogenized.csv"));
  io::write_homogenized(out, ds, h);
  if (cfg.output.plots) {
    write_text(out_path(cfg, "plot_warped.py"),
               experiment::warped_locations_plot_script("homogenized.csv"));
  }
  std::cout << "a_tilde," << io::format_double(h.a_tilde) << "\n";
  return 0;
}

int cmd_experiment(const config::Config& cfg) {
  const auto result = experiment::run(cfg, &std::cerr);
  auto runs = open_out(out_path(cfg, "experiment_runs.csv"));
  experiment::write_runs(runs, result);
  auto summary = open_out(out_path(cfg, "experiment_summary.csv"));
  experiment::write_summary(summary, result);
  experiment::write_summary(std::cout, result);
  if (cfg.output.plots) {
    for (const auto& run : result.runs) {
      if (run.replicate != 0) continue;
      const std::string csv = "predictions_" + run.model + ".csv";
      auto out = open_out(out_path(cfg, csv));
      io::write_predictions(out, run.predictions);
      write_text(out_path(cfg, "plot_predictions_" + run.model + ".py"),
                 experiment::prediction_plot_script(csv));
    }
  }
  for (const auto& run : result.runs) {
    if (!run.fit.ok()) return kNumericalError;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multivariate deep compositional spatial models"};
  app.require_subcommand(1);
  Options opts;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", opts.config, "JSON configuration file")->required()->check(CLI::ExistingFile);
    sub->add_option("--seed", opts.seed, "Override the configured seed");
    sub->add_option("--out", opts.out, "Override the output directory");
    sub->add_option("--threads", opts.threads, "Worker threads (default: WARPFIELD_THREADS or all cores)")
        ->check(CLI::PositiveNumber);
  };
  struct Command {
    const char* name;
    const char* help;
    int (*run)(const config::Config&);
  };
  const Command commands[] = {
      {"simulate", "Simulate observed data and the noise-free truth on a grid", cmd_simulate},
      {"fit", "Fit a model by restricted maximum likelihood", cmd_fit},
      {"predict", "Cokriging predictions (and scores when the truth is known)", cmd_predict},
      {"bootstrap", "Parametric bootstrap intervals for identifiable quantities", cmd_bootstrap},
      {"homogenize", "Warped locations in the homogenized frame", cmd_homogenize},
      {"experiment", "Simulate, fit every model, predict and score, repeatedly", cmd_experiment},
  };
  int (*selected)(const config::Config&) = nullptr;
  for (const auto& c : commands) {
    auto* sub = app.add_subcommand(c.name, c.help);
    add_common(sub);
    sub->callback([&selected, run = c.run] { selected = run; });
  }
  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kUsageError;
  }
  try {
    const config::Config cfg = load(opts);
    return selected(cfg);
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kUsageError;
  } catch (const Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return kNumericalError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kNumericalError;
  }
}
