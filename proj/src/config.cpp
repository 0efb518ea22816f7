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

#include "warpfield/config.hpp"

#include <fstream>

#include "warpfield/errors.hpp"
#include "warpfield/params.hpp"

namespace warpfield::config {
namespace {

void allow_keys(const Json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw InputError(where + ": expected an object");
  for (auto it = obj.begin(); it != obj.end(); ++it) {
    bool known = false;
    for (const char* k : keys) known = known || it.key() == k;
    if (!known) throw InputError(where + ": unknown key '" + it.key() + "'");
  }
}

template <class T>
T get(const Json& obj, const char* key, const std::string& where, T fallback) {
  if (!obj.contains(key)) return fallback;
  try {
    return obj.at(key).get<T>();
  } catch (const Json::exception&) {
    throw InputError(where + "." + key + ": wrong type");
  }
}

Eigen::VectorXd vector_of(const Json& v, const std::string& where) {
  if (!v.is_array()) throw InputError(where + ": expected an array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t k = 0; k < v.size(); ++k) {
    if (!v[k].is_number()) throw InputError(where + ": expected numbers");
    out[static_cast<Eigen::Index>(k)] = v[k].get<double>();
  }
  return out;
}

Eigen::MatrixXd matrix_of(const Json& v, const std::string& where) {
  if (!v.is_array() || v.empty()) throw InputError(where + ": expected a non-empty array of rows");
  const auto rows = static_cast<Eigen::Index>(v.size());
  const Eigen::VectorXd first = vector_of(v[0], where);
  Eigen::MatrixXd out(rows, first.size());
  for (Eigen::Index r = 0; r < rows; ++r) {
    const Eigen::VectorXd row = vector_of(v[static_cast<std::size_t>(r)], where);
    if (row.size() != first.size()) throw InputError(where + ": ragged matrix");
    out.row(r) = row.transpose();
  }
  return out;
}

Eigen::VectorXd sized(const Json& obj, const char* key, const std::string& where, int p,
                      double fallback) {
  if (!obj.contains(key)) return Eigen::VectorXd::Constant(p, fallback);
  Eigen::VectorXd v = vector_of(obj.at(key), where + "." + key);
  if (v.size() != p) throw InputError(where + "." + key + ": expected " + std::to_string(p) + " values");
  return v;
}

Eigen::Vector2d point2(const Json& v, const std::string& where) {
  const Eigen::VectorXd x = vector_of(v, where);
  if (x.size() != 2) throw InputError(where + ": expected two coordinates");
  return x;
}

std::complex<double> complex_of(const Json& obj, const char* key, const std::string& where,
                                std::complex<double> fallback) {
  if (!obj.contains(key)) return fallback;
  const Eigen::VectorXd v = vector_of(obj.at(key), where + "." + key);
  if (v.size() != 2) throw InputError(where + "." + key + ": expected [re, im]");
  return {v[0], v[1]};
}

Json vec_json(const Eigen::VectorXd& v) {
  Json out = Json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) out.push_back(v[k]);
  return out;
}

Json mat_json(const Eigen::MatrixXd& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vec_json(m.row(r).transpose()));
  return out;
}

std::string resolve(const std::filesystem::path& base, const std::string& path) {
  const std::filesystem::path p(path);
  if (p.is_absolute() || base.empty()) return p.string();
  return (base / p).lexically_normal().string();
}

// A unit descriptor may expand to several units (radial grids).
std::vector<warp::WarpUnit> units_from_json(const Json& doc, const std::string& where) {
  if (!doc.is_object() || !doc.contains("type")) throw InputError(where + ": unit needs a 'type'");
  const std::string type = get<std::string>(doc, "type", where, "");
  if (type == "radial_grid") {
    allow_keys(doc, where, {"type", "resolution", "lo", "hi", "precision", "weights"});
    const int res = get<int>(doc, "resolution", where, 3);
    if (res < 1) throw InputError(where + ".resolution must be positive");
    const Eigen::Vector2d lo = doc.contains("lo") ? point2(doc["lo"], where + ".lo") : Eigen::Vector2d(-0.5, -0.5);
    const Eigen::Vector2d hi = doc.contains("hi") ? point2(doc["hi"], where + ".hi") : Eigen::Vector2d(0.5, 0.5);
    const double spacing = (hi - lo).maxCoeff() / res;
    const double precision = get<double>(doc, "precision", where, 1.0 / (2.0 * spacing * spacing));
    auto units = warp::make_radial_grid(res, lo, hi, precision);
    if (doc.contains("weights")) {
      const Eigen::VectorXd w = vector_of(doc["weights"], where + ".weights");
      if (w.size() != static_cast<Eigen::Index>(units.size())) {
        throw InputError(where + ".weights: expected resolution^2 values");
      }
      for (std::size_t k = 0; k < units.size(); ++k) {
        std::get<warp::RadialBasis>(units[k]).weight = w[static_cast<Eigen::Index>(k)];
      }
    }
    return units;
  }
  return {unit_from_json(doc, where)};
}

std::vector<warp::WarpUnit> layers_from_json(const Json& doc, const std::string& where) {
  if (!doc.is_array()) throw InputError(where + ": expected an array of units");
  std::vector<warp::WarpUnit> layers;
  for (std::size_t k = 0; k < doc.size(); ++k) {
    for (auto& u : units_from_json(doc[k], where + "[" + std::to_string(k) + "]")) layers.push_back(std::move(u));
  }
  return layers;
}

Json layers_json(const warp::WarpFunction& f) {
  Json out = Json::array();
  for (const auto& u : f.layers) out.push_back(unit_to_json(u));
  return out;
}

covariance::KernelEvaluation kernel_from(const std::string& s, const std::string& where) {
  if (s == "auto") return covariance::KernelEvaluation::kAuto;
  if (s == "exact") return covariance::KernelEvaluation::kExact;
  if (s == "tabulated") return covariance::KernelEvaluation::kTabulated;
  throw InputError(where + ": kernel must be auto, exact or tabulated");
}

}  // namespace

warp::WarpUnit unit_from_json(const Json& doc, const std::string& where) {
  const std::string type = get<std::string>(doc, "type", where, "");
  if (type == "identity") {
    allow_keys(doc, where, {"type"});
    return warp::Identity{};
  }
  if (type == "axial") {
    allow_keys(doc, where,
               {"type", "axis", "basis", "lo", "hi", "steepness", "initial_weight", "weights", "centers"});
    const int axis = get<int>(doc, "axis", where, 0);
    if (doc.contains("centers")) {
      warp::AxialWarp u;
      u.axis = axis;
      const Eigen::VectorXd w = vector_of(doc.at("weights"), where + ".weights");
      const Eigen::VectorXd c = vector_of(doc.at("centers"), where + ".centers");
      const Eigen::VectorXd s = vector_of(doc.at("steepness"), where + ".steepness");
      u.weights.assign(w.data(), w.data() + w.size());
      u.centers.assign(c.data(), c.data() + c.size());
      u.steepness.assign(s.data(), s.data() + s.size());
      return u;
    }
    const int basis = get<int>(doc, "basis", where, 10);
    const double lo = get<double>(doc, "lo", where, -0.5);
    const double hi = get<double>(doc, "hi", where, 0.5);
    const double steep = get<double>(doc, "steepness", where, 5.0 * (basis - 1) / (hi - lo));
    auto u = warp::make_axial(axis, basis, lo, hi, steep, get<double>(doc, "initial_weight", where, 1e-3));
    if (doc.contains("weights")) {
      const Eigen::VectorXd w = vector_of(doc["weights"], where + ".weights");
      if (w.size() != basis) throw InputError(where + ".weights: expected 'basis' values");
      u.weights.assign(w.data(), w.data() + w.size());
    }
    return u;
  }
  if (type == "radial") {
    allow_keys(doc, where, {"type", "weight", "center", "precision"});
    warp::RadialBasis u;
    u.weight = get<double>(doc, "weight", where, 0.0);
    u.center = doc.contains("center") ? Location(vector_of(doc["center"], where + ".center"))
                                      : Location(Eigen::Vector2d::Zero());
    u.precision = get<double>(doc, "precision", where, 1.0);
    return u;
  }
  if (type == "mobius") {
    allow_keys(doc, where, {"type", "a", "b", "c", "d"});
    warp::Mobius u;
    u.a = complex_of(doc, "a", where, {1.0, 0.0});
    u.b = complex_of(doc, "b", where, {0.0, 0.0});
    u.c = complex_of(doc, "c", where, {0.0, 0.0});
    u.d = complex_of(doc, "d", where, {1.0, 0.0});
    return u;
  }
  if (type == "affine") {
    allow_keys(doc, where, {"type", "matrix", "shift"});
    warp::Affine u = warp::make_identity_affine(2);
    if (doc.contains("matrix")) u.matrix = matrix_of(doc["matrix"], where + ".matrix");
    if (doc.contains("shift")) u.shift = vector_of(doc["shift"], where + ".shift");
    return u;
  }
  if (type == "translation") {
    allow_keys(doc, where, {"type", "shift"});
    return warp::make_translation(doc.contains("shift") ? Location(vector_of(doc["shift"], where + ".shift"))
                                                        : Location(Eigen::Vector2d::Zero()));
  }
  throw InputError(where + ": unknown unit type '" + type + "'");
}

Json unit_to_json(const warp::WarpUnit& unit) {
  struct Visitor {
    Json operator()(const warp::Identity&) const { return {{"type", "identity"}}; }
    Json operator()(const warp::AxialWarp& u) const {
      return {{"type", "axial"}, {"axis", u.axis}, {"weights", u.weights},
              {"steepness", u.steepness}, {"centers", u.centers}};
    }
    Json operator()(const warp::RadialBasis& u) const {
      return {{"type", "radial"}, {"weight", u.weight}, {"center", vec_json(u.center)},
              {"precision", u.precision}};
    }
    Json operator()(const warp::Mobius& u) const {
      auto c = [](std::complex<double> z) { return Json::array({z.real(), z.imag()}); };
      return {{"type", "mobius"}, {"a", c(u.a)}, {"b", c(u.b)}, {"c", c(u.c)}, {"d", c(u.d)}};
    }
    Json operator()(const warp::Affine& u) const {
      return {{"type", "affine"}, {"matrix", mat_json(u.matrix)}, {"shift", vec_json(u.shift)}};
    }
  };
  return std::visit(Visitor{}, unit);
}

ModelConfig parse_model(const Json& doc, const std::string& where) {
  allow_keys(doc, where, {"name", "processes", "covariates", "covariance", "fixed", "warp"});
  ModelConfig out;
  out.name = get<std::string>(doc, "name", where, "model");
  const int p = get<int>(doc, "processes", where, 2);
  if (p < 1) throw InputError(where + ".processes must be positive");
  const int extra = get<int>(doc, "covariates", where, 0);
  if (extra < 0) throw InputError(where + ".covariates must be non-negative");

  auto params = ParsimoniousMaternParams::defaults(p);
  params.tau = Eigen::VectorXd::Constant(p, 0.1);
  if (doc.contains("covariance")) {
    const Json& c = doc["covariance"];
    const std::string cw = where + ".covariance";
    allow_keys(c, cw, {"nu", "scale", "sigma", "rho", "tau"});
    params.nu = sized(c, "nu", cw, p, 1.0);
    params.scale = get<double>(c, "scale", cw, 1.0);
    params.sigma = sized(c, "sigma", cw, p, 1.0);
    params.tau = sized(c, "tau", cw, p, 0.1);
    if (c.contains("rho")) {
      params.rho = matrix_of(c["rho"], cw + ".rho");
      if (params.rho.rows() != p || params.rho.cols() != p) {
        throw InputError(cw + ".rho: expected a p x p matrix");
      }
    }
  }
  try {
    covariance::validate(params, 2);
  } catch (const Error& e) {
    throw InputError(where + ".covariance: " + e.what());
  }

  out.spec = ModelSpec::stationary(params, 1 + extra);
  if (doc.contains("warp")) {
    const Json& w = doc["warp"];
    const std::string ww = where + ".warp";
    allow_keys(w, ww, {"shared", "aligners"});
    if (w.contains("shared")) out.spec.warps.shared.layers = layers_from_json(w["shared"], ww + ".shared");
    if (w.contains("aligners")) {
      const Json& a = w["aligners"];
      if (!a.is_array() || static_cast<int>(a.size()) != p) {
        throw InputError(ww + ".aligners: expected one unit list per process");
      }
      for (int i = 0; i < p; ++i) {
        out.spec.warps.aligners[i].layers =
            layers_from_json(a[static_cast<std::size_t>(i)], ww + ".aligners[" + std::to_string(i) + "]");
      }
    }
  }
  try {
    warp::validate(out.spec.warps, 2);
  } catch (const Error& e) {
    throw InputError(where + ".warp: " + e.what());
  }
  if (doc.contains("fixed")) {
    for (const auto& name : doc["fixed"]) {
      if (!name.is_string()) throw InputError(where + ".fixed: expected parameter names");
      out.fixed.insert(name.get<std::string>());
    }
    // Reject typos: every fixed name must exist in the unconstrained layout.
    const ParamLayout all(out.spec, {}, 2);
    std::set<std::string> known;
    for (const auto& name : all.names()) {
      if (name.find('.') == std::string::npos) known.insert(name);
    }
    known.insert("shared");
    for (int i = 1; i < p; ++i) known.insert(aligner_name(i));
    for (const auto& name : out.fixed) {
      if (!known.count(name)) throw InputError(where + ".fixed: unknown parameter '" + name + "'");
    }
  }
  return out;
}

Json model_to_json(const ModelSpec& spec, const std::set<std::string>& fixed) {
  const auto& prm = spec.params;
  Json doc;
  doc["processes"] = prm.p;
  doc["covariates"] = spec.q - 1;
  doc["covariance"] = {{"nu", vec_json(prm.nu)},       {"scale", prm.scale},
                       {"sigma", vec_json(prm.sigma)}, {"rho", mat_json(prm.rho)},
                       {"tau", vec_json(prm.tau)}};
  Json aligners = Json::array();
  for (const auto& a : spec.warps.aligners) aligners.push_back(layers_json(a));
  doc["warp"] = {{"shared", layers_json(spec.warps.shared)}, {"aligners", aligners}};
  if (!fixed.empty()) doc["fixed"] = fixed;
  return doc;
}

Config parse(const Json& doc, const std::filesystem::path& base) {
  allow_keys(doc, "config",
             {"seed", "threads", "data", "model", "fit", "bootstrap", "output", "fit_report",
              "queries_csv", "experiment"});
  Config cfg;
  cfg.seed = get<std::uint64_t>(doc, "seed", "config", 1);
  cfg.threads = get<int>(doc, "threads", "config", 0);

  if (doc.contains("data")) {
    const Json& d = doc["data"];
    allow_keys(d, "data", {"csv", "truth_csv", "simulate"});
    if (d.contains("csv")) cfg.data.csv = resolve(base, get<std::string>(d, "csv", "data", ""));
    if (d.contains("truth_csv")) {
      cfg.data.truth_csv = resolve(base, get<std::string>(d, "truth_csv", "data", ""));
    }
    if (d.contains("simulate")) {
      const Json& s = d["simulate"];
      const std::string sw = "data.simulate";
      allow_keys(s, sw, {"lo", "hi", "resolution", "sample", "test", "block", "model", "beta"});
      SimulationConfig sim;
      if (s.contains("lo")) sim.lo = point2(s["lo"], sw + ".lo");
      if (s.contains("hi")) sim.hi = point2(s["hi"], sw + ".hi");
      sim.resolution = get<int>(s, "resolution", sw, 101);
      sim.sample = get<int>(s, "sample", sw, 1000);
      sim.test = get<int>(s, "test", sw, 0);
      if (sim.resolution < 2 || sim.sample < 1 || sim.test < 0) {
        throw InputError(sw + ": resolution >= 2, sample >= 1 and test >= 0 required");
      }
      if (s.contains("block")) {
        allow_keys(s["block"], sw + ".block", {"lo", "hi"});
        sim.block = std::make_pair(point2(s["block"].at("lo"), sw + ".block.lo"),
                                   point2(s["block"].at("hi"), sw + ".block.hi"));
      }
      if (!s.contains("model")) throw InputError(sw + ": needs a 'model' to simulate from");
      sim.truth = parse_model(s["model"], sw + ".model");
      const auto pq = static_cast<Eigen::Index>(sim.truth.spec.params.p) * sim.truth.spec.q;
      sim.beta = Eigen::VectorXd::Zero(pq);
      if (s.contains("beta")) {
        sim.beta = vector_of(s["beta"], sw + ".beta");
        if (sim.beta.size() != pq) throw InputError(sw + ".beta: expected p * q values");
      }
      cfg.data.simulate = std::move(sim);
    }
  }
  if (doc.contains("model")) cfg.model = parse_model(doc["model"], "model");

  if (doc.contains("fit")) {
    const Json& f = doc["fit"];
    allow_keys(f, "fit",
               {"max_iters", "tol_grad", "tol_rel_f", "restarts", "staged", "warp_jitter", "kernel",
                "homogenize"});
    cfg.fit.max_iters = get<int>(f, "max_iters", "fit", cfg.fit.max_iters);
    cfg.fit.tol_grad = get<double>(f, "tol_grad", "fit", cfg.fit.tol_grad);
    cfg.fit.tol_rel_f = get<double>(f, "tol_rel_f", "fit", cfg.fit.tol_rel_f);
    cfg.fit.restarts = get<int>(f, "restarts", "fit", cfg.fit.restarts);
    cfg.fit.staged = get<bool>(f, "staged", "fit", cfg.fit.staged);
    cfg.fit.warp_jitter = get<double>(f, "warp_jitter", "fit", cfg.fit.warp_jitter);
    cfg.fit.homogenize = get<bool>(f, "homogenize", "fit", cfg.fit.homogenize);
    cfg.fit.kernel = kernel_from(get<std::string>(f, "kernel", "fit", "auto"), "fit.kernel");
  }
  cfg.fit.seed = cfg.seed;
  cfg.fit.threads = cfg.threads;
  if (cfg.model) cfg.fit.fixed = cfg.model->fixed;

  if (doc.contains("bootstrap")) {
    const Json& b = doc["bootstrap"];
    allow_keys(b, "bootstrap", {"replicates", "alpha", "max_iters"});
    cfg.bootstrap.replicates = get<int>(b, "replicates", "bootstrap", cfg.bootstrap.replicates);
    cfg.bootstrap.alpha = get<double>(b, "alpha", "bootstrap", cfg.bootstrap.alpha);
    cfg.bootstrap.max_iters = get<int>(b, "max_iters", "bootstrap", cfg.bootstrap.max_iters);
    if (cfg.bootstrap.replicates < 1 || !(cfg.bootstrap.alpha > 0.0 && cfg.bootstrap.alpha < 1.0)) {
      throw InputError("bootstrap: replicates >= 1 and 0 < alpha < 1 required");
    }
  }
  if (doc.contains("output")) {
    const Json& o = doc["output"];
    allow_keys(o, "output", {"directory", "plots"});
    cfg.output.directory = resolve(base, get<std::string>(o, "directory", "output", "out"));
    cfg.output.plots = get<bool>(o, "plots", "output", false);
  } else {
    cfg.output.directory = resolve(base, "out");
  }
  if (doc.contains("fit_report")) {
    cfg.fit_report = resolve(base, get<std::string>(doc, "fit_report", "config", ""));
  }
  if (doc.contains("queries_csv")) {
    cfg.queries_csv = resolve(base, get<std::string>(doc, "queries_csv", "config", ""));
  }
  if (doc.contains("experiment")) {
    const Json& e = doc["experiment"];
    allow_keys(e, "experiment", {"models", "replicates", "observation_scale", "anchors"});
    cfg.experiment.replicates = get<int>(e, "replicates", "experiment", 1);
    cfg.experiment.observation_scale = get<bool>(e, "observation_scale", "experiment", false);
    const std::string anchors = get<std::string>(e, "anchors", "experiment", "farthest");
    if (anchors == "corners") {
      cfg.experiment.anchors = AnchorRule::kCorners;
    } else if (anchors != "farthest") {
      throw InputError("experiment.anchors must be 'farthest' or 'corners'");
    }
    if (e.contains("models")) {
      if (!e["models"].is_array()) throw InputError("experiment.models: expected an array");
      for (std::size_t k = 0; k < e["models"].size(); ++k) {
        cfg.experiment.models.push_back(
            parse_model(e["models"][k], "experiment.models[" + std::to_string(k) + "]"));
      }
    }
  }
  if (cfg.experiment.models.empty() && cfg.model) cfg.experiment.models.push_back(*cfg.model);
  return cfg;
}

Config load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read config " + path);
  Json doc;
  try {
    doc = Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw InputError(std::string("config is not valid JSON: ") + e.what());
  }
  return parse(doc, std::filesystem::absolute(path).parent_path());
}

Json fit_report(const FitResult& fit) {
  Json doc;
  doc["model"] = model_to_json(fit.spec);
  doc["beta"] = vec_json(fit.beta.beta);
  Json theta = Json::object();
  for (std::size_t k = 0; k < fit.names.size(); ++k) theta[fit.names[k]] = fit.theta[static_cast<Eigen::Index>(k)];
  doc["theta"] = theta;
  Json natural = Json::object();
  for (const auto& [name, value] : natural_parameters(fit.spec.params)) natural[name] = value;
  doc["natural"] = natural;
  doc["reml"] = fit.reml_value;
  doc["aic"] = fit.aic;
  doc["k"] = fit.k;
  doc["convergence"] = {{"iterations", fit.convergence.iterations},
                        {"evaluations", fit.convergence.evaluations},
                        {"gradient_norm", fit.convergence.gradient_norm},
                        {"status", fit.convergence.status}};
  doc["trace"] = fit.trace;
  if (fit.homogenized) {
    const auto& h = *fit.homogenized;
    doc["a_tilde"] = h.a_tilde;
    doc["homogenization"] = {{"anchors", {h.anchors.k + 1, h.anchors.l + 1, h.anchors.m + 1}},
                             {"origin", vec_json(h.frame.origin)},
                             {"scale", h.frame.scale},
                             {"angle", h.frame.angle},
                             {"reflection", h.frame.reflection}};
  }
  doc["diagnostics"] = fit.diagnostics;
  doc["seconds"] = fit.seconds;
  return doc;
}

FitResult read_fit_report(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read fit report " + path);
  Json doc;
  try {
    doc = Json::parse(in);
    FitResult fit;
    const ModelConfig model = parse_model(doc.at("model"), "fit_report.model");
    fit.spec = model.spec;
    fit.beta.beta = vector_of(doc.at("beta"), "fit_report.beta");
    fit.reml_value = doc.value("reml", 0.0);
    fit.aic = doc.value("aic", 0.0);
    fit.k = doc.value("k", 0);
    if (doc.contains("convergence")) fit.convergence.status = doc["convergence"].value("status", "");
    if (doc.contains("homogenization")) {
      const Json& h = doc["homogenization"];
      HomogenizationResult hr;
      const auto a = h.at("anchors").get<std::vector<std::size_t>>();
      if (a.size() != 3 || a[0] < 1 || a[1] < 1 || a[2] < 1) {
        throw InputError("fit report anchors must be three 1-based indices");
      }
      hr.anchors = {a[0] - 1, a[1] - 1, a[2] - 1};
      hr.frame.origin = point2(h.at("origin"), "homogenization.origin");
      hr.frame.scale = h.at("scale").get<double>();
      hr.frame.angle = h.at("angle").get<double>();
      hr.frame.reflection = h.at("reflection").get<double>();
      hr.a_tilde = doc.value("a_tilde", 0.0);
      fit.homogenized = std::move(hr);
    }
    return fit;
  } catch (const Json::exception& e) {
    throw InputError("malformed fit report " + path + ": " + e.what());
  }
}

}  // namespace warpfield::config
