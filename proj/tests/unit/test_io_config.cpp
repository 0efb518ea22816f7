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


#include <filesystem>
#include <fstream>
#include <sstream>

#include <doctest.h>

#include "../support/instances.hpp"
#include "warpfield/config.hpp"
#include "warpfield/errors.hpp"
#include "warpfield/experiment.hpp"
#include "warpfield/io.hpp"

using namespace warpfield;
using config::Json;

namespace {

io::CsvTable table(const std::string& text) {
  std::istringstream in(text);
  return io::read_csv(in);
}

Json base_config() {
  return Json::parse(R"({
    "seed": 4,
    "data": {"simulate": {"resolution": 5, "sample": 10,
      "model": {"processes": 2, "covariance": {"nu": [0.5, 1.5], "sigma": [1.0, 0.9],
        "rho": [[1, 0.45], [0.45, 1]], "tau": [0.2, 0.1]}}}},
    "model": {"processes": 2, "warp": {"shared": [{"type": "axial", "axis": 0, "basis": 3}]}},
    "fit": {"max_iters": 50}
  })");
}

}  // namespace

TEST_CASE("dataset CSV round trips exactly") {
  oracle::Draw draw(1);
  auto ds = instances::random_dataset(draw, {7, 4}, 3);
  std::ostringstream out;
  io::write_dataset(out, ds);
  const auto back = io::parse_dataset(table(out.str()));
  REQUIRE(back.p() == 2);
  REQUIRE(back.q() == 3);
  for (int i = 0; i < 2; ++i) {
    CHECK(back.processes[i].locations == ds.processes[i].locations);
    CHECK(back.processes[i].z == ds.processes[i].z);
    CHECK(back.processes[i].covariates == ds.processes[i].covariates);
  }
  CHECK(out.str().rfind("process_id,x,y,z,cov_1,cov_2\n", 0) == 0);
}

TEST_CASE("dataset parsing") {
  const auto ds = io::parse_dataset(table("process_id,x,y,z\n2,0.5,0.5,1.0\n1,0,0,2.0\n2,1,1,3\n"), 3);
  CHECK(ds.p() == 3);
  CHECK(ds.count(0) == 1);
  CHECK(ds.count(1) == 2);
  CHECK(ds.count(2) == 0);
  CHECK(ds.processes[1].z[1] == 3.0);
  CHECK(ds.processes[1].covariates(0, 0) == 1.0);
  const auto targets = io::parse_dataset(table("process_id,x,y\n1,0.1,0.2\n"));
  CHECK(targets.processes[0].z.size() == 0);
  CHECK_THROWS_AS(io::parse_dataset(table("process_id,x\n1,0\n")), InputError);
  CHECK_THROWS_AS(io::parse_dataset(table("process_id,x,y,z\n1,0,abc,1\n")), InputError);
  CHECK_THROWS_AS(io::parse_dataset(table("process_id,x,y,z\n0,0,0,1\n")), InputError);
  CHECK_THROWS_AS(io::parse_dataset(table("process_id,x,y,z\n3,0,0,1\n"), 2), InputError);
  CHECK_THROWS_AS(table("a,b\n1,2,3\n"), InputError);
}

TEST_CASE("output writers use the documented headers") {
  PredictionResult pred;
  std::ostringstream a, b, c;
  io::write_predictions(a, pred);
  CHECK(a.str() == "process_id,x,y,mean,sd,sd_obs\n");
  BootstrapResult boot;
  boot.intervals.push_back({"rho_1_2", 0.3, 0.5, 0.95});
  io::write_bootstrap(b, boot);
  CHECK(b.str() == "replicate,parameter,value\n");
  io::write_bootstrap_summary(c, boot);
  CHECK(c.str() == "parameter,lower,upper,level\nrho_1_2,0.29999999999999999,0.5,0.95\n");
}

TEST_CASE("config parsing") {
  const auto cfg = config::parse(base_config());
  CHECK(cfg.seed == 4);
  REQUIRE(cfg.model.has_value());
  CHECK(cfg.model->spec.params.p == 2);
  CHECK(cfg.model->spec.warps.shared.layers.size() == 1);
  CHECK(cfg.fit.max_iters == 50);
  REQUIRE(cfg.data.simulate.has_value());
  CHECK(cfg.data.simulate->truth.spec.params.rho(0, 1) == 0.45);
}

TEST_CASE("config rejects unknown keys with their path") {
  for (const char* pointer : {"/bogus", "/fit/bogus", "/model/covariance", "/data/simulate/model/covariance/nope"}) {
    Json doc = base_config();
    doc[Json::json_pointer(pointer)] = 1;
    if (std::string(pointer) == "/model/covariance") doc["model"]["covariance"] = {{"bogus", 1}};
    try {
      config::parse(doc);
      FAIL("accepted " << pointer);
    } catch (const InputError& e) {
      CHECK(std::string(e.what()).find("unknown key") != std::string::npos);
    }
  }
}

TEST_CASE("config rejects bad values") {
  Json doc = base_config();
  doc["model"]["warp"]["shared"][0]["type"] = "spiral";
  CHECK_THROWS_AS(config::parse(doc), InputError);
  doc = base_config();
  doc["fit"]["max_iters"] = "many";
  CHECK_THROWS_AS(config::parse(doc), InputError);
  doc = base_config();
  doc["model"]["fixed"] = {"nonexistent"};
  CHECK_THROWS_AS(config::parse(doc), InputError);
}

TEST_CASE("model JSON round trips") {
  oracle::Draw draw(2);
  const auto spec = instances::random_spec(draw, 2, true, true);
  const auto back = config::parse_model(config::model_to_json(spec, {"tau_1"}));
  CHECK(back.fixed == std::set<std::string>{"tau_1"});
  CHECK((back.spec.params.nu - spec.params.nu).norm() == 0.0);
  CHECK(back.spec.params.rho == spec.params.rho);
  const PointSet probes = draw.points(10);
  for (int i = 0; i < 2; ++i)
    CHECK(warp::warp_points_for_process(back.spec.warps, i, probes) == warp::warp_points_for_process(spec.warps, i, probes));
}

TEST_CASE("grid simulation splits") {
  config::SimulationConfig sim;
  sim.resolution = 3;
  sim.sample = 9;
  sim.truth = config::parse_model(Json::parse(R"({"processes": 2})"));
  sim.beta = Eigen::Vector2d::Zero();
  const auto full = experiment::simulate_split(sim, 1);
  CHECK(full.train.count(0) == 9);
  CHECK(full.train.count(1) == 9);
  CHECK(full.test.count(0) == 0);

  sim.resolution = 21;
  sim.sample = 100;
  sim.block = std::make_pair(Eigen::Vector2d(-0.28, -0.48), Eigen::Vector2d(-0.08, -0.28));
  const auto split = experiment::simulate_split(sim, 2);
  const auto& locs = split.train.processes[0].locations;
  for (Eigen::Index k = 0; k < locs.rows(); ++k)
    CHECK_FALSE((locs(k, 0) >= -0.28 && locs(k, 0) <= -0.08 && locs(k, 1) >= -0.48 && locs(k, 1) <= -0.28));
  CHECK(split.train.count(0) + split.test.count(0) == 441);
  const auto again = experiment::simulate_split(sim, 2);
  CHECK(again.train.processes[1].z == split.train.processes[1].z);
  CHECK(again.test_latent == split.test_latent);
}

TEST_CASE("full-size grid keeps the requested sample") {
  config::SimulationConfig sim;
  sim.sample = 1000;
  sim.test = 10;
  sim.truth = config::parse_model(Json::parse(R"({"processes": 2})"));
  sim.beta = Eigen::Vector2d::Zero();
  const auto split = experiment::simulate_split(sim, 3);
  CHECK(split.train.count(0) == 1000);
  CHECK(split.train.count(1) == 1000);
  CHECK(split.test.count(0) == 10);
}

TEST_CASE("fit report round trips") {
  oracle::Draw draw(5);
  auto spec = instances::random_spec(draw, 2, false, false);
  auto ds = instances::random_dataset(draw, {20, 20});
  FitOptions opts;
  opts.threads = 1;
  opts.max_iters = 30;
  const FitResult res = fit(spec, ds, opts);
  const auto path = std::filesystem::temp_directory_path() / "warpfield_fit_report_test.json";
  {
    std::ofstream out(path);
    out << config::fit_report(res).dump(2);
  }
  const FitResult back = config::read_fit_report(path.string());
  std::filesystem::remove(path);
  CHECK(back.spec.params.nu == res.spec.params.nu);
  CHECK(back.spec.params.rho == res.spec.params.rho);
  CHECK(back.beta.beta == res.beta.beta);
  CHECK(back.reml_value == res.reml_value);
  CHECK(back.ok());
}
