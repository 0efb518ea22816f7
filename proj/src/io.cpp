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

#include "warpfield/io.hpp"

#include <charconv>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "warpfield/errors.hpp"

namespace warpfield::io {

namespace {

// Levels are user-facing settings such as 0.95; print them as entered.
std::string shortest(double value) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, value);
  return std::string(buf, res.ptr);
}

}  // namespace

std::string format_double(double value) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", value);
  return buf;
}

int CsvTable::column(const std::string& name) const {
  for (std::size_t c = 0; c < header.size(); ++c) {
    if (header[c] == name) return static_cast<int>(c);
  }
  return -1;
}

namespace {

std::vector<std::string> split(const std::string& line) {
  std::vector<std::string> cells;
  std::string cell;
  std::istringstream ss(line);
  while (std::getline(ss, cell, ',')) {
    const auto b = cell.find_first_not_of(" \t\r");
    const auto e = cell.find_last_not_of(" \t\r");
    cells.push_back(b == std::string::npos ? std::string() : cell.substr(b, e - b + 1));
  }
  if (!line.empty() && line.back() == ',') cells.emplace_back();
  return cells;
}

double to_double(const std::string& cell, std::size_t line) {
  try {
    std::size_t used = 0;
    const double v = std::stod(cell, &used);
    if (used != cell.size()) throw std::invalid_argument(cell);
    return v;
  } catch (const std::exception&) {
    throw InputError("line " + std::to_string(line) + ": '" + cell + "' is not a number");
  }
}

int to_process(const std::string& cell, std::size_t line) {
  const double v = to_double(cell, line);
  if (v < 1 || v != static_cast<int>(v)) {
    throw InputError("line " + std::to_string(line) + ": process_id must be a positive integer");
  }
  return static_cast<int>(v) - 1;
}

int require(const CsvTable& t, const std::string& name) {
  const int c = t.column(name);
  if (c < 0) throw InputError("CSV is missing the '" + name + "' column");
  return c;
}

}  // namespace

CsvTable read_csv(std::istream& in) {
  CsvTable t;
  std::string line;
  while (std::getline(in, line)) {
    if (line.empty() || line == "\r") continue;
    if (t.header.empty()) {
      t.header = split(line);
      continue;
    }
    auto cells = split(line);
    if (cells.size() != t.header.size()) {
      throw InputError("CSV row " + std::to_string(t.rows.size() + 2) + " has " +
                       std::to_string(cells.size()) + " cells, header has " +
                       std::to_string(t.header.size()));
    }
    t.rows.push_back(std::move(cells));
  }
  if (t.header.empty()) throw InputError("CSV has no header");
  return t;
}

CsvTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  return read_csv(in);
}

MultivariateDataset parse_dataset(const CsvTable& t, int p) {
  const int cp = require(t, "process_id");
  const int cx = require(t, "x");
  const int cy = require(t, "y");
  const int cz = t.column("z");
  std::vector<int> covs;
  for (int k = 1;; ++k) {
    const int c = t.column("cov_" + std::to_string(k));
    if (c < 0) break;
    covs.push_back(c);
  }
  int max_id = p;
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    max_id = std::max(max_id, to_process(t.rows[r][cp], r + 2) + 1);
  }
  if (p > 0 && max_id > p) throw InputError("process_id exceeds the configured process count");
  if (max_id == 0) throw InputError("data CSV has no rows and no process count was given");

  std::vector<std::vector<std::size_t>> rows(static_cast<std::size_t>(max_id));
  for (std::size_t r = 0; r < t.rows.size(); ++r) rows[to_process(t.rows[r][cp], r + 2)].push_back(r);

  MultivariateDataset ds;
  const Eigen::Index q = 1 + static_cast<Eigen::Index>(covs.size());
  for (const auto& idx : rows) {
    ProcessData proc;
    const auto n = static_cast<Eigen::Index>(idx.size());
    proc.locations.resize(n, 2);
    proc.covariates = Eigen::MatrixXd::Ones(n, q);
    if (cz >= 0) proc.z.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto r = idx[static_cast<std::size_t>(k)];
      const auto& row = t.rows[r];
      proc.locations(k, 0) = to_double(row[cx], r + 2);
      proc.locations(k, 1) = to_double(row[cy], r + 2);
      if (cz >= 0) proc.z[k] = to_double(row[cz], r + 2);
      for (std::size_t c = 0; c < covs.size(); ++c) {
        proc.covariates(k, static_cast<Eigen::Index>(c) + 1) = to_double(row[covs[c]], r + 2);
      }
    }
    ds.processes.push_back(std::move(proc));
  }
  ds.validate();
  return ds;
}

MultivariateDataset read_dataset(const std::string& path, int p) {
  return parse_dataset(read_csv_file(path), p);
}

void write_dataset(std::ostream& out, const MultivariateDataset& ds) {
  const int extra = ds.q() - 1;
  const bool with_z = ds.has_observations();
  out << "process_id,x,y";
  if (with_z) out << ",z";
  for (int k = 1; k <= extra; ++k) out << ",cov_" << k;
  out << '\n';
  for (int i = 0; i < ds.p(); ++i) {
    const auto& proc = ds.processes[i];
    for (Eigen::Index r = 0; r < proc.locations.rows(); ++r) {
      out << i + 1 << ',' << format_double(proc.locations(r, 0)) << ','
          << format_double(proc.locations(r, 1));
      if (with_z) out << ',' << format_double(proc.z[r]);
      for (int k = 1; k <= extra; ++k) out << ',' << format_double(proc.covariates(r, k));
      out << '\n';
    }
  }
}

void write_truth(std::ostream& out, const TruthTable& truth) {
  out << "process_id,x,y,latent,z,observed\n";
  for (int i = 0; i < truth.all.p(); ++i) {
    const auto& proc = truth.all.processes[i];
    for (Eigen::Index r = 0; r < proc.locations.rows(); ++r) {
      out << i + 1 << ',' << format_double(proc.locations(r, 0)) << ','
          << format_double(proc.locations(r, 1)) << ',' << format_double(truth.latent[i][r]) << ','
          << format_double(proc.z[r]) << ',' << (truth.observed[i][static_cast<std::size_t>(r)] ? 1 : 0)
          << '\n';
    }
  }
}

TruthTable read_truth(const std::string& path, int p) {
  const CsvTable t = read_csv_file(path);
  TruthTable truth;
  truth.all = parse_dataset(t, p);
  const int cp = require(t, "process_id");
  const int cl = require(t, "latent");
  const int co = require(t, "observed");
  truth.latent.resize(static_cast<std::size_t>(truth.all.p()));
  truth.observed.resize(static_cast<std::size_t>(truth.all.p()));
  for (std::size_t r = 0; r < t.rows.size(); ++r) {
    const int i = to_process(t.rows[r][cp], r + 2);
    auto& lat = truth.latent[static_cast<std::size_t>(i)];
    lat.conservativeResize(lat.size() + 1);
    lat[lat.size() - 1] = to_double(t.rows[r][cl], r + 2);
    truth.observed[static_cast<std::size_t>(i)].push_back(to_double(t.rows[r][co], r + 2) != 0.0);
  }
  return truth;
}

MultivariateDataset held_out(const TruthTable& truth, Eigen::VectorXd* latent) {
  MultivariateDataset out;
  std::vector<double> values;
  for (int i = 0; i < truth.all.p(); ++i) {
    const auto& proc = truth.all.processes[i];
    std::vector<Eigen::Index> keep;
    for (Eigen::Index r = 0; r < proc.locations.rows(); ++r) {
      if (!truth.observed[i][static_cast<std::size_t>(r)]) keep.push_back(r);
    }
    ProcessData sub;
    const auto n = static_cast<Eigen::Index>(keep.size());
    sub.locations.resize(n, proc.locations.cols());
    sub.covariates.resize(n, proc.covariates.cols());
    sub.z.resize(n);
    for (Eigen::Index k = 0; k < n; ++k) {
      const auto r = keep[static_cast<std::size_t>(k)];
      sub.locations.row(k) = proc.locations.row(r);
      sub.covariates.row(k) = proc.covariates.row(r);
      sub.z[k] = proc.z[r];
      values.push_back(truth.latent[i][r]);
    }
    out.processes.push_back(std::move(sub));
  }
  if (latent) *latent = Eigen::Map<Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size()));
  return out;
}

void write_predictions(std::ostream& out, const PredictionResult& pred) {
  out << "process_id,x,y,mean,sd,sd_obs\n";
  for (std::size_t k = 0; k < pred.size(); ++k) {
    const auto r = static_cast<Eigen::Index>(k);
    out << pred.process[k] + 1 << ',' << format_double(pred.locations(r, 0)) << ','
        << format_double(pred.locations(r, 1)) << ',' << format_double(pred.mean[r]) << ','
        << format_double(std::sqrt(pred.variance[r])) << ','
        << format_double(std::sqrt(pred.observation_variance[r])) << '\n';
  }
}

void write_scores(std::ostream& out, const Scores& scores) {
  out << "process_id,rmspe,crps,count\n";
  for (Eigen::Index i = 0; i < scores.rmspe.size(); ++i) {
    out << i + 1 << ',' << format_double(scores.rmspe[i]) << ',' << format_double(scores.crps[i])
        << ',' << scores.count[i] << '\n';
  }
}

void write_bootstrap(std::ostream& out, const BootstrapResult& result) {
  out << "replicate,parameter,value\n";
  for (const auto& rep : result.replicates) {
    for (const auto& [name, value] : rep.values) {
      out << rep.index + 1 << ',' << name << ',' << format_double(value) << '\n';
    }
  }
}

void write_bootstrap_summary(std::ostream& out, const BootstrapResult& result) {
  out << "parameter,lower,upper,level\n";
  for (const auto& iv : result.intervals) {
    out << iv.parameter << ',' << format_double(iv.lower) << ',' << format_double(iv.upper) << ','
        << shortest(iv.level) << '\n';
  }
}

void write_homogenized(std::ostream& out, const MultivariateDataset& ds,
                       const HomogenizationResult& h) {
  out << "process_id,x,y,hx,hy\n";
  for (int i = 0; i < ds.p(); ++i) {
    const auto& loc = ds.processes[i].locations;
    for (Eigen::Index r = 0; r < loc.rows(); ++r) {
      out << i + 1 << ',' << format_double(loc(r, 0)) << ',' << format_double(loc(r, 1)) << ','
          << format_double(h.points[i](r, 0)) << ',' << format_double(h.points[i](r, 1)) << '\n';
    }
  }
}

}  // namespace warpfield::io
