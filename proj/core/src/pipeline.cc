// Copyright 2026 The teamsolve Authors.
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

#include "teamsolve/pipeline.h"

#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <numeric>

#include <glog/logging.h>

#include "teamsolve/geometry.h"
#include "teamsolve/oracle.h"

namespace teamsolve {
namespace {

constexpr char kModule[] = "cli_io";

std::ofstream Open(const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::kIo, kModule, "cannot write " + path.string());
  return out;
}

void PointColumns(std::ostream& out, const std::string& prefix, int dim) {
  for (int k = 0; k < dim; ++k) out << prefix << k << ',';
}

void PointValues(std::ostream& out, const Point& p) {
  for (int k = 0; k < p.size(); ++k) out << FormatDouble(p[k]) << ',';
}

nlohmann::json Estimate(const McEstimate& e) { return {{"mean", e.mean}, {"stderr", e.stderr}}; }

double Seconds(std::chrono::steady_clock::time_point since) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - since).count();
}

void WriteHistogram(const std::filesystem::path& path, const std::vector<Point>& draws,
                    const Box& box, int bins) {
  const int d = box.dim();
  std::map<std::vector<int>, long> counts;
  for (const Point& z : draws) {
    std::vector<int> cell(d);
    for (int k = 0; k < d; ++k) {
      double t = (z[k] - box.lower[k]) / (box.upper[k] - box.lower[k]);
      cell[k] = std::clamp(static_cast<int>(std::floor(t * bins)), 0, bins - 1);
    }
    ++counts[cell];
  }
  std::ofstream out = Open(path);
  PointColumns(out, "z_", d);
  out << "mass\n";
  for (const auto& [cell, n] : counts) {
    for (int k = 0; k < d; ++k) {
      double w = (box.upper[k] - box.lower[k]) / bins;
      out << FormatDouble(box.lower[k] + (cell[k] + 0.5) * w) << ',';
    }
    out << FormatDouble(static_cast<double>(n) / draws.size()) << '\n';
  }
}

}  // namespace

bool IsTimingKey(const std::string& key) { return key == "timing"; }

nlohmann::json VerifyReport::ToJson() const {
  return {{"num_categories", num_categories},
          {"lp_variables", lp_variables},
          {"eps_theo_bound", eps_theo_bound},
          {"lipschitz_excess", lipschitz_excess},
          {"warnings", warnings}};
}

VerifyReport Verify(const RunConfig& config) {
  auto inst = BuildInstance(config);
  VerifyReport r;
  const int n = inst->num_categories();
  r.num_categories = n;
  const int k = inst->quality_basis.size();
  r.lp_variables = n * (k + 1);
  std::vector<double> l1, l2, rx;
  for (int i = 0; i < n; ++i) {
    const HatBasis& b = inst->type_bases[i];
    r.lp_variables += b.size();
    for (int j = 0; j < b.size(); ++j) {
      if (!(inst->moments[i][j] > 0.0)) {
        const Point& v = b.complex().vertex(b.VertexOfIndex(j));
        std::string at;
        for (int q = 0; q < v.size(); ++q) at += (q ? "," : "") + FormatDouble(v[q]);
        r.warnings.push_back("category " + std::to_string(i) + ": vertex " +
                             std::to_string(b.VertexOfIndex(j)) + " at (" + at +
                             ") carries no mass");
      }
    }
    Rng rng = MakeRng(config.seed, 4000 + i);
    double excess = LipschitzExcess(*inst->cost, i, b.complex(), inst->quality_basis.complex(),
                                    10000, rng);
    r.lipschitz_excess.push_back(excess);
    if (excess > 1e-9) {
      r.warnings.push_back("category " + std::to_string(i) +
                           ": Lipschitz constants violated by " + FormatDouble(excess));
    }
    l1.push_back(inst->cost->L1(i));
    l2.push_back(inst->cost->L2(i));
    rx.push_back(EpsilonBar(b.complex(), 0.0));
  }
  // The bound is largest when the category left out of the L2 sum has the
  // smallest constant.
  const int i_min = static_cast<int>(std::min_element(l2.begin(), l2.end()) - l2.begin());
  r.eps_theo_bound = EpsTheo(config.eps_lsip, l1, l2, rx,
                             EpsilonBar(inst->quality_basis.complex(), 0.0), i_min);
  return r;
}

RunSummary RunPipeline(const RunConfig& config, const std::filesystem::path& out_dir) {
  const auto start = std::chrono::steady_clock::now();
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw Error(ErrorCode::kIo, kModule, "cannot create " + out_dir.string());

  auto inst = BuildInstance(config);
  const int n = inst->num_categories();
  auto oracle = MakeOracle(config.oracle, inst);
  CuttingPlaneOptions cp;
  cp.eps_lsip = config.eps_lsip;
  cp.tau = config.tau;
  cp.max_iterations = config.max_iterations;
  cp.threads = config.threads;

  RunSummary out;
  auto t_cp = std::chrono::steady_clock::now();
  out.lsip = RunCuttingPlane(*inst, *oracle, cp);
  const double cp_seconds = Seconds(t_cp);

  EquilibriumOptions eo = config.equilibrium;
  eo.threads = config.threads;
  Equilibrium eq(inst, out.lsip, eo);
  out.report = eq.report();
  const EquilibriumReport& rep = out.report;

  {
    std::ofstream f = Open(out_dir / "iterations.csv");
    WriteIterationCsv(f, out.lsip.log);
  }
  {
    std::ofstream f = Open(out_dir / "nu_hat.csv");
    WriteMeasureCsv(f, rep.nu_hat);
  }

  // Joint draws from the reassembled couplings.
  const SimplicialComplex& zc = inst->quality_basis.complex();
  std::vector<EquilibriumDraw> draws(config.output.coupling_samples);
  Rng rng = MakeRng(config.seed, 500000);
  for (EquilibriumDraw& d : draws) d = eq.Sample(rng);
  for (int i = 0; i < n; ++i) {
    std::ofstream f = Open(out_dir / ("coupling_samples_" + std::to_string(i) + ".csv"));
    PointColumns(f, "x_", inst->measures[i].dim());
    PointColumns(f, "z_hat_", zc.dim());
    for (int k = 0; k < zc.dim(); ++k) f << "z_tilde_" << k << (k + 1 < zc.dim() ? "," : "\n");
    for (const EquilibriumDraw& d : draws) {
      PointValues(f, d.xbar[i]);
      PointValues(f, d.z);
      for (int k = 0; k < zc.dim(); ++k) {
        f << FormatDouble(d.zbar[k]) << (k + 1 < zc.dim() ? "," : "\n");
      }
    }
  }
  std::vector<Point> grid = Equilibrium::TestGrid(zc, config.output.transfer_grid);
  for (int i = 0; i < n; ++i) {
    std::ofstream f = Open(out_dir / ("transfer_" + std::to_string(i) + ".csv"));
    PointColumns(f, "z_", zc.dim());
    f << "phi\n";
    for (const Point& z : grid) {
      PointValues(f, z);
      f << FormatDouble(eq.transfers().EvalAll(z)[i]) << '\n';
    }
  }
  {
    std::vector<Point> zbar;
    for (const EquilibriumDraw& d : draws) zbar.push_back(d.zbar);
    WriteHistogram(out_dir / "nu_tilde_hist.csv", zbar, zc.BoundingBox(),
                   config.output.histogram_bins);
  }

  double lp_time = 0.0, oracle_time = 0.0;
  for (const IterationRecord& r : out.lsip.log) {
    lp_time += r.lp_time;
    oracle_time += r.oracle_time;
  }
  std::vector<int> m;
  for (const HatBasis& b : inst->type_bases) m.push_back(b.size());
  const int k = inst->quality_basis.size();

  nlohmann::json& j = out.result;
  j["version"] = TEAMSOLVE_VERSION;
  j["git_describe"] = TEAMSOLVE_GIT_DESCRIBE;
  j["config_digest"] = Digest(config.source.dump());
  j["family"] = inst->cost->family();
  j["seed"] = config.seed;
  j["num_categories"] = n;
  j["lp_variables"] = n * (k + 1) + std::accumulate(m.begin(), m.end(), 0);
  j["iterations"] = out.lsip.log.size();
  j["total_cuts"] = out.lsip.total_cuts;
  j["eps_lsip"] = out.lsip.eps_lsip;
  j["tau"] = out.lsip.tau;
  j["shift"] = rep.shift;
  j["alpha_lb"] = rep.alpha_lb;
  j["alpha_ub_lsip"] = rep.alpha_ub;
  j["alpha_tilde_ub"] = rep.alpha_tilde_ub.mean;
  j["alpha_tilde_ub_stderr"] = rep.alpha_tilde_ub.stderr;
  j["alpha_hat_ub"] = rep.alpha_hat_ub.mean;
  j["alpha_hat_ub_stderr"] = rep.alpha_hat_ub.stderr;
  j["eps_hat_sub"] = Estimate(rep.eps_hat_sub);
  j["eps_tilde_sub"] = Estimate(rep.eps_tilde_sub);
  j["eps_theo"] = rep.eps_theo;
  j["exact"] = rep.exact;
  j["i_hat"] = rep.i_hat;
  j["support_size"] = rep.support_size;
  j["sparsity_bound"] = rep.sparsity_bound;
  j["mc"] = {{"n", eo.samples}, {"repetitions", eo.repetitions}};
  j["transport"] = {{"w1", rep.transport_w1},
                    {"mass_error", rep.transport_mass_error},
                    {"fallbacks", rep.transport_fallbacks}};
  j["diagnostics"] = {{"me1", rep.diagnostics.me1},
                      {"me2", rep.diagnostics.me2},
                      {"me3", rep.diagnostics.me3}};
  j["cost"] = inst->cost->Describe();
  j["config"] = config.source;
  const double total = Seconds(start);
  j["timing"] = {{"lp_time", lp_time},
                 {"oracle_time", oracle_time},
                 {"avg_lp_time", out.lsip.log.empty() ? 0.0 : lp_time / out.lsip.log.size()},
                 {"cutting_plane", cp_seconds},
                 {"equilibrium", rep.seconds},
                 {"total", total}};
  {
    std::ofstream f = Open(out_dir / "result.json");
    f << j.dump(2) << '\n';
  }
  LOG(INFO) << "alpha_lb " << FormatDouble(rep.alpha_lb) << ", alpha_tilde_ub "
            << FormatDouble(rep.alpha_tilde_ub.mean) << ", alpha_hat_ub "
            << FormatDouble(rep.alpha_hat_ub.mean) << " (" << FormatDouble(total) << " s)";
  return out;
}

}  // namespace teamsolve
