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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include <sys/wait.h>

#include <gtest/gtest.h>

#include "teamsolve/config.h"
#include "testing/builders.h"
#include "testing/mt_lin.h"

namespace teamsolve {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using testing::CodeOf;

const fs::path kConfigs = TEAMSOLVE_CONFIG_DIR;

fs::path TempDir(const std::string& name) {
  fs::path p = fs::temp_directory_path() / ("teamsolve_pipeline_" + name);
  fs::remove_all(p);
  return p;
}

std::string Slurp(const fs::path& p) {
  std::ifstream in(p);
  std::stringstream s;
  s << in.rdbuf();
  return s.str();
}

json ReadJson(const fs::path& p) { return json::parse(Slurp(p)); }

std::string FirstLine(const fs::path& p) {
  std::ifstream in(p);
  std::string line;
  std::getline(in, line);
  return line;
}

// Message of the config error raised by parsing `doc`.
std::string ConfigMessage(const json& doc) {
  try {
    ParseConfig(doc);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kConfig);
    // Drop the "module: code: " prefix.
    const std::string what = e.what();
    const size_t at = what.find(": /");
    return at == std::string::npos ? what : what.substr(at + 2);
  }
  ADD_FAILURE() << "config accepted";
  return "";
}

json Tiny() { return ReadJson(kConfigs / "discrete_tiny.json"); }

TEST(PipelineTest, DiscreteTinyMatchesBruteForce) {
  RunConfig c = LoadConfig(kConfigs / "discrete_tiny.json");
  RunSummary s = RunPipeline(c, TempDir("tiny"));
  std::vector<Eigen::MatrixXd> cost(c.problem.tables.begin(), c.problem.tables.end());
  std::vector<Eigen::VectorXd> mu;
  for (const CategorySpec& cs : c.categories) {
    mu.push_back(Eigen::Map<const Eigen::VectorXd>(cs.measure.weights.data(),
                                                   static_cast<Eigen::Index>(cs.measure.weights.size())));
  }
  const double ref = testing::MtLinReference(cost, mu).value;
  const json& r = s.result;
  EXPECT_TRUE(r["exact"].get<bool>());
  EXPECT_LE(r["eps_hat_sub"]["mean"].get<double>(), 1e-6 + 1e-9);
  EXPECT_LE(r["alpha_lb"].get<double>(), ref + 1e-9);
  EXPECT_NEAR(r["alpha_hat_ub"].get<double>(), ref, 1e-6 + 1e-9);
  EXPECT_GE(r["alpha_tilde_ub"].get<double>(), ref - 1e-9);
}

TEST(PipelineTest, TwoPointBarycenterBracketsOne) {
  RunConfig c = LoadConfig(kConfigs / "barycenter_two_points.json");
  RunSummary s = RunPipeline(c, TempDir("bary"));
  const json& r = s.result;
  EXPECT_LE(r["alpha_lb"].get<double>(), 1.0 + 1e-9);
  EXPECT_GE(r["alpha_hat_ub"].get<double>(), 1.0 - 1e-9);
  EXPECT_NEAR(r["alpha_tilde_ub"].get<double>(), 1.0, 1e-12);
  EXPECT_NEAR(r["shift"].get<double>(), 2.0, 1e-12);
}

TEST(PipelineTest, WritesEveryArtifact) {
  RunConfig c = LoadConfig(kConfigs / "barycenter_two_points.json");
  fs::path out = TempDir("artifacts");
  RunPipeline(c, out);
  EXPECT_EQ(FirstLine(out / "nu_hat.csv"), "z_0,z_1,weight");
  EXPECT_EQ(FirstLine(out / "coupling_samples_0.csv"), "x_0,x_1,z_hat_0,z_hat_1,z_tilde_0,z_tilde_1");
  EXPECT_EQ(FirstLine(out / "transfer_1.csv"), "z_0,z_1,phi");
  EXPECT_EQ(FirstLine(out / "nu_tilde_hist.csv"), "z_0,z_1,mass");
  EXPECT_TRUE(fs::exists(out / "iterations.csv"));
  json r = ReadJson(out / "result.json");
  for (const char* key : {"alpha_lb", "alpha_tilde_ub", "alpha_hat_ub", "eps_theo", "i_hat",
                          "config", "config_digest", "git_describe", "timing"}) {
    EXPECT_TRUE(r.contains(key)) << key;
  }
  EXPECT_TRUE(r["timing"].contains("avg_lp_time"));
  // All of nu_tilde sits in the bin containing (1, 0).
  std::ifstream hist(out / "nu_tilde_hist.csv");
  std::string line;
  std::getline(hist, line);
  std::getline(hist, line);
  EXPECT_EQ(line.substr(line.rfind(',') + 1), "1");
}

json WithoutTiming(json r) {
  for (auto it = r.begin(); it != r.end();) {
    it = IsTimingKey(it.key()) ? r.erase(it) : std::next(it);
  }
  return r;
}

TEST(PipelineTest, DeterministicAcrossRunsAndThreads) {
  json doc = ReadJson(kConfigs / "capped_affine.json");
  doc["mc"] = {{"n", 500}, {"repetitions", 4}};
  doc["categories"].erase(3);
  RunConfig a = ParseConfig(doc), b = ParseConfig(doc);
  a.threads = 1;
  b.threads = 2;
  fs::path da = TempDir("det_a"), db = TempDir("det_b");
  RunPipeline(a, da);
  RunPipeline(b, db);
  EXPECT_EQ(WithoutTiming(ReadJson(da / "result.json")).dump(),
            WithoutTiming(ReadJson(db / "result.json")).dump());
  for (const char* f : {"nu_hat.csv", "coupling_samples_0.csv", "transfer_2.csv",
                        "nu_tilde_hist.csv"}) {
    EXPECT_EQ(Slurp(da / f), Slurp(db / f)) << f;
  }
  SetSeed(b, 99);
  RunPipeline(b, db);
  EXPECT_NE(Slurp(da / "coupling_samples_0.csv"), Slurp(db / "coupling_samples_0.csv"));
}

TEST(PipelineTest, ResultsRespectOrdering) {
  json doc = ReadJson(kConfigs / "capped_affine.json");
  doc["mc"] = {{"n", 2000}, {"repetitions", 5}};
  RunSummary s = RunPipeline(ParseConfig(doc), TempDir("order"));
  const json& r = s.result;
  const double lb = r["alpha_lb"], tilde = r["alpha_tilde_ub"], hat = r["alpha_hat_ub"];
  EXPECT_LE(lb, tilde + 3 * r["alpha_tilde_ub_stderr"].get<double>() + 1e-12);
  EXPECT_LE(tilde, hat + 1e-12);
}

TEST(PipelineTest, ErrorsNameTheField) {
  json doc = Tiny();
  doc.erase("eps_lsip");
  EXPECT_EQ(ConfigMessage(doc).rfind("/eps_lsip:", 0), 0u);

  doc = Tiny();
  doc["categories"][1]["measure"]["weights"][2] = "heavy";
  EXPECT_EQ(ConfigMessage(doc).rfind("/categories/1/measure/weights/2:", 0), 0u);

  doc = Tiny();
  doc["problem"]["family"] = "auction";
  EXPECT_EQ(ConfigMessage(doc).rfind("/problem/family:", 0), 0u);

  doc = Tiny();
  doc["tau"] = 1.0;
  EXPECT_EQ(ConfigMessage(doc).rfind("/tau:", 0), 0u);

  doc = Tiny();
  doc["problem"]["tables"][0][1] = json::array({0.1, 0.2});
  EXPECT_EQ(ConfigMessage(doc).rfind("/problem/tables/0/1:", 0), 0u);

  doc = Tiny();
  doc["quality"]["partition"]["type"] = "hexagon";
  EXPECT_EQ(ConfigMessage(doc).rfind("/quality/partition/type:", 0), 0u);

  doc = Tiny();
  doc["i_hat"] = 2;
  EXPECT_EQ(ConfigMessage(doc).rfind("/i_hat:", 0), 0u);

  EXPECT_EQ(CodeOf([] { LoadConfig(kConfigs / "no_such_file.json"); }), ErrorCode::kIo);
}

TEST(PipelineTest, MismatchedDimensionsRejected) {
  json doc = ReadJson(kConfigs / "barycenter_two_points.json");
  doc["categories"][0]["partition"]["points"] = json::array({json::array({0.0})});
  EXPECT_EQ(ConfigMessage(doc).rfind("/categories/0/partition:", 0), 0u);
}

TEST(PipelineTest, VerifyReportsSizeAndZeroMassVertex) {
  json doc = {
      {"problem", {{"family", "weighted_l1"}, {"scale", {1.0, 1.0}}}},
      {"categories",
       {{{"partition", {{"type", "box"}, {"lower", {0}}, {"upper", {1}}, {"counts", {2}}}},
         {"measure", {{"type", "density"}, {"values", {1.0, 0.0, 0.0}}}}},
        {{"partition", {{"type", "box"}, {"lower", {0}}, {"upper", {1}}, {"counts", {4}}}},
         {"measure", {{"type", "uniform"}}}}}},
      {"quality", {{"partition", {{"type", "box"}, {"lower", {0}}, {"upper", {1}}, {"counts", {2}}}}}},
      {"eps_lsip", 1e-3}};
  VerifyReport r = Verify(ParseConfig(doc));
  // N (k + 1) + m_1 + m_2 with k = 2, m = (2, 4).
  EXPECT_EQ(r.lp_variables, 2 * 3 + 2 + 4);
  ASSERT_EQ(r.warnings.size(), 1u);
  EXPECT_NE(r.warnings[0].find("vertex 2 at (1)"), std::string::npos);
  for (double e : r.lipschitz_excess) EXPECT_LE(e, 1e-9);
  // eps + sum L1 * 2 h_x + (max L2 over one category) * 2 h_z.
  EXPECT_NEAR(r.eps_theo_bound, 1e-3 + (1.0 + 0.5) + 1.0, 1e-12);
}

#ifdef TEAMSOLVE_CLI
int RunCli(const std::string& args) {
  int status = std::system((std::string(TEAMSOLVE_CLI) + " " + args + " >/dev/null 2>&1").c_str());
  return WEXITSTATUS(status);
}

TEST(PipelineTest, CliExitCodes) {
  fs::path dir = TempDir("cli");
  fs::create_directories(dir);
  json doc = Tiny();
  doc["categories"][0]["partition"]["type"] = 3;
  std::ofstream(dir / "bad.json") << doc.dump();
  std::ofstream(dir / "broken.json") << "{\"eps_lsip\": ";
  EXPECT_EQ(RunCli("run --config " + (dir / "bad.json").string() + " --out " + dir.string()), 2);
  EXPECT_EQ(RunCli("verify --config " + (dir / "broken.json").string()), 2);
  EXPECT_EQ(RunCli("verify --config " + (kConfigs / "discrete_tiny.json").string()), 0);
  EXPECT_EQ(RunCli("run --config " + (kConfigs / "discrete_tiny.json").string() + " --out " +
                   (dir / "ok").string() + " --seed 4 --threads 1"),
            0);
  EXPECT_EQ(ReadJson(dir / "ok" / "result.json")["seed"].get<int>(), 4);
}
#endif

}  // namespace
}  // namespace teamsolve
