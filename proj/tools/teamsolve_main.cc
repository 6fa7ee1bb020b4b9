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

// Command line front end: `teamsolve run` and `teamsolve verify`.

#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <glog/logging.h>

#include "teamsolve/common.h"
#include "teamsolve/config.h"
#include "teamsolve/pipeline.h"

namespace {

constexpr int kExitSolver = 1;
constexpr int kExitConfig = 2;

void ConfigureLogging(const char* argv0) {
  FLAGS_logtostderr = true;
  FLAGS_minloglevel = google::GLOG_WARNING;
  const char* level = std::getenv("TEAMSOLVE_LOG");
  const std::string name = level ? level : "";
  if (name == "error") {
    FLAGS_minloglevel = google::GLOG_ERROR;
  } else if (name == "info") {
    FLAGS_minloglevel = google::GLOG_INFO;
  } else if (name == "debug") {
    FLAGS_minloglevel = google::GLOG_INFO;
    FLAGS_v = 1;
  }
  google::InitGoogleLogging(argv0);
}

int Report(const teamsolve::Error& e) {
  std::cerr << "teamsolve: " << e.what() << '\n';
  return e.code() == teamsolve::ErrorCode::kConfig ? kExitConfig : kExitSolver;
}

}  // namespace

int main(int argc, char** argv) {
  ConfigureLogging(argv[0]);
  CLI::App app{"Approximate matching equilibria for teams"};
  app.require_subcommand(1);

  std::string config_path, out_dir;
  long long seed = -1;
  int threads = 0;
  CLI::App* run = app.add_subcommand("run", "Solve a configured instance and write results");
  run->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);
  run->add_option("--out", out_dir, "Output directory")->required();
  run->add_option("--seed", seed, "Override the config seed")->check(CLI::NonNegativeNumber);
  run->add_option("--threads", threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);

  CLI::App* verify = app.add_subcommand("verify", "Check a config without solving");
  verify->add_option("--config", config_path, "JSON config file")->required()->check(CLI::ExistingFile);

  CLI11_PARSE(app, argc, argv);

  try {
    teamsolve::RunConfig config = teamsolve::LoadConfig(config_path);
    if (*verify) {
      teamsolve::VerifyReport r = teamsolve::Verify(config);
      for (const std::string& w : r.warnings) LOG(WARNING) << w;
      std::cout << r.ToJson().dump(2) << '\n';
      return 0;
    }
    if (seed >= 0) teamsolve::SetSeed(config, static_cast<uint64_t>(seed));
    config.threads = threads;
    teamsolve::RunSummary s = teamsolve::RunPipeline(config, out_dir);
    std::cout << "alpha_lb        " << teamsolve::FormatDouble(s.report.alpha_lb) << '\n'
              << "alpha_tilde_ub  " << teamsolve::FormatDouble(s.report.alpha_tilde_ub.mean)
              << " +- " << teamsolve::FormatDouble(s.report.alpha_tilde_ub.stderr) << '\n'
              << "alpha_hat_ub    " << teamsolve::FormatDouble(s.report.alpha_hat_ub.mean)
              << " +- " << teamsolve::FormatDouble(s.report.alpha_hat_ub.stderr) << '\n'
              << "eps_theo        " << teamsolve::FormatDouble(s.report.eps_theo) << '\n'
              << "results in      " << out_dir << '\n';
    return 0;
  } catch (const teamsolve::Error& e) {
    return Report(e);
  }
}
