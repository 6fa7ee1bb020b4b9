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

#ifndef TEAMSOLVE_PIPELINE_H_
#define TEAMSOLVE_PIPELINE_H_

#include <filesystem>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teamsolve/config.h"
#include "teamsolve/cutting_plane.h"
#include "teamsolve/equilibrium.h"

namespace teamsolve {

// Dry-run checks on a config, without solving anything.
struct VerifyReport {
  int num_categories = 0;
  int lp_variables = 0;                 // N (k + 1) + sum_i m_i
  double eps_theo_bound = 0.0;          // worst case over the choice of i_hat
  std::vector<double> lipschitz_excess; // per category; <= 0 means the constants held
  std::vector<std::string> warnings;

  nlohmann::json ToJson() const;
};

VerifyReport Verify(const RunConfig& config);

struct RunSummary {
  CuttingPlaneResult lsip;
  EquilibriumReport report;
  nlohmann::json result;  // contents of result.json
};

// Solves the configured instance and writes result.json, iterations.csv,
// nu_hat.csv, coupling_samples_{i}.csv, transfer_{i}.csv and
// nu_tilde_hist.csv into `out_dir` (created if missing).
RunSummary RunPipeline(const RunConfig& config, const std::filesystem::path& out_dir);

// Keys of result.json that hold wall-clock measurements.
bool IsTimingKey(const std::string& key);

}  // namespace teamsolve

#endif  // TEAMSOLVE_PIPELINE_H_
