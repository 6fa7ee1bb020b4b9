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

#ifndef TEAMSOLVE_CONFIG_H_
#define TEAMSOLVE_CONFIG_H_

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teamsolve/common.h"
#include "teamsolve/equilibrium.h"
#include "teamsolve/geometry.h"
#include "teamsolve/problems.h"

namespace teamsolve {

// How a type or quality space is triangulated.
struct PartitionSpec {
  enum class Kind { kBox, kSimplex, kPoints };
  Kind kind = Kind::kBox;
  Box box;                    // kBox
  std::vector<int> counts;    // kBox
  std::vector<Box> holes;     // kBox
  std::vector<Point> corners; // kSimplex
  int count = 1;              // kSimplex
  std::vector<Point> points;  // kPoints

  int dim() const;
  ComplexPtr Build() const;
};

struct MeasureSpec {
  enum class Kind { kUniform, kDensity, kRandomDensity, kDiscrete };
  Kind kind = Kind::kUniform;
  std::vector<double> values;  // kDensity: one per partition vertex
  uint64_t seed = 0;           // kRandomDensity
  bool has_seed = false;
  std::vector<Point> points;   // kDiscrete; empty means the partition points
  std::vector<double> weights; // kDiscrete
};

struct CategorySpec {
  PartitionSpec partition;
  MeasureSpec measure;
};

struct ProblemSpec {
  std::string family;
  // business_location
  std::vector<Point> stations;
  double c_walk = 0.15, c_train = 0.015, c_restock = 0.4;
  // barycenter
  std::vector<double> weights;
  // capped_affine
  std::vector<Point> directions;
  std::vector<double> kappa1, kappa2;
  bool random = false;
  // weighted_l1
  std::vector<double> scale, offset;
  // tabulated
  std::vector<Matrix> tables;
};

struct OutputSpec {
  int transfer_grid = 200;     // approximate points per transfer_{i}.csv
  int coupling_samples = 2000; // rows per coupling_samples_{i}.csv
  int histogram_bins = 20;     // per axis in nu_tilde_hist.csv
};

struct RunConfig {
  ProblemSpec problem;
  std::vector<CategorySpec> categories;
  PartitionSpec quality;
  double eps_lsip = 1e-4;
  double tau = -1.0;  // negative: automatic
  std::string oracle = "auto";
  int max_iterations = 10000;
  uint64_t seed = 1;
  int threads = 0;
  EquilibriumOptions equilibrium;
  OutputSpec output;
  nlohmann::json source;  // the parsed document, echoed into result.json

  int num_categories() const { return static_cast<int>(categories.size()); }
};

// Both throw Error(kConfig) whose message starts with the JSON pointer of
// the offending field.
RunConfig ParseConfig(const nlohmann::json& doc);
RunConfig LoadConfig(const std::filesystem::path& path);

// Overrides the master seed and every stream derived from it.
void SetSeed(RunConfig& config, uint64_t seed);

CostPtr BuildCost(const RunConfig& config, const std::vector<ComplexPtr>& types,
                  const ComplexPtr& quality);
std::shared_ptr<const Instance> BuildInstance(const RunConfig& config);

// 64-bit FNV-1a of `text`, as 16 hex digits.
std::string Digest(const std::string& text);

}  // namespace teamsolve

#endif  // TEAMSOLVE_CONFIG_H_
