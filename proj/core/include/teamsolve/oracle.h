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

// Global minimisation oracles for the constraint violation
//
//   min over (x, z) in X_i x Z of  c_i(x, z) - <g_i(x), y> - <h(z), w>,
//
// each returning a minimiser, its value and a certified lower bound.

#ifndef TEAMSOLVE_ORACLE_H_
#define TEAMSOLVE_ORACLE_H_

#include <limits>
#include <memory>
#include <string>
#include <vector>

#include "teamsolve/common.h"
#include "teamsolve/geometry.h"
#include "teamsolve/problems.h"

namespace teamsolve {

// A candidate constraint point with everything the LP row needs.
struct Cut {
  Point x;
  Point z;
  SparseHat g;
  SparseHat h;
  double cost = 0.0;
};

struct OracleResult {
  Point x;
  Point z;
  double beta_tilde = 0.0;
  SparseHat g_at_x;
  SparseHat h_at_z;
  double beta_lower = 0.0;
  // Near-optimal points found along the way, best first. The minimiser is
  // always the first entry.
  std::vector<Cut> pool;
};

struct OracleOptions {
  // Pool entries must be within this margin of the optimum. The cutting
  // plane keeps only the violated ones.
  double pool_margin = std::numeric_limits<double>::infinity();
  int pool_cap = 32;
  // Upper limit on objective evaluations per call of the grid oracle.
  long max_grid_points = 200'000'000;
};

class Oracle {
 public:
  virtual ~Oracle() = default;
  virtual std::string name() const = 0;
  // Thread-safe; calls for different categories may run concurrently.
  virtual OracleResult Solve(int i, const Vector& y, const Vector& w, double tau) const = 0;
};

using InstancePtr = std::shared_ptr<const Instance>;

// Exact: enumerates arrangement vertices of every cell pair. Needs a
// kCpwaPieces cost model; throws kMissingDecomposition otherwise.
std::unique_ptr<Oracle> MakeCellCpwaOracle(InstancePtr instance, OracleOptions options = {});

// Exact for the quadratic barycenter cost: x ranges over mesh vertices and
// z is found face by face in closed form. Throws kWrongCostModel.
std::unique_ptr<Oracle> MakeQuadraticOracle(InstancePtr instance, OracleOptions options = {});

// Grid search with a Lipschitz certificate; any cost model. tau must be
// positive.
std::unique_ptr<Oracle> MakeLipschitzGridOracle(InstancePtr instance, OracleOptions options = {});

// "cell_cpwa", "quadratic", "lipschitz_grid", or "auto" (by decomposition).
std::unique_ptr<Oracle> MakeOracle(const std::string& name, InstancePtr instance,
                                   OracleOptions options = {});

// Objective value of the violation problem at (x, z).
double ViolationObjective(const Instance& instance, int i, const Point& x, const Point& z,
                          const Vector& y, const Vector& w);

Vector Densify(const SparseHat& h, int size);

}  // namespace teamsolve

#endif  // TEAMSOLVE_ORACLE_H_
