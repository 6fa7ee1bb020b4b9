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

// Cutting-plane solver for the parametric dual
//
//   maximise  sum_i y_{i,0} + <gbar_i, y_i>
//   subject to  y_{i,0} + <g_i(x), y_i> + <h(z), w_i> <= c_i(x, z)  on X_i x Z,
//               sum_i w_i = 0,
//
// which keeps a finite constraint set per category and grows it with points
// returned by a global minimisation oracle.

#ifndef TEAMSOLVE_CUTTING_PLANE_H_
#define TEAMSOLVE_CUTTING_PLANE_H_

#include <iosfwd>
#include <utility>
#include <vector>

#include "teamsolve/common.h"
#include "teamsolve/linprog.h"
#include "teamsolve/measures.h"
#include "teamsolve/oracle.h"
#include "teamsolve/problems.h"

namespace teamsolve {

struct CuttingPlaneOptions {
  double eps_lsip = 1e-4;
  // Oracle tolerance; negative selects min(1e-10, eps_lsip / (2N)). Must be
  // below eps_lsip / N.
  double tau = -1.0;
  int max_iterations = 10000;
  // Oracle threads; 0 uses the hardware concurrency.
  int threads = 0;
  LpOptions lp;
  // Initial constraint points per category. Empty selects every pair of
  // mesh vertices, which keeps the first relaxation bounded.
  std::vector<std::vector<std::pair<Point, Point>>> initial_points;
  // Re-solve each coupling as a basic solution of its own moment LP, which
  // caps its support at 1 + m_i + k points without changing the cost.
  bool purify = true;
};

struct IterationRecord {
  int r = 0;
  double lp_value = 0.0;
  double gap = 0.0;
  int cuts_added = 0;
  double lp_time = 0.0;      // seconds
  double oracle_time = 0.0;  // seconds
};

struct CategorySolution {
  double y0 = 0.0;
  Vector y;
  Vector w;
};

// Finitely supported coupling on X_i x Z.
struct DiscreteCoupling {
  std::vector<Point> x;
  std::vector<Point> z;
  std::vector<double> weight;

  int size() const { return static_cast<int>(weight.size()); }
  // Z-marginal with coinciding atoms merged.
  DiscreteMeasure QualityMarginal() const;
};

struct CuttingPlaneResult {
  double alpha_ub = 0.0;
  double alpha_lb = 0.0;
  // Feasible for the full problem: y0 is the certified oracle lower bound.
  std::vector<CategorySolution> solution;
  // Optimal for the final relaxation's dual, one coupling per category.
  std::vector<DiscreteCoupling> theta;
  std::vector<IterationRecord> log;
  double eps_lsip = 0.0;
  double tau = 0.0;
  int total_cuts = 0;
};

// Throws kUnboundedRelaxation when the initial relaxation is unbounded and
// kMaxIterations when the gap does not close within the cap.
CuttingPlaneResult RunCuttingPlane(const Instance& instance, const Oracle& oracle,
                                   const CuttingPlaneOptions& options);

// Support size guaranteed for some optimal coupling: min_i m_i + k + 2.
int SparsityBound(const std::vector<int>& m, int k);

void WriteIterationCsv(std::ostream& out, const std::vector<IterationRecord>& log);

}  // namespace teamsolve

#endif  // TEAMSOLVE_CUTTING_PLANE_H_
