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

// Dense revised simplex for linear programs of the form
//
//   maximise  c'x   subject to  A x <= b,  E x = f,  x free.
//
// The solver works on the dual standard form
//
//   minimise  b'u + f'v   subject to  A'u + E'v = c,  u >= 0,  v free,
//
// whose basis has one row per primal variable. The primal solution is read
// off the simplex multipliers, and the row duals are the basic values. Row
// additions on the primal side are column additions here, so a previous
// optimal basis stays feasible and warm starts skip phase one.

#ifndef TEAMSOLVE_LINPROG_H_
#define TEAMSOLVE_LINPROG_H_

#include <iosfwd>
#include <string>
#include <utility>
#include <vector>

#include "teamsolve/common.h"

namespace teamsolve {

using SparseTerms = std::vector<std::pair<int, double>>;

class LpProblem {
 public:
  struct Row {
    std::vector<int> index;
    std::vector<double> value;
    double rhs = 0.0;
  };

  explicit LpProblem(int num_variables);

  int num_variables() const { return num_variables_; }
  void SetObjective(int var, double coeff);
  const Vector& objective() const { return objective_; }

  // Repeated indices are summed. Returns the row index within its block.
  int AddLessEqual(const SparseTerms& terms, double rhs);
  int AddEqual(const SparseTerms& terms, double rhs);

  int num_less_equal() const { return static_cast<int>(less_equal_.size()); }
  int num_equal() const { return static_cast<int>(equal_.size()); }
  const Row& less_equal(int r) const { return less_equal_[r]; }
  const Row& equal(int r) const { return equal_[r]; }

  // Fixed-format MPS with an OBJSENSE MAX section.
  void WriteMps(std::ostream& out, const std::string& name) const;

 private:
  Row MakeRow(const SparseTerms& terms, double rhs) const;

  int num_variables_;
  Vector objective_;
  std::vector<Row> less_equal_;
  std::vector<Row> equal_;
};

struct LpSolution {
  Vector primal;
  Vector inequality_duals;  // >= 0
  Vector equality_duals;
  double objective = 0.0;       // c'x
  double dual_objective = 0.0;  // b'u + f'v
  int iterations = 0;
};

struct LpOptions {
  double tolerance = kTolLp;
  // 0 selects a limit proportional to the problem size.
  long max_iterations = 0;
  int refactor_interval = 64;
};

// Not thread-safe; use one solver per thread.
class LpSolver {
 public:
  explicit LpSolver(LpOptions options = {});

  // Throws kLpInfeasible, kLpUnbounded or kLpIterationLimit. With
  // warm_start, the basis of the previous call is reused when `problem`
  // extends the previous problem by inequality rows only.
  LpSolution Solve(const LpProblem& problem, bool warm_start = true);

 private:
  enum class ColumnKind { kLessEqual, kEqualPlus, kEqualMinus, kArtificial };
  struct ColumnId {
    ColumnKind kind;
    int index;
  };
  struct SavedBasis {
    int num_variables = -1;
    int num_less_equal = -1;
    int num_equal = -1;
    std::vector<ColumnId> columns;
  };

  LpOptions options_;
  SavedBasis saved_;
};

}  // namespace teamsolve

#endif  // TEAMSOLVE_LINPROG_H_
