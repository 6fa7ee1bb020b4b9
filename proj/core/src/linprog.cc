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

#include "teamsolve/linprog.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>

#include <Eigen/LU>
#include <glog/logging.h>

namespace teamsolve {
namespace {

constexpr char kModule[] = "linprog";
constexpr double kPivotTol = 1e-9;
constexpr double kDegenerateStep = 1e-12;

// Column-wise storage of the dual standard form. Columns are laid out as
// [inequality rows | equality rows (+,-) | artificials].
class StandardForm {
 public:
  StandardForm(const LpProblem& p, const Vector& rhs)
      : n_(p.num_variables()),
        num_le_(p.num_less_equal()),
        num_eq_(p.num_equal()),
        rhs_(rhs) {
    const int ncols = num_columns();
    start_.reserve(ncols + 1);
    cost_.reserve(ncols);
    start_.push_back(0);
    for (int r = 0; r < num_le_; ++r) {
      const auto& row = p.less_equal(r);
      Append(row.index, row.value, 1.0);
      cost_.push_back(row.rhs);
    }
    for (int e = 0; e < num_eq_; ++e) {
      const auto& row = p.equal(e);
      Append(row.index, row.value, 1.0);
      cost_.push_back(row.rhs);
      Append(row.index, row.value, -1.0);
      cost_.push_back(-row.rhs);
    }
    for (int k = 0; k < n_; ++k) {
      index_.push_back(k);
      value_.push_back(rhs_[k] >= 0.0 ? 1.0 : -1.0);
      start_.push_back(static_cast<int>(index_.size()));
      cost_.push_back(0.0);
    }
    norm_.resize(ncols);
    for (int j = 0; j < ncols; ++j) {
      double s = 1.0;
      for (int t = start_[j]; t < start_[j + 1]; ++t) s += value_[t] * value_[t];
      norm_[j] = std::sqrt(s);
    }
  }

  int num_rows() const { return n_; }
  int num_structural() const { return num_le_ + 2 * num_eq_; }
  int num_columns() const { return num_structural() + n_; }
  bool is_artificial(int j) const { return j >= num_structural(); }
  int num_le() const { return num_le_; }
  int num_eq() const { return num_eq_; }
  const Vector& rhs() const { return rhs_; }
  double cost(int j) const { return cost_[j]; }
  double norm(int j) const { return norm_[j]; }
  int begin(int j) const { return start_[j]; }
  int end(int j) const { return start_[j + 1]; }
  int index(int t) const { return index_[t]; }
  double value(int t) const { return value_[t]; }

  double Dot(int j, const Vector& y) const {
    double s = 0.0;
    for (int t = start_[j]; t < start_[j + 1]; ++t) s += value_[t] * y[index_[t]];
    return s;
  }

 private:
  void Append(const std::vector<int>& idx, const std::vector<double>& val, double sign) {
    for (size_t t = 0; t < idx.size(); ++t) {
      index_.push_back(idx[t]);
      value_.push_back(sign * val[t]);
    }
    start_.push_back(static_cast<int>(index_.size()));
  }

  int n_, num_le_, num_eq_;
  Vector rhs_;
  std::vector<int> start_;
  std::vector<int> index_;
  std::vector<double> value_;
  std::vector<double> cost_;
  std::vector<double> norm_;
};

enum class PhaseResult { kOptimal, kUnbounded };

class Engine {
 public:
  Engine(const StandardForm& sf, const LpOptions& options, long max_iterations)
      : sf_(sf),
        options_(options),
        max_iterations_(max_iterations),
        n_(sf.num_rows()),
        in_basis_(sf.num_columns(), -1) {}

  void SetArtificialBasis() {
    std::vector<int> cols(n_);
    for (int k = 0; k < n_; ++k) cols[k] = sf_.num_structural() + k;
    CHECK(SetBasis(cols));
  }

  bool SetBasis(const std::vector<int>& cols) {
    basis_ = cols;
    std::fill(in_basis_.begin(), in_basis_.end(), -1);
    for (int k = 0; k < n_; ++k) {
      if (in_basis_[basis_[k]] >= 0) return false;
      in_basis_[basis_[k]] = k;
    }
    return Refactor();
  }

  const std::vector<int>& basis() const { return basis_; }
  const Vector& values() const { return x_; }
  long iterations() const { return iterations_; }

  double ArtificialSum() const {
    double s = 0.0;
    for (int k = 0; k < n_; ++k) {
      if (sf_.is_artificial(basis_[k])) s += std::max(0.0, x_[k]);
    }
    return s;
  }

  void ZeroArtificials() {
    for (int k = 0; k < n_; ++k) {
      if (sf_.is_artificial(basis_[k])) x_[k] = 0.0;
    }
  }

  Vector Multipliers(int phase) const {
    Vector cb(n_);
    for (int k = 0; k < n_; ++k) cb[k] = Cost(basis_[k], phase);
    return binv_.transpose() * cb;
  }

  PhaseResult Run(int phase) {
    const double tol = options_.tolerance;
    const long degenerate_limit = 5L * (n_ + sf_.num_columns());
    long degenerate_run = 0;
    bool bland = false;
    int since_refactor = 0;
    bool verified = false;
    for (;;) {
      if (iterations_ >= max_iterations_) {
        throw Error(ErrorCode::kLpIterationLimit, kModule,
                    "simplex iteration limit " + std::to_string(max_iterations_) +
                        " reached");
      }
      Vector y = Multipliers(phase);
      int q = Price(y, phase, bland, tol);
      if (q < 0) {
        if (since_refactor == 0 || verified) return PhaseResult::kOptimal;
        // Confirm optimality on a fresh factorisation.
        if (!Refactor()) throw Error(ErrorCode::kLpIterationLimit, kModule, "singular basis");
        since_refactor = 0;
        verified = true;
        continue;
      }
      verified = false;
      Vector alpha = Vector::Zero(n_);
      for (int t = sf_.begin(q); t < sf_.end(q); ++t) {
        alpha.noalias() += sf_.value(t) * binv_.col(sf_.index(t));
      }
      int r = RatioTest(alpha, phase, bland);
      if (r < 0) return PhaseResult::kUnbounded;
      double theta = std::max(0.0, x_[r]) / alpha[r];
      if (sf_.is_artificial(basis_[r]) && phase == 2) theta = 0.0;
      Pivot(r, q, alpha, theta);
      ++iterations_;
      ++since_refactor;
      if (theta <= kDegenerateStep) {
        if (++degenerate_run > degenerate_limit) bland = true;
      } else {
        degenerate_run = 0;
        bland = false;
      }
      if (since_refactor >= options_.refactor_interval) {
        if (!Refactor()) throw Error(ErrorCode::kLpIterationLimit, kModule, "singular basis");
        since_refactor = 0;
      }
    }
  }

 private:
  double Cost(int j, int phase) const {
    if (phase == 1) return sf_.is_artificial(j) ? 1.0 : 0.0;
    return sf_.is_artificial(j) ? 0.0 : sf_.cost(j);
  }

  bool Refactor() {
    Matrix b = Matrix::Zero(n_, n_);
    for (int k = 0; k < n_; ++k) {
      int j = basis_[k];
      for (int t = sf_.begin(j); t < sf_.end(j); ++t) b(sf_.index(t), k) += sf_.value(t);
    }
    Eigen::PartialPivLU<Matrix> lu(b);
    Vector diag = lu.matrixLU().diagonal().cwiseAbs();
    if (n_ > 0 && !(diag.minCoeff() > 1e-11 * std::max(1.0, diag.maxCoeff()))) return false;
    binv_ = lu.inverse();
    x_ = binv_ * sf_.rhs();
    return true;
  }

  int Price(const Vector& y, int phase, bool bland, double tol) const {
    int best = -1;
    double best_score = 0.0;
    const int ncols = sf_.num_structural();
    for (int j = 0; j < ncols; ++j) {
      if (in_basis_[j] >= 0) continue;
      double d = Cost(j, phase) - sf_.Dot(j, y);
      if (d >= -tol) continue;
      if (bland) return j;
      double score = -d / sf_.norm(j);
      if (score > best_score) {
        best_score = score;
        best = j;
      }
    }
    return best;
  }

  int RatioTest(const Vector& alpha, int phase, bool bland) const {
    const double feas = options_.tolerance;
    double theta_max = std::numeric_limits<double>::infinity();
    bool any = false;
    for (int k = 0; k < n_; ++k) {
      double a = alpha[k];
      if (phase == 2 && sf_.is_artificial(basis_[k])) {
        if (std::abs(a) > kPivotTol) {
          theta_max = 0.0;
          any = true;
        }
      } else if (a > kPivotTol) {
        theta_max = std::min(theta_max, (std::max(0.0, x_[k]) + feas) / a);
        any = true;
      }
    }
    if (!any) return -1;
    int best = -1;
    double best_key = -1.0;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (int k = 0; k < n_; ++k) {
      double a = alpha[k];
      double ratio;
      if (phase == 2 && sf_.is_artificial(basis_[k])) {
        if (std::abs(a) <= kPivotTol) continue;
        ratio = 0.0;
      } else {
        if (a <= kPivotTol) continue;
        ratio = std::max(0.0, x_[k]) / a;
      }
      if (ratio > theta_max) continue;
      if (bland) {
        if (ratio < best_ratio - 1e-15 ||
            (ratio <= best_ratio + 1e-15 && (best < 0 || basis_[k] < basis_[best]))) {
          best_ratio = std::min(best_ratio, ratio);
          best = k;
        }
      } else if (std::abs(a) > best_key) {
        best_key = std::abs(a);
        best = k;
      }
    }
    return best;
  }

  void Pivot(int r, int q, const Vector& alpha, double theta) {
    x_.noalias() -= theta * alpha;
    x_[r] = theta;
    Eigen::RowVectorXd pivot_row = binv_.row(r) / alpha[r];
    Vector a = alpha;
    a[r] = 0.0;
    binv_.noalias() -= a * pivot_row;
    binv_.row(r) = pivot_row;
    in_basis_[basis_[r]] = -1;
    basis_[r] = q;
    in_basis_[q] = r;
  }

  const StandardForm& sf_;
  LpOptions options_;
  long max_iterations_;
  int n_;
  std::vector<int> basis_;
  std::vector<int> in_basis_;
  Matrix binv_;
  Vector x_;
  long iterations_ = 0;
};

long IterationLimit(const LpOptions& options, const StandardForm& sf) {
  if (options.max_iterations > 0) return options.max_iterations;
  return 1000000L + 50L * (sf.num_rows() + sf.num_columns());
}

// Phase one followed by phase two from the artificial basis or `start`.
// Returns false when the dual form is infeasible.
bool SolveStandardForm(Engine& engine, const StandardForm& sf, double tol) {
  if (engine.ArtificialSum() > 0.0) {
    engine.Run(1);
    double scale = 1.0 + sf.rhs().lpNorm<Eigen::Infinity>();
    if (engine.ArtificialSum() > 1e2 * tol * scale) return false;
  }
  engine.ZeroArtificials();
  return true;
}

}  // namespace

LpProblem::LpProblem(int num_variables)
    : num_variables_(num_variables), objective_(Vector::Zero(num_variables)) {
  if (num_variables < 1) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "problem has no variables");
  }
}

void LpProblem::SetObjective(int var, double coeff) {
  if (var < 0 || var >= num_variables_) {
    throw Error(ErrorCode::kIndexOutOfRange, kModule, "objective index");
  }
  if (!std::isfinite(coeff)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "non-finite objective");
  }
  objective_[var] = coeff;
}

LpProblem::Row LpProblem::MakeRow(const SparseTerms& terms, double rhs) const {
  if (!std::isfinite(rhs)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "non-finite right-hand side");
  }
  std::map<int, double> merged;
  for (const auto& [idx, val] : terms) {
    if (idx < 0 || idx >= num_variables_) {
      throw Error(ErrorCode::kIndexOutOfRange, kModule, "row index");
    }
    if (!std::isfinite(val)) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "non-finite coefficient");
    }
    merged[idx] += val;
  }
  Row row;
  row.rhs = rhs;
  for (const auto& [idx, val] : merged) {
    if (val == 0.0) continue;
    row.index.push_back(idx);
    row.value.push_back(val);
  }
  return row;
}

int LpProblem::AddLessEqual(const SparseTerms& terms, double rhs) {
  less_equal_.push_back(MakeRow(terms, rhs));
  return num_less_equal() - 1;
}

int LpProblem::AddEqual(const SparseTerms& terms, double rhs) {
  equal_.push_back(MakeRow(terms, rhs));
  return num_equal() - 1;
}

void LpProblem::WriteMps(std::ostream& out, const std::string& name) const {
  auto row_name = [](char kind, int r) { return std::string(1, kind) + std::to_string(r); };
  out << "NAME          " << name << "\n";
  out << "OBJSENSE\n    MAX\n";
  out << "ROWS\n N  OBJ\n";
  for (int r = 0; r < num_less_equal(); ++r) out << " L  " << row_name('L', r) << "\n";
  for (int e = 0; e < num_equal(); ++e) out << " E  " << row_name('E', e) << "\n";
  std::vector<std::vector<std::pair<std::string, double>>> columns(num_variables_);
  for (int j = 0; j < num_variables_; ++j) {
    if (objective_[j] != 0.0) columns[j].push_back({"OBJ", objective_[j]});
  }
  for (int r = 0; r < num_less_equal(); ++r) {
    for (size_t t = 0; t < less_equal_[r].index.size(); ++t) {
      columns[less_equal_[r].index[t]].push_back({row_name('L', r), less_equal_[r].value[t]});
    }
  }
  for (int e = 0; e < num_equal(); ++e) {
    for (size_t t = 0; t < equal_[e].index.size(); ++t) {
      columns[equal_[e].index[t]].push_back({row_name('E', e), equal_[e].value[t]});
    }
  }
  out << "COLUMNS\n";
  for (int j = 0; j < num_variables_; ++j) {
    for (const auto& [row, val] : columns[j]) {
      out << "    X" << j << "  " << row << "  " << FormatDouble(val) << "\n";
    }
  }
  out << "RHS\n";
  for (int r = 0; r < num_less_equal(); ++r) {
    if (less_equal_[r].rhs != 0.0) {
      out << "    RHS  " << row_name('L', r) << "  " << FormatDouble(less_equal_[r].rhs) << "\n";
    }
  }
  for (int e = 0; e < num_equal(); ++e) {
    if (equal_[e].rhs != 0.0) {
      out << "    RHS  " << row_name('E', e) << "  " << FormatDouble(equal_[e].rhs) << "\n";
    }
  }
  out << "BOUNDS\n";
  for (int j = 0; j < num_variables_; ++j) out << " FR BND  X" << j << "\n";
  out << "ENDATA\n";
}

LpSolver::LpSolver(LpOptions options) : options_(options) {}

LpSolution LpSolver::Solve(const LpProblem& problem, bool warm_start) {
  StandardForm sf(problem, problem.objective());
  Engine engine(sf, options_, IterationLimit(options_, sf));

  bool started = false;
  if (warm_start && saved_.num_variables == problem.num_variables() &&
      saved_.num_equal == problem.num_equal() &&
      saved_.num_less_equal <= problem.num_less_equal()) {
    std::vector<int> cols;
    for (const ColumnId& id : saved_.columns) {
      switch (id.kind) {
        case ColumnKind::kLessEqual: cols.push_back(id.index); break;
        case ColumnKind::kEqualPlus: cols.push_back(sf.num_le() + 2 * id.index); break;
        case ColumnKind::kEqualMinus: cols.push_back(sf.num_le() + 2 * id.index + 1); break;
        case ColumnKind::kArtificial: cols.push_back(sf.num_structural() + id.index); break;
      }
    }
    if (engine.SetBasis(cols) && engine.values().minCoeff() >= -1e-7) {
      started = true;
    }
  }
  if (!started) engine.SetArtificialBasis();

  bool dual_feasible = SolveStandardForm(engine, sf, options_.tolerance);
  if (!dual_feasible && started) {
    // The reused basis led phase one astray; retry cold.
    engine.SetArtificialBasis();
    dual_feasible = SolveStandardForm(engine, sf, options_.tolerance);
  }
  if (!dual_feasible) {
    saved_ = SavedBasis{};
    // Either the primal is unbounded or it is infeasible. Decide with the
    // zero-objective problem, whose dual form is feasible at u = 0.
    StandardForm feas(problem, Vector::Zero(problem.num_variables()));
    Engine probe(feas, options_, IterationLimit(options_, feas));
    probe.SetArtificialBasis();
    probe.ZeroArtificials();
    if (probe.Run(2) == PhaseResult::kUnbounded) {
      throw Error(ErrorCode::kLpInfeasible, kModule, "primal problem is infeasible");
    }
    throw Error(ErrorCode::kLpUnbounded, kModule, "primal objective is unbounded");
  }
  if (engine.Run(2) == PhaseResult::kUnbounded) {
    saved_ = SavedBasis{};
    throw Error(ErrorCode::kLpInfeasible, kModule, "primal problem is infeasible");
  }

  LpSolution sol;
  sol.iterations = static_cast<int>(engine.iterations());
  sol.primal = engine.Multipliers(2);
  sol.inequality_duals = Vector::Zero(problem.num_less_equal());
  sol.equality_duals = Vector::Zero(problem.num_equal());
  const Vector& x = engine.values();
  const auto& basis = engine.basis();
  saved_.num_variables = problem.num_variables();
  saved_.num_less_equal = problem.num_less_equal();
  saved_.num_equal = problem.num_equal();
  saved_.columns.clear();
  for (size_t k = 0; k < basis.size(); ++k) {
    int j = basis[k];
    if (j < sf.num_le()) {
      sol.inequality_duals[j] = std::max(0.0, x[k]);
      saved_.columns.push_back({ColumnKind::kLessEqual, j});
    } else if (j < sf.num_structural()) {
      int e = (j - sf.num_le()) / 2;
      bool plus = (j - sf.num_le()) % 2 == 0;
      sol.equality_duals[e] += plus ? x[k] : -x[k];
      saved_.columns.push_back({plus ? ColumnKind::kEqualPlus : ColumnKind::kEqualMinus, e});
    } else {
      saved_.columns.push_back({ColumnKind::kArtificial, j - sf.num_structural()});
    }
  }
  sol.objective = problem.objective().dot(sol.primal);
  double dual = 0.0;
  for (int r = 0; r < problem.num_less_equal(); ++r) {
    dual += problem.less_equal(r).rhs * sol.inequality_duals[r];
  }
  for (int e = 0; e < problem.num_equal(); ++e) {
    dual += problem.equal(e).rhs * sol.equality_duals[e];
  }
  sol.dual_objective = dual;
  VLOG(2) << "lp solved: vars=" << problem.num_variables()
          << " rows=" << problem.num_less_equal() << "+" << problem.num_equal()
          << " iterations=" << sol.iterations << " value=" << sol.objective;
  return sol;
}

}  // namespace teamsolve
