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

#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "testing/dense_tableau_lp.h"

namespace teamsolve {
namespace {

TEST(LinprogTest, SingleBound) {
  LpProblem lp(1);
  lp.SetObjective(0, 1.0);
  lp.AddLessEqual({{0, 1.0}}, 3.0);
  LpSolver solver;
  LpSolution sol = solver.Solve(lp);
  EXPECT_NEAR(sol.primal[0], 3.0, 1e-12);
  EXPECT_NEAR(sol.inequality_duals[0], 1.0, 1e-12);
  EXPECT_NEAR(sol.objective, 3.0, 1e-12);
  EXPECT_NEAR(sol.dual_objective, 3.0, 1e-12);
}

TEST(LinprogTest, EqualityCoupledBounds) {
  LpProblem lp(2);
  lp.SetObjective(0, 1.0);
  lp.SetObjective(1, 1.0);
  lp.AddLessEqual({{0, 1.0}}, 1.0);
  lp.AddLessEqual({{1, 1.0}}, 1.0);
  lp.AddEqual({{0, 1.0}, {1, -1.0}}, 0.0);
  LpSolution sol = LpSolver().Solve(lp);
  EXPECT_NEAR(sol.primal[0], 1.0, 1e-12);
  EXPECT_NEAR(sol.primal[1], 1.0, 1e-12);
  EXPECT_NEAR(sol.objective, 2.0, 1e-12);
}

TEST(LinprogTest, UnboundedReported) {
  LpProblem lp(1);
  lp.SetObjective(0, 1.0);
  lp.AddLessEqual({{0, -1.0}}, 0.0);
  try {
    LpSolver().Solve(lp);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLpUnbounded);
  }
}

TEST(LinprogTest, InfeasibleReported) {
  LpProblem lp(1);
  lp.SetObjective(0, 1.0);
  lp.AddLessEqual({{0, 1.0}}, 0.0);
  lp.AddLessEqual({{0, -1.0}}, -1.0);
  try {
    LpSolver().Solve(lp);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLpInfeasible);
  }
}

TEST(LinprogTest, RepeatedIndicesAreSummed) {
  LpProblem lp(1);
  lp.SetObjective(0, 1.0);
  lp.AddLessEqual({{0, 1.0}, {0, 1.0}}, 4.0);
  EXPECT_NEAR(LpSolver().Solve(lp).primal[0], 2.0, 1e-12);
}

TEST(LinprogTest, RejectsBadIndex) {
  LpProblem lp(2);
  EXPECT_THROW(lp.AddLessEqual({{2, 1.0}}, 0.0), Error);
  EXPECT_THROW(lp.SetObjective(-1, 1.0), Error);
}

TEST(LinprogTest, MpsExportHasSections) {
  LpProblem lp(2);
  lp.SetObjective(0, 1.0);
  lp.AddLessEqual({{0, 1.0}, {1, 2.0}}, 3.0);
  lp.AddEqual({{1, 1.0}}, 1.0);
  std::ostringstream out;
  lp.WriteMps(out, "tiny");
  const std::string s = out.str();
  for (const char* section : {"NAME", "OBJSENSE", "ROWS", "COLUMNS", "RHS", "BOUNDS", "ENDATA"}) {
    EXPECT_NE(s.find(section), std::string::npos) << section;
  }
  EXPECT_NE(s.find(" FR BND  X1"), std::string::npos);
}

// Random bounded LPs: a box keeps them bounded, a random point inside keeps
// them feasible.
struct RandomLp {
  LpProblem lp;
  Eigen::MatrixXd a, e;
  Eigen::VectorXd b, f, c;
};

RandomLp MakeRandomLp(int n, int rows, int eqs, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  Eigen::VectorXd x0(n);
  for (int j = 0; j < n; ++j) x0[j] = u(rng);
  const int ma = rows + 2 * n;
  RandomLp r{LpProblem(n), Eigen::MatrixXd::Zero(ma, n), Eigen::MatrixXd::Zero(eqs, n),
             Eigen::VectorXd::Zero(ma), Eigen::VectorXd::Zero(eqs), Eigen::VectorXd::Zero(n)};
  for (int j = 0; j < n; ++j) {
    r.c[j] = u(rng);
    r.lp.SetObjective(j, r.c[j]);
  }
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < n; ++j) r.a(i, j) = u(rng);
    r.b[i] = r.a.row(i).dot(x0) + 0.5 * (u(rng) + 1.0);
  }
  for (int j = 0; j < n; ++j) {
    r.a(rows + 2 * j, j) = 1.0;
    r.b[rows + 2 * j] = 3.0;
    r.a(rows + 2 * j + 1, j) = -1.0;
    r.b[rows + 2 * j + 1] = 3.0;
  }
  for (int i = 0; i < ma; ++i) {
    SparseTerms t;
    for (int j = 0; j < n; ++j) {
      if (r.a(i, j) != 0.0) t.push_back({j, r.a(i, j)});
    }
    r.lp.AddLessEqual(t, r.b[i]);
  }
  for (int i = 0; i < eqs; ++i) {
    SparseTerms t;
    for (int j = 0; j < n; ++j) {
      r.e(i, j) = u(rng);
      t.push_back({j, r.e(i, j)});
    }
    r.f[i] = r.e.row(i).dot(x0);
    r.lp.AddEqual(t, r.f[i]);
  }
  return r;
}

TEST(LinprogPropertyTest, StrongDualityAgainstVertexEnumeration) {
  for (uint64_t seed : {1u, 2u, 3u, 4u}) {
    std::mt19937_64 rng(seed);
    for (int trial = 0; trial < 25; ++trial) {
      const int n = 2 + trial % 3;
      const int eqs = trial % 2;
      RandomLp r = MakeRandomLp(n, 3 + trial % 4, eqs, rng);
      LpSolution sol = LpSolver().Solve(r.lp);
      auto ref = testing::VertexEnumerationMaximize(r.a, r.b, r.e, r.f, r.c);
      ASSERT_TRUE(ref.has_value());
      EXPECT_NEAR(sol.objective, *ref, 1e-8) << "seed " << seed << " trial " << trial;
      EXPECT_NEAR(sol.objective, sol.dual_objective, 1e-8);
      // Primal feasibility, dual feasibility, complementary slackness.
      Eigen::VectorXd slack = r.b - r.a * sol.primal;
      EXPECT_GE(slack.minCoeff(), -1e-8);
      if (eqs > 0) EXPECT_LE((r.e * sol.primal - r.f).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_GE(sol.inequality_duals.minCoeff(), 0.0);
      Eigen::VectorXd grad = r.a.transpose() * sol.inequality_duals;
      if (eqs > 0) grad += r.e.transpose() * sol.equality_duals;
      EXPECT_LE((grad - r.c).cwiseAbs().maxCoeff(), 1e-8);
      EXPECT_LE(std::abs(slack.dot(sol.inequality_duals)), 1e-8);
    }
  }
}

TEST(LinprogPropertyTest, WarmStartMatchesColdStart) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  RandomLp r = MakeRandomLp(5, 4, 1, rng);
  LpSolver warm;
  warm.Solve(r.lp);
  for (int round = 0; round < 20; ++round) {
    SparseTerms t;
    for (int j = 0; j < 5; ++j) t.push_back({j, u(rng)});
    r.lp.AddLessEqual(t, 0.5 + u(rng));
    double cold_value;
    try {
      cold_value = LpSolver().Solve(r.lp).objective;
    } catch (const Error& e) {
      EXPECT_THROW(warm.Solve(r.lp), Error);
      break;
    }
    EXPECT_NEAR(warm.Solve(r.lp).objective, cold_value, 1e-8) << "round " << round;
  }
}

TEST(LinprogPropertyTest, MatchesDenseTableauOnTransportLp) {
  // max sum a_i u_i + sum b_j v_j s.t. u_i + v_j <= d_ij is the dual of a
  // transport problem; compare with the tableau solution of the primal.
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    const int n1 = 3 + trial % 3, n2 = 2 + trial % 4;
    Eigen::VectorXd a(n1), b(n2);
    for (int i = 0; i < n1; ++i) a[i] = 0.1 + u(rng);
    for (int j = 0; j < n2; ++j) b[j] = 0.1 + u(rng);
    a /= a.sum();
    b /= b.sum();
    Eigen::MatrixXd d(n1, n2);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) d(i, j) = u(rng);
    LpProblem lp(n1 + n2);
    for (int i = 0; i < n1; ++i) lp.SetObjective(i, a[i]);
    for (int j = 0; j < n2; ++j) lp.SetObjective(n1 + j, b[j]);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) lp.AddLessEqual({{i, 1.0}, {n1 + j, 1.0}}, d(i, j));
    LpSolution sol = LpSolver().Solve(lp);

    Eigen::MatrixXd eq = Eigen::MatrixXd::Zero(n1 + n2, n1 * n2);
    Eigen::VectorXd rhs(n1 + n2), cost(n1 * n2);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) {
        eq(i, i * n2 + j) = 1.0;
        eq(n1 + j, i * n2 + j) = 1.0;
        cost[i * n2 + j] = d(i, j);
      }
    rhs << a, b;
    auto ref = testing::DenseTableauMinimize(eq, rhs, cost);
    ASSERT_EQ(ref.status, testing::RefStatus::kOptimal);
    EXPECT_NEAR(sol.objective, ref.value, 1e-9);
    // The row duals form a transport plan.
    Eigen::MatrixXd plan(n1, n2);
    for (int i = 0; i < n1; ++i)
      for (int j = 0; j < n2; ++j) plan(i, j) = sol.inequality_duals[i * n2 + j];
    EXPECT_LE((plan.rowwise().sum() - a).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_LE((plan.colwise().sum().transpose() - b).cwiseAbs().maxCoeff(), 1e-9);
  }
}

TEST(LinprogTest, IterationLimitIsReported) {
  std::mt19937_64 rng(3);
  RandomLp r = MakeRandomLp(6, 10, 0, rng);
  LpOptions options;
  options.max_iterations = 1;
  try {
    LpSolver(options).Solve(r.lp);
    FAIL() << "expected an error";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kLpIterationLimit);
  }
}

}  // namespace
}  // namespace teamsolve
