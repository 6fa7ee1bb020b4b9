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

#include "teamsolve/cutting_plane.h"

#include <cmath>
#include <random>
#include <sstream>

#include <gtest/gtest.h>

#include "testing/builders.h"
#include "testing/mt_lin.h"

namespace teamsolve {
namespace {

using testing::CodeOf;
using testing::Grid;
using testing::P;
using testing::Share;

struct DiscreteCase {
  std::shared_ptr<const Instance> inst;
  std::vector<Eigen::MatrixXd> cost;
  std::vector<Eigen::VectorXd> mu;
};

DiscreteCase MakeDiscrete(const std::vector<std::vector<Point>>& xs, const std::vector<Point>& zs,
                          const std::vector<Eigen::MatrixXd>& cost,
                          const std::vector<Eigen::VectorXd>& mu) {
  std::vector<Matrix> tables(cost.begin(), cost.end());
  auto model = std::make_shared<TabulatedCost>(xs, zs, tables);
  std::vector<HatBasis> bases;
  std::vector<Measure> measures;
  for (size_t i = 0; i < xs.size(); ++i) {
    bases.emplace_back(Share(SimplicialComplex::PointSet(xs[i])));
    measures.emplace_back(
        DiscreteMeasure(xs[i], std::vector<double>(mu[i].data(), mu[i].data() + mu[i].size())));
  }
  auto inst = std::make_shared<const Instance>(Instance::Make(
      model, bases, HatBasis(Share(SimplicialComplex::PointSet(zs))), measures));
  return {inst, cost, mu};
}

DiscreteCase RandomDiscrete(int n, int nx, int nz, Rng& rng) {
  std::uniform_real_distribution<double> u(0, 1);
  std::vector<std::vector<Point>> xs(n);
  std::vector<Point> zs;
  std::vector<Eigen::MatrixXd> cost;
  std::vector<Eigen::VectorXd> mu;
  for (int q = 0; q < nz; ++q) zs.push_back(P({double(q)}));
  for (int i = 0; i < n; ++i) {
    for (int p = 0; p < nx; ++p) xs[i].push_back(P({double(p), double(i)}));
    Eigen::MatrixXd c(nx, nz);
    for (int p = 0; p < nx; ++p)
      for (int q = 0; q < nz; ++q) c(p, q) = u(rng);
    cost.push_back(c);
    Eigen::VectorXd m(nx);
    for (int p = 0; p < nx; ++p) m[p] = 0.1 + u(rng);
    mu.push_back(m / m.sum());
  }
  return MakeDiscrete(xs, zs, cost, mu);
}

void ExpectDualInvariants(const Instance& inst, const CuttingPlaneResult& r, double tol) {
  const int n = inst.num_categories();
  ASSERT_EQ(static_cast<int>(r.theta.size()), n);
  Vector common;
  double objective = 0.0;
  for (int i = 0; i < n; ++i) {
    const DiscreteCoupling& c = r.theta[i];
    EXPECT_LE(c.size(), 1 + inst.type_bases[i].size() + inst.quality_basis.size());
    double total = 0.0;
    Vector gm = Vector::Zero(inst.type_bases[i].size());
    Vector hm = Vector::Zero(inst.quality_basis.size());
    for (int a = 0; a < c.size(); ++a) {
      EXPECT_GT(c.weight[a], 0.0);
      total += c.weight[a];
      gm += c.weight[a] * inst.type_bases[i].Eval(c.x[a]);
      hm += c.weight[a] * inst.quality_basis.Eval(c.z[a]);
      objective += c.weight[a] * inst.cost->Eval(i, c.x[a], c.z[a]);
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
    EXPECT_LE((gm - inst.moments[i]).lpNorm<Eigen::Infinity>(), tol);
    if (i == 0) common = hm;
    EXPECT_LE((hm - common).lpNorm<Eigen::Infinity>(), tol);
  }
  EXPECT_NEAR(objective, r.alpha_ub, 1e-7);
  Vector wsum = Vector::Zero(inst.quality_basis.size());
  for (const auto& s : r.solution) wsum += s.w;
  EXPECT_LE(wsum.lpNorm<Eigen::Infinity>(), 1e-9);
}

TEST(CuttingPlaneTest, TwoPointTransport) {
  std::vector<Point> pts{P({0}), P({1})};
  Eigen::MatrixXd c(2, 2);
  c << 0, 1, 1, 0;
  auto dc = MakeDiscrete({{P({0})}, {P({1})}}, pts,
                         {c.topRows(1), c.bottomRows(1)},
                         {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)});
  auto oracle = MakeOracle("auto", dc.inst);
  CuttingPlaneOptions opts;
  opts.eps_lsip = 1e-6;
  CuttingPlaneResult r = RunCuttingPlane(*dc.inst, *oracle, opts);
  EXPECT_LE(r.alpha_lb, 1.0 + 1e-9);
  EXPECT_GE(r.alpha_ub, 1.0 - 1e-9);
  EXPECT_LE(r.alpha_ub - r.alpha_lb, 1e-6);
  EXPECT_NEAR(testing::MtLinReference(dc.cost, dc.mu).value, 1.0, 1e-12);
  ExpectDualInvariants(*dc.inst, r, 1e-8);
}

TEST(CuttingPlaneTest, ZeroCostOneIteration) {
  auto unit = Grid({0}, {1}, {2});
  auto cost = std::make_shared<WeightedL1Cost>(std::vector<double>{0.0}, std::vector<double>{0.0}, 1);
  auto inst = testing::UniformInstance(cost, {unit}, unit);
  auto oracle = MakeOracle("auto", inst);
  CuttingPlaneResult r = RunCuttingPlane(*inst, *oracle, {});
  EXPECT_EQ(r.log.size(), 1u);
  EXPECT_NEAR(r.alpha_ub, 0.0, 1e-12);
  EXPECT_NEAR(r.alpha_lb, 0.0, 1e-12);
}

TEST(CuttingPlaneTest, TwoPointBarycenterRawValue) {
  auto z = Grid({0, -1}, {2, 1}, {4, 4});
  auto cost = std::make_shared<BarycenterCost>(std::vector<double>{0.5, 0.5},
                                               std::vector<double>{0.0, 2.0}, MaxNorm(*z));
  std::vector<HatBasis> bases{HatBasis(Share(SimplicialComplex::PointSet({P({0, 0})}))),
                              HatBasis(Share(SimplicialComplex::PointSet({P({2, 0})})))};
  std::vector<Measure> m{DiscreteMeasure::Dirac(P({0, 0})), DiscreteMeasure::Dirac(P({2, 0}))};
  auto inst = std::make_shared<const Instance>(Instance::Make(cost, bases, HatBasis(z), m));
  auto oracle = MakeOracle("auto", inst);
  CuttingPlaneOptions opts;
  opts.eps_lsip = 1e-6;
  CuttingPlaneResult r = RunCuttingPlane(*inst, *oracle, opts);
  EXPECT_LE(r.alpha_lb, -1.0 + 1e-9);
  EXPECT_GE(r.alpha_ub, -1.0 - 1e-9);
  EXPECT_LE(r.alpha_ub - r.alpha_lb, 1e-6);
  EXPECT_NEAR(r.alpha_ub + cost->ObjectiveShift(m), 1.0, 1e-6);
  ExpectDualInvariants(*inst, r, 1e-8);
}

TEST(CuttingPlaneTest, MatchesFlatLpOnRandomFiniteInstances) {
  Rng rng = MakeRng(31, 0);
  for (int t = 0; t < 15; ++t) {
    auto dc = RandomDiscrete(2 + t % 3, 2 + t % 3, 2 + (t / 3) % 3, rng);
    auto oracle = MakeOracle("auto", dc.inst);
    CuttingPlaneOptions opts;
    opts.eps_lsip = 1e-7;
    CuttingPlaneResult r = RunCuttingPlane(*dc.inst, *oracle, opts);
    auto ref = testing::MtLinReference(dc.cost, dc.mu);
    ASSERT_EQ(ref.status, testing::RefStatus::kOptimal);
    EXPECT_NEAR(r.alpha_ub, ref.value, 1e-7);
    EXPECT_NEAR(r.alpha_lb, ref.value, 1e-7);
    ExpectDualInvariants(*dc.inst, r, 1e-8);
  }
}

std::shared_ptr<const Instance> Capped(int n, Rng& rng) {
  auto cost = std::make_shared<CappedAffineCost>(CappedAffineCost::Random(n, rng));
  std::vector<ComplexPtr> types(n, Grid({0}, {1}, {4}));
  auto tri = Share(SimplicialComplex::SimplexPartition({P({0, 0}), P({1, 0}), P({0, 1})}, 3));
  std::vector<HatBasis> bases;
  std::vector<Measure> measures;
  for (int i = 0; i < n; ++i) {
    bases.emplace_back(types[i]);
    measures.emplace_back(RandomCpwaDensity(types[i], rng));
  }
  return std::make_shared<const Instance>(
      Instance::Make(cost, bases, HatBasis(tri), measures));
}

TEST(CuttingPlaneTest, CappedAffineBracketsAndInvariants) {
  Rng rng = MakeRng(32, 0);
  auto inst = Capped(4, rng);
  auto oracle = MakeOracle("cell_cpwa", inst);
  CuttingPlaneOptions opts;
  opts.eps_lsip = 1e-5;
  CuttingPlaneResult r = RunCuttingPlane(*inst, *oracle, opts);
  EXPECT_LE(r.alpha_lb, r.alpha_ub);
  EXPECT_LE(r.alpha_ub - r.alpha_lb, opts.eps_lsip);
  ExpectDualInvariants(*inst, r, 1e-8);
  // Relaxation values never increase.
  for (size_t k = 1; k < r.log.size(); ++k) {
    EXPECT_LE(r.log[k].lp_value, r.log[k - 1].lp_value + 1e-9);
  }
  // The returned solution is feasible: every oracle value is at least y0.
  for (int i = 0; i < inst->num_categories(); ++i) {
    const CategorySolution& s = r.solution[i];
    OracleResult o = oracle->Solve(i, s.y, s.w, 0.0);
    EXPECT_GE(o.beta_lower, s.y0 - 1e-12);
  }
  // The lower bound is the objective of that solution.
  double value = 0.0;
  for (int i = 0; i < inst->num_categories(); ++i) {
    value += r.solution[i].y0 + inst->moments[i].dot(r.solution[i].y);
  }
  EXPECT_NEAR(value, r.alpha_lb, 1e-9);
}

TEST(CuttingPlaneTest, GridOracleAlsoConverges) {
  Rng rng = MakeRng(33, 0);
  auto inst = Capped(2, rng);
  auto exact = MakeOracle("cell_cpwa", inst);
  auto grid = MakeOracle("lipschitz_grid", inst);
  CuttingPlaneOptions opts;
  opts.eps_lsip = 0.02;
  CuttingPlaneResult a = RunCuttingPlane(*inst, *exact, opts);
  opts.tau = 0.004;
  CuttingPlaneResult b = RunCuttingPlane(*inst, *grid, opts);
  EXPECT_LE(b.alpha_lb, a.alpha_ub + 1e-9);
  EXPECT_LE(a.alpha_lb, b.alpha_ub + 1e-9);
}

TEST(CuttingPlaneTest, RejectsBadTolerances) {
  Rng rng = MakeRng(34, 0);
  auto inst = Capped(2, rng);
  auto oracle = MakeOracle("auto", inst);
  CuttingPlaneOptions opts;
  opts.eps_lsip = 0.0;
  EXPECT_EQ(CodeOf([&] { RunCuttingPlane(*inst, *oracle, opts); }), ErrorCode::kInvalidArgument);
  opts.eps_lsip = 1e-3;
  opts.tau = 1e-3;
  EXPECT_EQ(CodeOf([&] { RunCuttingPlane(*inst, *oracle, opts); }), ErrorCode::kInvalidArgument);
}

TEST(CuttingPlaneTest, SmallInitialSetIsUnbounded) {
  Rng rng = MakeRng(35, 0);
  auto inst = Capped(2, rng);
  auto oracle = MakeOracle("auto", inst);
  CuttingPlaneOptions opts;
  opts.initial_points = {{{P({0}), P({0, 0})}}, {{P({0}), P({0, 0})}}};
  EXPECT_EQ(CodeOf([&] { RunCuttingPlane(*inst, *oracle, opts); }),
            ErrorCode::kUnboundedRelaxation);
}

TEST(CuttingPlaneTest, IterationCap) {
  Rng rng = MakeRng(36, 0);
  auto inst = Capped(3, rng);
  auto oracle = MakeOracle("auto", inst);
  CuttingPlaneOptions opts;
  opts.eps_lsip = 1e-9;
  opts.max_iterations = 1;
  auto code = CodeOf([&] { RunCuttingPlane(*inst, *oracle, opts); });
  EXPECT_EQ(code, ErrorCode::kMaxIterations);
}

TEST(CuttingPlaneTest, SparsityBoundExamples) {
  EXPECT_EQ(SparsityBound(std::vector<int>(5, 49), 560), 611);
  EXPECT_EQ(SparsityBound({1}, 0), 3);
  EXPECT_EQ(SparsityBound({3, 5}, 2), 7);
}

TEST(CuttingPlaneTest, IterationCsvHeader) {
  std::ostringstream out;
  WriteIterationCsv(out, {IterationRecord{0, 1.5, 0.25, 3, 0.1, 0.2}});
  EXPECT_EQ(out.str().substr(0, out.str().find('\n')),
            "r,lp_value,gap,cuts_added,lp_time,oracle_time");
  EXPECT_NE(out.str().find("0,1.5,0.25,3,"), std::string::npos);
}

}  // namespace
}  // namespace teamsolve
