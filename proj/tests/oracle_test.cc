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

#include "teamsolve/oracle.h"

#include <algorithm>
#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "testing/builders.h"

namespace teamsolve {
namespace {

using testing::CodeOf;
using testing::Grid;
using testing::P;
using testing::Share;
using testing::UniformInstance;

CostPtr AbsCost(double scale = 1.0) {
  return std::make_shared<WeightedL1Cost>(std::vector<double>{scale}, std::vector<double>{0.0}, 1);
}

Vector RandomVector(int n, double scale, Rng& rng) {
  std::uniform_real_distribution<double> u(-scale, scale);
  Vector v(n);
  for (int j = 0; j < n; ++j) v[j] = u(rng);
  return v;
}

void ExpectConsistent(const Instance& inst, int i, const Vector& y, const Vector& w,
                      const OracleResult& r, double tau) {
  EXPECT_LE(r.beta_lower, r.beta_tilde + 1e-12);
  EXPECT_LE(r.beta_tilde, r.beta_lower + tau + 1e-12);
  double direct = inst.cost->Eval(i, r.x, r.z) - r.g_at_x.Dot(y) - r.h_at_z.Dot(w);
  EXPECT_NEAR(r.beta_tilde, direct, 1e-10);
  EXPECT_NEAR(r.beta_tilde, ViolationObjective(inst, i, r.x, r.z, y, w), 1e-10);
  ASSERT_FALSE(r.pool.empty());
  for (const Cut& c : r.pool) {
    EXPECT_NEAR(c.cost, inst.cost->Eval(i, c.x, c.z), 1e-12);
  }
}

// Brute force over a product grid of points, with the linear terms
// precomputed per grid point.
double GridMin(const Instance& inst, int i, const Vector& y, const Vector& w,
               const std::vector<Point>& xs, const std::vector<Point>& zs) {
  std::vector<double> gy, hw;
  for (const Point& x : xs) gy.push_back(inst.type_bases[i].EvalSparse(x).Dot(y));
  for (const Point& z : zs) hw.push_back(inst.quality_basis.EvalSparse(z).Dot(w));
  double best = 1e300;
  for (size_t a = 0; a < xs.size(); ++a)
    for (size_t b = 0; b < zs.size(); ++b)
      best = std::min(best, inst.cost->Eval(i, xs[a], zs[b]) - gy[a] - hw[b]);
  return best;
}

std::vector<Point> Line(double lo, double hi, double step) {
  std::vector<Point> out;
  int n = static_cast<int>(std::round((hi - lo) / step));
  for (int k = 0; k <= n; ++k) out.push_back(P({lo + (hi - lo) * k / n}));
  return out;
}

std::vector<Point> SquareGrid(double lo, double hi, int n) {
  std::vector<Point> out;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; b <= n; ++b) out.push_back(P({lo + (hi - lo) * a / n, lo + (hi - lo) * b / n}));
  return out;
}

std::vector<Point> TriangleGrid(int n) {
  std::vector<Point> out;
  for (int a = 0; a <= n; ++a)
    for (int b = 0; a + b <= n; ++b) out.push_back(P({double(a) / n, double(b) / n}));
  return out;
}

ComplexPtr Triangle(int count) {
  return Share(SimplicialComplex::SimplexPartition({P({0, 0}), P({1, 0}), P({0, 1})}, count));
}

TEST(OracleTest, CellCpwaAbsZeroInputs) {
  auto unit = Grid({0}, {1}, {1});
  auto inst = UniformInstance(AbsCost(), {unit}, unit);
  auto oracle = MakeCellCpwaOracle(inst);
  Vector y = Vector::Zero(1), w = Vector::Zero(1);
  OracleResult r = oracle->Solve(0, y, w, 0.0);
  EXPECT_NEAR(r.beta_tilde, 0.0, 1e-15);
  EXPECT_EQ(r.beta_lower, r.beta_tilde);
  EXPECT_NEAR(r.x[0], r.z[0], 1e-15);
  ExpectConsistent(*inst, 0, y, w, r, 0.0);
}

TEST(OracleTest, CellCpwaMaximisesHat) {
  auto unit = Grid({0}, {1}, {1});
  auto inst = UniformInstance(AbsCost(0.0), {unit}, unit);
  auto oracle = MakeCellCpwaOracle(inst);
  // The basis drops x = 0, so its only entry is the hat at x = 1.
  Vector y = Vector::Constant(1, 10.0), w = Vector::Zero(1);
  OracleResult r = oracle->Solve(0, y, w, 0.0);
  EXPECT_NEAR(r.x[0], 1.0, 1e-15);
  EXPECT_NEAR(r.beta_tilde, -10.0, 1e-14);
}

TEST(OracleTest, CellCpwaMatchesFineGrid1d) {
  auto two = Grid({0}, {1}, {2});
  auto inst = UniformInstance(AbsCost(0.7), {two}, two);
  auto oracle = MakeCellCpwaOracle(inst);
  Rng rng = MakeRng(21, 0);
  auto xs = Line(0, 1, 1e-4);
  for (int t = 0; t < 3; ++t) {
    Vector y = RandomVector(2, 1.0, rng), w = RandomVector(2, 1.0, rng);
    OracleResult r = oracle->Solve(0, y, w, 0.0);
    ExpectConsistent(*inst, 0, y, w, r, 0.0);
    double grid = GridMin(*inst, 0, y, w, xs, xs);
    EXPECT_LE(r.beta_tilde, grid + 1e-12);
    EXPECT_NEAR(r.beta_tilde, grid, 1e-3);
  }
}

TEST(OracleTest, CellCpwaRejectsQuadratic) {
  auto sq = Grid({0, 0}, {1, 1}, {1, 1});
  auto cost = std::make_shared<BarycenterCost>(std::vector<double>{1.0},
                                               std::vector<double>{std::sqrt(2.0)}, std::sqrt(2.0));
  auto inst = UniformInstance(cost, {sq}, sq);
  EXPECT_EQ(CodeOf([&] { MakeCellCpwaOracle(inst); }), ErrorCode::kMissingDecomposition);
  EXPECT_EQ(CodeOf([&] { MakeOracle("cell_cpwa", inst); }), ErrorCode::kMissingDecomposition);
  EXPECT_EQ(MakeOracle("auto", inst)->name(), "quadratic");
}

TEST(OracleTest, QuadraticUnitSquare) {
  auto sq = Grid({0, 0}, {1, 1}, {1, 1});
  auto cost = std::make_shared<BarycenterCost>(std::vector<double>{1.0},
                                               std::vector<double>{std::sqrt(2.0)}, std::sqrt(2.0));
  auto inst = UniformInstance(cost, {sq}, sq);
  auto oracle = MakeQuadraticOracle(inst);
  Vector y = Vector::Zero(3), w = Vector::Zero(3);
  OracleResult r = oracle->Solve(0, y, w, 0.0);
  EXPECT_NEAR(r.beta_tilde, -2.0, 1e-14);
  EXPECT_NEAR(r.x[0], 1.0, 1e-15);
  EXPECT_NEAR(r.z[1], 1.0, 1e-15);
  EXPECT_NEAR(GridMin(*inst, 0, y, w, SquareGrid(0, 1, 100), SquareGrid(0, 1, 100)), -2.0, 1e-12);

  const double big_w = 0.7;
  w = Vector::Constant(3, big_w);
  r = oracle->Solve(0, y, w, 0.0);
  EXPECT_NEAR(r.beta_tilde, -2.0 - big_w, 1e-14);
  ExpectConsistent(*inst, 0, y, w, r, 0.0);
}

TEST(OracleTest, QuadraticRejectsOtherCosts) {
  auto unit = Grid({0}, {1}, {1});
  auto inst = UniformInstance(AbsCost(), {unit}, unit);
  EXPECT_EQ(CodeOf([&] { MakeQuadraticOracle(inst); }), ErrorCode::kWrongCostModel);
}

TEST(OracleTest, DegenerateSinglePointSimplexRejected) {
  Point p = P({0.3, 0.3});
  EXPECT_TRUE(CodeOf([&] { SimplicialComplex(2, {p, p, p}, {{0, 1, 2}}); }).has_value());
}

TEST(OracleTest, QuadraticMatchesGridOnRandomInputs) {
  auto xs = Grid({0, 0}, {1, 1}, {2, 2});
  auto zs = Grid({-0.5, 0}, {1.5, 1}, {2, 2});
  auto cost = std::make_shared<BarycenterCost>(std::vector<double>{0.5, 0.5},
                                               std::vector<double>{MaxNorm(*xs), MaxNorm(*xs)},
                                               MaxNorm(*zs));
  auto inst = UniformInstance(cost, {xs, xs}, zs);
  auto oracle = MakeQuadraticOracle(inst);
  Rng rng = MakeRng(22, 0);
  auto xgrid = SquareGrid(0, 1, 20);
  std::vector<Point> zgrid;
  for (const Point& p : SquareGrid(0, 1, 60)) zgrid.push_back(P({-0.5 + 2 * p[0], p[1]}));
  for (int t = 0; t < 10; ++t) {
    Vector y = RandomVector(inst->type_bases[0].size(), 0.3, rng);
    Vector w = RandomVector(inst->quality_basis.size(), 0.3, rng);
    OracleResult r = oracle->Solve(t % 2, y, w, 0.0);
    ExpectConsistent(*inst, t % 2, y, w, r, 0.0);
    double grid = GridMin(*inst, t % 2, y, w, xgrid, zgrid);
    EXPECT_LE(r.beta_tilde, grid + 1e-12);
    EXPECT_NEAR(r.beta_tilde, grid, 2e-3);
  }
}

TEST(OracleTest, GridConstantCost) {
  auto unit = Grid({0}, {1}, {2});
  auto inst = UniformInstance(AbsCost(0.0), {unit}, unit);
  auto oracle = MakeLipschitzGridOracle(inst);
  Vector y = Vector::Zero(2), w = Vector::Zero(2);
  for (double tau : {0.5, 0.01}) {
    OracleResult r = oracle->Solve(0, y, w, tau);
    EXPECT_EQ(r.beta_tilde, 0.0);
    EXPECT_NEAR(r.beta_lower, -tau, 1e-15);
  }
}

TEST(OracleTest, GridAbsBracket) {
  auto unit = Grid({0}, {1}, {1});
  auto inst = UniformInstance(AbsCost(), {unit}, unit);
  auto oracle = MakeLipschitzGridOracle(inst);
  Vector y = Vector::Zero(1), w = Vector::Zero(1);
  OracleResult r = oracle->Solve(0, y, w, 0.1);
  EXPECT_GE(r.beta_tilde, 0.0);
  EXPECT_LE(r.beta_tilde, 0.1);
  EXPECT_GE(r.beta_lower, -0.1);
  ExpectConsistent(*inst, 0, y, w, r, 0.1);
}

TEST(OracleTest, GridRejectsZeroTau) {
  auto unit = Grid({0}, {1}, {1});
  auto inst = UniformInstance(AbsCost(), {unit}, unit);
  auto oracle = MakeLipschitzGridOracle(inst);
  Vector y = Vector::Zero(1), w = Vector::Zero(1);
  EXPECT_EQ(CodeOf([&] { oracle->Solve(0, y, w, 0.0); }), ErrorCode::kInvalidArgument);
}

TEST(OracleTest, GridRespectsBudget) {
  auto unit = Grid({0}, {1}, {1});
  auto inst = UniformInstance(AbsCost(), {unit}, unit);
  OracleOptions opts;
  opts.max_grid_points = 1000;
  auto oracle = MakeLipschitzGridOracle(inst, opts);
  Vector y = Vector::Zero(1), w = Vector::Zero(1);
  EXPECT_EQ(CodeOf([&] { oracle->Solve(0, y, w, 1e-4); }), ErrorCode::kInvalidArgument);
}

std::shared_ptr<const Instance> CappedInstance(int n, int x_cells, int z_count, Rng& rng) {
  auto cost = std::make_shared<CappedAffineCost>(CappedAffineCost::Random(n, rng));
  std::vector<ComplexPtr> types(n, Grid({0}, {1}, {x_cells}));
  return UniformInstance(cost, types, Triangle(z_count));
}

TEST(OracleTest, GridAgreesWithCellCpwa) {
  Rng rng = MakeRng(23, 0);
  const double tau = 0.02;
  for (int t = 0; t < 20; ++t) {
    auto inst = CappedInstance(2, 2 + t % 3, 1 + t % 2, rng);
    auto exact = MakeCellCpwaOracle(inst);
    auto grid = MakeLipschitzGridOracle(inst);
    Vector y = RandomVector(inst->type_bases[0].size(), 0.3, rng);
    Vector w = RandomVector(inst->quality_basis.size(), 0.3, rng);
    OracleResult a = exact->Solve(0, y, w, 0.0);
    OracleResult b = grid->Solve(0, y, w, tau);
    ExpectConsistent(*inst, 0, y, w, a, 0.0);
    ExpectConsistent(*inst, 0, y, w, b, tau);
    EXPECT_LE(b.beta_lower, a.beta_tilde + 1e-12);
    EXPECT_LE(a.beta_tilde, b.beta_tilde + 1e-12);
    EXPECT_LE(b.beta_tilde - a.beta_tilde, tau);
  }
}

TEST(OracleTest, BusinessLocationCellMatchesGrid) {
  std::vector<Point> stations{P({0, 0}), P({0.5, 0.25}), P({-0.5, 0.5}), P({0, -0.5}),
                              P({-0.5, -0.5})};
  auto cost = std::make_shared<BusinessLocationCost>(2, stations, 0.15, 0.015, 0.4);
  auto sq = Grid({-1, -1}, {1, 1}, {2, 2});
  auto inst = UniformInstance(cost, {sq, sq}, sq);
  auto oracle = MakeCellCpwaOracle(inst);
  Rng rng = MakeRng(24, 0);
  auto g = SquareGrid(-1, 1, 24);
  for (int t = 0; t < 6; ++t) {
    int i = t % 2;
    Vector y = RandomVector(inst->type_bases[i].size(), 0.1, rng);
    Vector w = RandomVector(inst->quality_basis.size(), 0.1, rng);
    OracleResult r = oracle->Solve(i, y, w, 0.0);
    ExpectConsistent(*inst, i, y, w, r, 0.0);
    EXPECT_LE(r.beta_tilde, GridMin(*inst, i, y, w, g, g) + 1e-12);
  }
}

// beta_lower <= validation min <= beta_tilde <= beta_lower + tau, for
// every oracle, on random coefficients.
TEST(OracleTest, ValidationGridBracketsAllOracles) {
  Rng rng = MakeRng(25, 0);
  auto capped = CappedInstance(3, 3, 2, rng);
  auto xline = Line(0, 1, 1.0 / 60);
  auto tri = TriangleGrid(60);
  auto sq = Grid({0, 0}, {1, 1}, {2, 2});
  auto bcost = std::make_shared<BarycenterCost>(std::vector<double>{1.0},
                                                std::vector<double>{std::sqrt(2.0)},
                                                std::sqrt(2.0));
  auto bary = UniformInstance(bcost, {sq}, sq);
  auto sqgrid = SquareGrid(0, 1, 16);
  struct Case {
    std::shared_ptr<const Instance> inst;
    std::string oracle;
    double tau;
    const std::vector<Point>* xs;
    const std::vector<Point>* zs;
  };
  std::vector<Case> cases{{capped, "cell_cpwa", 0.0, &xline, &tri},
                          {capped, "lipschitz_grid", 0.05, &xline, &tri},
                          {bary, "quadratic", 0.0, &sqgrid, &sqgrid},
                          {bary, "lipschitz_grid", 0.4, &sqgrid, &sqgrid}};
  for (const Case& c : cases) {
    auto oracle = MakeOracle(c.oracle, c.inst);
    for (int t = 0; t < 50; ++t) {
      int i = t % c.inst->num_categories();
      Vector y = RandomVector(c.inst->type_bases[i].size(), 0.3, rng);
      Vector w = RandomVector(c.inst->quality_basis.size(), 0.3, rng);
      OracleResult r = oracle->Solve(i, y, w, c.tau);
      ExpectConsistent(*c.inst, i, y, w, r, c.tau);
      double grid = GridMin(*c.inst, i, y, w, *c.xs, *c.zs);
      EXPECT_LE(r.beta_lower, grid + 1e-12) << c.oracle;
    }
  }
}

// Dropping a different vertex from the basis is an affine change of the
// coefficients and must not change the optimum.
TEST(OracleTest, InvariantUnderRebasing) {
  Rng rng = MakeRng(26, 0);
  auto cost = std::make_shared<CappedAffineCost>(CappedAffineCost::Random(1, rng));
  auto xc = Grid({0}, {1}, {3});
  auto zc = Triangle(2);
  auto make = [&](int ex, int ez) {
    std::vector<HatBasis> bases{HatBasis(xc, ex)};
    std::vector<Measure> m{CpwaMeasure(xc, Vector::Ones(xc->num_vertices()))};
    return std::make_shared<const Instance>(Instance::Make(cost, bases, HatBasis(zc, ez), m));
  };
  auto a = make(-1, -1);
  const int ex = 2, ez = 4;
  auto b = make(ex, ez);
  auto oa = MakeCellCpwaOracle(a), ob = MakeCellCpwaOracle(b);
  for (int t = 0; t < 10; ++t) {
    Vector y = RandomVector(a->type_bases[0].size(), 0.5, rng);
    Vector w = RandomVector(a->quality_basis.size(), 0.5, rng);
    // Coefficients per vertex, zero at the dropped one.
    auto per_vertex = [](const HatBasis& hb, const Vector& c) {
      Vector v = Vector::Zero(hb.complex().num_vertices());
      for (int j = 0; j < hb.size(); ++j) v[hb.VertexOfIndex(j)] = c[j];
      return v;
    };
    Vector yv = per_vertex(a->type_bases[0], y), wv = per_vertex(a->quality_basis, w);
    // Subtract the value at the new dropped vertex; the constant moves to beta.
    double shift = yv[ex] + wv[ez];
    auto rebase = [](const HatBasis& hb, const Vector& v, double at) {
      Vector c(hb.size());
      for (int j = 0; j < hb.size(); ++j) c[j] = v[hb.VertexOfIndex(j)] - at;
      return c;
    };
    Vector y2 = rebase(b->type_bases[0], yv, yv[ex]);
    Vector w2 = rebase(b->quality_basis, wv, wv[ez]);
    double va = oa->Solve(0, y, w, 0.0).beta_tilde;
    double vb = ob->Solve(0, y2, w2, 0.0).beta_tilde;
    EXPECT_NEAR(va, vb - shift, 1e-8);
  }
}

TEST(OracleTest, PoolIsSortedAndCapped) {
  Rng rng = MakeRng(27, 0);
  auto inst = CappedInstance(1, 6, 3, rng);
  OracleOptions opts;
  opts.pool_margin = 1e9;
  opts.pool_cap = 5;
  auto oracle = MakeCellCpwaOracle(inst, opts);
  Vector y = RandomVector(inst->type_bases[0].size(), 0.3, rng);
  Vector w = RandomVector(inst->quality_basis.size(), 0.3, rng);
  OracleResult r = oracle->Solve(0, y, w, 0.0);
  ASSERT_EQ(r.pool.size(), 5u);
  double prev = -1e300;
  for (const Cut& c : r.pool) {
    double v = ViolationObjective(*inst, 0, c.x, c.z, y, w);
    EXPECT_GE(v, prev - 1e-12);
    prev = v;
  }
}

TEST(OracleTest, FiniteSpacesEnumerateEverything) {
  Rng rng = MakeRng(28, 0);
  std::vector<Point> xs{P({0}), P({1}), P({3})}, zs{P({0}), P({2})};
  Matrix table = Matrix::Random(3, 2);
  auto cost = std::make_shared<TabulatedCost>(std::vector<std::vector<Point>>{xs}, zs,
                                              std::vector<Matrix>{table});
  auto inst = UniformInstance(cost, {Share(SimplicialComplex::PointSet(xs))},
                              Share(SimplicialComplex::PointSet(zs)));
  auto oracle = MakeOracle("auto", inst);
  EXPECT_EQ(oracle->name(), "cell_cpwa");
  Vector y = RandomVector(2, 1.0, rng), w = RandomVector(1, 1.0, rng);
  OracleResult r = oracle->Solve(0, y, w, 0.0);
  EXPECT_NEAR(r.beta_tilde, GridMin(*inst, 0, y, w, xs, zs), 1e-14);
}

TEST(OracleTest, UnknownNameRejected) {
  auto unit = Grid({0}, {1}, {1});
  auto inst = UniformInstance(AbsCost(), {unit}, unit);
  EXPECT_EQ(CodeOf([&] { MakeOracle("milp", inst); }), ErrorCode::kInvalidArgument);
}

}  // namespace
}  // namespace teamsolve
