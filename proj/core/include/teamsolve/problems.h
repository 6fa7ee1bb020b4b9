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

// Cost models c_i(x, z) with their Lipschitz constants and the structure the
// oracles exploit.

#ifndef TEAMSOLVE_PROBLEMS_H_
#define TEAMSOLVE_PROBLEMS_H_

#include <memory>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "teamsolve/common.h"
#include "teamsolve/geometry.h"
#include "teamsolve/measures.h"

namespace teamsolve {

enum class Decomposition {
  // The hyperplanes returned by Breakpoints() cut X_i x Z into regions on
  // each of which c_i is a minimum of finitely many affine functions, so
  // minima over polytopes are attained at arrangement vertices.
  kCpwaPieces,
  // c_i(x, z) = lambda_i (|z|^2 - 2 <x, z>).
  kQuadratic,
  // Only evaluation and Lipschitz constants are available.
  kLipschitzOnly,
};

const char* DecompositionName(Decomposition d);

// The hyperplane <ax, x> + <az, z> = rhs.
struct Breakpoint {
  Point ax;
  Point az;
  double rhs = 0.0;
};

class CostModel {
 public:
  virtual ~CostModel() = default;

  virtual std::string family() const = 0;
  virtual int num_categories() const = 0;
  virtual double Eval(int i, const Point& x, const Point& z) const = 0;
  // Lipschitz constants in x and in z under the Euclidean metric.
  virtual double L1(int i) const = 0;
  virtual double L2(int i) const = 0;
  virtual Decomposition decomposition() const = 0;
  virtual std::vector<Breakpoint> Breakpoints(int i) const;
  // lambda_i of a quadratic model.
  virtual double QuadraticWeight(int i) const;
  // Constant added to reported bounds; zero unless the model drops terms
  // that only depend on x.
  virtual double ObjectiveShift(const std::vector<Measure>& measures) const;
  virtual nlohmann::json Describe() const = 0;

 protected:
  void CheckCategory(int i) const;
};

using CostPtr = std::shared_ptr<const CostModel>;

// Categories 1..N-1 walk to work, possibly taking a train between stations;
// category N restocks from a supplier.
class BusinessLocationCost : public CostModel {
 public:
  BusinessLocationCost(int num_categories, std::vector<Point> stations, double c_walk,
                       double c_train, double c_restock);

  std::string family() const override { return "business_location"; }
  int num_categories() const override { return n_; }
  double Eval(int i, const Point& x, const Point& z) const override;
  double L1(int i) const override;
  double L2(int i) const override { return L1(i); }
  Decomposition decomposition() const override { return Decomposition::kCpwaPieces; }
  std::vector<Breakpoint> Breakpoints(int i) const override;
  nlohmann::json Describe() const override;

  double c_walk() const { return c_walk_; }
  double c_train() const { return c_train_; }
  double c_restock() const { return c_restock_; }

 private:
  int n_;
  std::vector<Point> stations_;
  double c_walk_, c_train_, c_restock_;
};

// lambda_i (|z|^2 - 2 <x, z>); the dropped lambda_i |x|^2 terms come back
// through ObjectiveShift.
class BarycenterCost : public CostModel {
 public:
  // `type_radius[i]` and `quality_radius` bound |x| on X_i and |z| on Z.
  BarycenterCost(std::vector<double> weights, std::vector<double> type_radius,
                 double quality_radius);

  std::string family() const override { return "barycenter"; }
  int num_categories() const override { return static_cast<int>(weights_.size()); }
  double Eval(int i, const Point& x, const Point& z) const override;
  double L1(int i) const override;
  double L2(int i) const override;
  Decomposition decomposition() const override { return Decomposition::kQuadratic; }
  double QuadraticWeight(int i) const override;
  double ObjectiveShift(const std::vector<Measure>& measures) const override;
  nlohmann::json Describe() const override;

 private:
  std::vector<double> weights_;
  std::vector<double> type_radius_;
  double quality_radius_;
};

// (1/N) ((|x - <s_i, z>| min kappa2_i) - kappa1_i)^+ with scalar x.
class CappedAffineCost : public CostModel {
 public:
  CappedAffineCost(std::vector<Point> directions, std::vector<double> kappa1,
                   std::vector<double> kappa2);

  std::string family() const override { return "capped_affine"; }
  int num_categories() const override { return static_cast<int>(s_.size()); }
  double Eval(int i, const Point& x, const Point& z) const override;
  double L1(int i) const override;
  double L2(int i) const override { return L1(i); }
  Decomposition decomposition() const override { return Decomposition::kCpwaPieces; }
  std::vector<Breakpoint> Breakpoints(int i) const override;
  nlohmann::json Describe() const override;

  // Random instance: directions uniform on the unit circle's first
  // quadrant, 0 < kappa1 < kappa2 < 1.
  static CappedAffineCost Random(int num_categories, Rng& rng);

 private:
  std::vector<Point> s_;
  std::vector<double> kappa1_, kappa2_;
};

// a_i |x - z|_1 + b_i.
class WeightedL1Cost : public CostModel {
 public:
  WeightedL1Cost(std::vector<double> scale, std::vector<double> offset, int dim);

  std::string family() const override { return "weighted_l1"; }
  int num_categories() const override { return static_cast<int>(scale_.size()); }
  double Eval(int i, const Point& x, const Point& z) const override;
  double L1(int i) const override;
  double L2(int i) const override { return L1(i); }
  Decomposition decomposition() const override { return Decomposition::kCpwaPieces; }
  std::vector<Breakpoint> Breakpoints(int i) const override;
  nlohmann::json Describe() const override;

 private:
  std::vector<double> scale_, offset_;
  int dim_;
};

// Cost given by a table on finite type and quality spaces.
class TabulatedCost : public CostModel {
 public:
  // table[i](p, q) = c_i(type_points[i][p], quality_points[q]).
  TabulatedCost(std::vector<std::vector<Point>> type_points, std::vector<Point> quality_points,
                std::vector<Matrix> table);

  std::string family() const override { return "tabulated"; }
  int num_categories() const override { return static_cast<int>(table_.size()); }
  double Eval(int i, const Point& x, const Point& z) const override;
  double L1(int i) const override { return l1_[i]; }
  double L2(int i) const override { return l2_[i]; }
  // Finite spaces need no breakpoints: every cell is a single point.
  Decomposition decomposition() const override { return Decomposition::kCpwaPieces; }
  nlohmann::json Describe() const override;

 private:
  static int Find(const std::vector<Point>& points, const Point& p);

  std::vector<std::vector<Point>> type_points_;
  std::vector<Point> quality_points_;
  std::vector<Matrix> table_;
  std::vector<double> l1_, l2_;
};

// Everything the solvers need about one problem instance.
struct Instance {
  CostPtr cost;
  std::vector<HatBasis> type_bases;  // one per category
  HatBasis quality_basis;
  std::vector<Measure> measures;     // mu_i
  std::vector<Vector> moments;       // integrals of the type hats

  int num_categories() const { return static_cast<int>(type_bases.size()); }
  // Validates dimensions and computes the moments.
  static Instance Make(CostPtr cost, std::vector<HatBasis> type_bases,
                       HatBasis quality_basis, std::vector<Measure> measures);
};

// Largest excess |c(x,z) - c(x',z')| - L1 |x-x'| - L2 |z-z'| over random
// pairs drawn uniformly from the complexes. Non-positive means the stated
// constants held on every pair.
double LipschitzExcess(const CostModel& cost, int i, const SimplicialComplex& types,
                       const SimplicialComplex& qualities, int pairs, Rng& rng);

// Uniform point on a complex (volume weighted; uniform over points for
// point sets).
Point UniformPoint(const SimplicialComplex& complex, Rng& rng);

// Largest Euclidean norm over the vertices of a complex.
double MaxNorm(const SimplicialComplex& complex);

}  // namespace teamsolve

#endif  // TEAMSOLVE_PROBLEMS_H_
