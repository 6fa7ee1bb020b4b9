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

#include "teamsolve/problems.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>

namespace teamsolve {
namespace {

constexpr char kModule[] = "problems";

Point Unit(int dim, int k) {
  Point e = Point::Zero(dim);
  e[k] = 1.0;
  return e;
}

nlohmann::json PointJson(const Point& p) {
  nlohmann::json j = nlohmann::json::array();
  for (int k = 0; k < p.size(); ++k) j.push_back(p[k]);
  return j;
}

}  // namespace

const char* DecompositionName(Decomposition d) {
  switch (d) {
    case Decomposition::kCpwaPieces: return "cpwa-pieces";
    case Decomposition::kQuadratic: return "quadratic";
    case Decomposition::kLipschitzOnly: return "lipschitz-only";
  }
  return "unknown";
}

std::vector<Breakpoint> CostModel::Breakpoints(int i) const {
  CheckCategory(i);
  return {};
}

double CostModel::QuadraticWeight(int) const {
  throw Error(ErrorCode::kWrongCostModel, kModule, family() + " cost is not quadratic");
}

double CostModel::ObjectiveShift(const std::vector<Measure>&) const { return 0.0; }

void CostModel::CheckCategory(int i) const {
  if (i < 0 || i >= num_categories()) {
    throw Error(ErrorCode::kIndexOutOfRange, kModule,
                "category " + std::to_string(i) + " out of range");
  }
}

BusinessLocationCost::BusinessLocationCost(int num_categories, std::vector<Point> stations,
                                           double c_walk, double c_train, double c_restock)
    : n_(num_categories),
      stations_(std::move(stations)),
      c_walk_(c_walk),
      c_train_(c_train),
      c_restock_(c_restock) {
  if (n_ < 2) throw Error(ErrorCode::kInvalidArgument, kModule, "needs at least two categories");
  if (stations_.empty()) throw Error(ErrorCode::kInvalidArgument, kModule, "no stations");
  if (!(c_walk > 0 && c_train >= 0 && c_restock > 0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "cost constants must be positive");
  }
  for (size_t a = 0; a < stations_.size(); ++a) {
    if (stations_[a].size() != stations_[0].size()) {
      throw Error(ErrorCode::kDimensionMismatch, kModule, "stations of different dimension");
    }
    for (size_t b = 0; b < a; ++b) {
      if (stations_[a] == stations_[b]) {
        throw Error(ErrorCode::kInvalidArgument, kModule, "stations must be distinct");
      }
    }
  }
}

double BusinessLocationCost::Eval(int i, const Point& x, const Point& z) const {
  CheckCategory(i);
  const double direct = (x - z).lpNorm<1>();
  if (i == n_ - 1) return c_restock_ * direct;
  const int j_count = static_cast<int>(stations_.size());
  double best = c_walk_ * direct;
  for (int j = 0; j < j_count; ++j) {
    double to_station = c_walk_ * (x - stations_[j]).lpNorm<1>();
    if (to_station >= best) continue;
    for (int jj = 0; jj < j_count; ++jj) {
      double route = to_station + c_walk_ * (z - stations_[jj]).lpNorm<1>() +
                     c_train_ * std::abs(j - jj);
      best = std::min(best, route);
    }
  }
  return best;
}

double BusinessLocationCost::L1(int i) const {
  CheckCategory(i);
  const double root_d = std::sqrt(static_cast<double>(stations_[0].size()));
  return (i == n_ - 1 ? c_restock_ : c_walk_) * root_d;
}

std::vector<Breakpoint> BusinessLocationCost::Breakpoints(int i) const {
  CheckCategory(i);
  const int d = static_cast<int>(stations_[0].size());
  std::vector<Breakpoint> out;
  for (int k = 0; k < d; ++k) out.push_back({Unit(d, k), -Unit(d, k), 0.0});
  if (i == n_ - 1) return out;
  for (int k = 0; k < d; ++k) {
    std::set<double> values;
    for (const Point& u : stations_) values.insert(u[k]);
    for (double v : values) {
      out.push_back({Unit(d, k), Point::Zero(d), v});
      out.push_back({Point::Zero(d), Unit(d, k), v});
    }
  }
  return out;
}

nlohmann::json BusinessLocationCost::Describe() const {
  nlohmann::json st = nlohmann::json::array();
  for (const Point& u : stations_) st.push_back(PointJson(u));
  return {{"family", family()}, {"num_categories", n_}, {"stations", st},
          {"c_walk", c_walk_},  {"c_train", c_train_},  {"c_restock", c_restock_}};
}

BarycenterCost::BarycenterCost(std::vector<double> weights, std::vector<double> type_radius,
                               double quality_radius)
    : weights_(std::move(weights)),
      type_radius_(std::move(type_radius)),
      quality_radius_(quality_radius) {
  if (weights_.empty() || weights_.size() != type_radius_.size()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "one weight and radius per category");
  }
  double total = 0.0;
  for (double w : weights_) {
    if (!(w > 0.0)) throw Error(ErrorCode::kInvalidArgument, kModule, "weights must be positive");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "weights must sum to one");
  }
}

double BarycenterCost::Eval(int i, const Point& x, const Point& z) const {
  CheckCategory(i);
  return weights_[i] * (z.squaredNorm() - 2.0 * x.dot(z));
}

double BarycenterCost::L1(int i) const {
  CheckCategory(i);
  return 2.0 * weights_[i] * quality_radius_;
}

double BarycenterCost::L2(int i) const {
  CheckCategory(i);
  return 2.0 * weights_[i] * (quality_radius_ + type_radius_[i]);
}

double BarycenterCost::QuadraticWeight(int i) const {
  CheckCategory(i);
  return weights_[i];
}

double BarycenterCost::ObjectiveShift(const std::vector<Measure>& measures) const {
  if (measures.size() != weights_.size()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "one measure per category expected");
  }
  double c = 0.0;
  for (size_t i = 0; i < weights_.size(); ++i) c += weights_[i] * measures[i].SecondMoment();
  return c;
}

nlohmann::json BarycenterCost::Describe() const {
  return {{"family", family()}, {"weights", weights_}};
}

CappedAffineCost::CappedAffineCost(std::vector<Point> directions, std::vector<double> kappa1,
                                   std::vector<double> kappa2)
    : s_(std::move(directions)), kappa1_(std::move(kappa1)), kappa2_(std::move(kappa2)) {
  if (s_.empty() || s_.size() != kappa1_.size() || s_.size() != kappa2_.size()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "one direction and two thresholds per category");
  }
  for (size_t i = 0; i < s_.size(); ++i) {
    if (std::abs(s_[i].norm() - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "directions must have unit length");
    }
    if (!(0.0 < kappa1_[i] && kappa1_[i] < kappa2_[i])) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "thresholds need 0 < kappa1 < kappa2");
    }
  }
}

double CappedAffineCost::Eval(int i, const Point& x, const Point& z) const {
  CheckCategory(i);
  double f = std::abs(x[0] - s_[i].dot(z));
  return std::max(std::min(f, kappa2_[i]) - kappa1_[i], 0.0) / num_categories();
}

double CappedAffineCost::L1(int i) const {
  CheckCategory(i);
  return 1.0 / num_categories();
}

std::vector<Breakpoint> CappedAffineCost::Breakpoints(int i) const {
  CheckCategory(i);
  Point ax = Point::Constant(1, 1.0);
  std::vector<Breakpoint> out;
  for (double r : {-kappa2_[i], -kappa1_[i], kappa1_[i], kappa2_[i]}) {
    out.push_back({ax, -s_[i], r});
  }
  return out;
}

nlohmann::json CappedAffineCost::Describe() const {
  nlohmann::json dirs = nlohmann::json::array();
  for (const Point& s : s_) dirs.push_back(PointJson(s));
  return {{"family", family()}, {"directions", dirs}, {"kappa1", kappa1_}, {"kappa2", kappa2_}};
}

CappedAffineCost CappedAffineCost::Random(int num_categories, Rng& rng) {
  std::uniform_real_distribution<double> angle(0.0, M_PI / 2.0);
  std::uniform_real_distribution<double> k1(0.05, 0.3);
  std::uniform_real_distribution<double> gap(0.1, 0.5);
  std::vector<Point> dirs;
  std::vector<double> kappa1, kappa2;
  for (int i = 0; i < num_categories; ++i) {
    double a = angle(rng);
    Point s(2);
    s << std::cos(a), std::sin(a);
    dirs.push_back(s);
    kappa1.push_back(k1(rng));
    kappa2.push_back(kappa1.back() + gap(rng));
  }
  return CappedAffineCost(dirs, kappa1, kappa2);
}

WeightedL1Cost::WeightedL1Cost(std::vector<double> scale, std::vector<double> offset, int dim)
    : scale_(std::move(scale)), offset_(std::move(offset)), dim_(dim) {
  if (scale_.empty() || scale_.size() != offset_.size() || dim < 1) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "one scale and offset per category");
  }
  for (double a : scale_) {
    if (!(a >= 0.0)) throw Error(ErrorCode::kInvalidArgument, kModule, "scales must be >= 0");
  }
}

double WeightedL1Cost::Eval(int i, const Point& x, const Point& z) const {
  CheckCategory(i);
  return scale_[i] * (x - z).lpNorm<1>() + offset_[i];
}

double WeightedL1Cost::L1(int i) const {
  CheckCategory(i);
  return scale_[i] * std::sqrt(static_cast<double>(dim_));
}

std::vector<Breakpoint> WeightedL1Cost::Breakpoints(int i) const {
  CheckCategory(i);
  std::vector<Breakpoint> out;
  for (int k = 0; k < dim_; ++k) out.push_back({Unit(dim_, k), -Unit(dim_, k), 0.0});
  return out;
}

nlohmann::json WeightedL1Cost::Describe() const {
  return {{"family", family()}, {"scale", scale_}, {"offset", offset_}};
}

TabulatedCost::TabulatedCost(std::vector<std::vector<Point>> type_points,
                             std::vector<Point> quality_points, std::vector<Matrix> table)
    : type_points_(std::move(type_points)),
      quality_points_(std::move(quality_points)),
      table_(std::move(table)) {
  if (table_.empty() || table_.size() != type_points_.size()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "one table per category");
  }
  const int nq = static_cast<int>(quality_points_.size());
  for (size_t i = 0; i < table_.size(); ++i) {
    const int np = static_cast<int>(type_points_[i].size());
    if (table_[i].rows() != np || table_[i].cols() != nq) {
      throw Error(ErrorCode::kDimensionMismatch, kModule,
                  "table " + std::to_string(i) + " has the wrong shape");
    }
    double l1 = 0.0, l2 = 0.0;
    for (int p = 0; p < np; ++p) {
      for (int pp = 0; pp < p; ++pp) {
        double d = (type_points_[i][p] - type_points_[i][pp]).norm();
        for (int q = 0; q < nq; ++q) {
          l1 = std::max(l1, std::abs(table_[i](p, q) - table_[i](pp, q)) / d);
        }
      }
    }
    for (int q = 0; q < nq; ++q) {
      for (int qq = 0; qq < q; ++qq) {
        double d = (quality_points_[q] - quality_points_[qq]).norm();
        for (int p = 0; p < np; ++p) {
          l2 = std::max(l2, std::abs(table_[i](p, q) - table_[i](p, qq)) / d);
        }
      }
    }
    l1_.push_back(l1);
    l2_.push_back(l2);
  }
}

int TabulatedCost::Find(const std::vector<Point>& points, const Point& p) {
  for (size_t k = 0; k < points.size(); ++k) {
    if (points[k].size() == p.size() && (points[k] - p).cwiseAbs().maxCoeff() <= 1e-12) {
      return static_cast<int>(k);
    }
  }
  return -1;
}

double TabulatedCost::Eval(int i, const Point& x, const Point& z) const {
  CheckCategory(i);
  int p = Find(type_points_[i], x), q = Find(quality_points_, z);
  if (p < 0 || q < 0) {
    throw Error(ErrorCode::kPointOutsideComplex, kModule, "point is not in the cost table");
  }
  return table_[i](p, q);
}

nlohmann::json TabulatedCost::Describe() const {
  nlohmann::json tables = nlohmann::json::array();
  for (const Matrix& t : table_) {
    nlohmann::json rows = nlohmann::json::array();
    for (int p = 0; p < t.rows(); ++p) {
      std::vector<double> row(t.cols());
      for (int q = 0; q < t.cols(); ++q) row[q] = t(p, q);
      rows.push_back(row);
    }
    tables.push_back(rows);
  }
  return {{"family", family()}, {"tables", tables}};
}

Instance Instance::Make(CostPtr cost, std::vector<HatBasis> type_bases, HatBasis quality_basis,
                        std::vector<Measure> measures) {
  const int n = static_cast<int>(type_bases.size());
  if (!cost || cost->num_categories() != n || static_cast<int>(measures.size()) != n || n < 1) {
    throw Error(ErrorCode::kDimensionMismatch, kModule,
                "cost model, bases and measures disagree on the number of categories");
  }
  std::vector<Vector> moments;
  for (int i = 0; i < n; ++i) {
    if (measures[i].dim() != type_bases[i].complex().dim()) {
      throw Error(ErrorCode::kDimensionMismatch, kModule,
                  "measure " + std::to_string(i) + " does not live on its type space");
    }
    moments.push_back(MomentVector(measures[i], type_bases[i]));
  }
  return Instance{std::move(cost), std::move(type_bases), std::move(quality_basis),
                  std::move(measures), std::move(moments)};
}

Point UniformPoint(const SimplicialComplex& complex, Rng& rng) {
  if (complex.is_point_set()) {
    std::uniform_int_distribution<int> pick(0, complex.num_vertices() - 1);
    return complex.vertex(pick(rng));
  }
  std::vector<double> cumulative(complex.num_simplices());
  double total = 0.0;
  for (int s = 0; s < complex.num_simplices(); ++s) {
    total += complex.Volume(s);
    cumulative[s] = total;
  }
  std::uniform_real_distribution<double> u(0.0, total);
  int s = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u(rng)) -
                           cumulative.begin());
  s = std::min(s, complex.num_simplices() - 1);
  const int d = complex.dim();
  std::exponential_distribution<double> expo(1.0);
  Barycentric lam(d + 1);
  for (int k = 0; k <= d; ++k) lam[k] = expo(rng);
  lam /= lam.sum();
  Point x = Point::Zero(d);
  for (int k = 0; k <= d; ++k) x += lam[k] * complex.vertex(complex.simplex(s)[k]);
  return x;
}

double LipschitzExcess(const CostModel& cost, int i, const SimplicialComplex& types,
                       const SimplicialComplex& qualities, int pairs, Rng& rng) {
  const double l1 = cost.L1(i), l2 = cost.L2(i);
  double worst = -std::numeric_limits<double>::infinity();
  for (int t = 0; t < pairs; ++t) {
    Point x = UniformPoint(types, rng), z = UniformPoint(qualities, rng);
    // Alternate between moving both arguments and moving one of them.
    Point xx = t % 3 == 2 ? x : UniformPoint(types, rng);
    Point zz = t % 3 == 1 ? z : UniformPoint(qualities, rng);
    double diff = std::abs(cost.Eval(i, x, z) - cost.Eval(i, xx, zz));
    double bound = l1 * (x - xx).norm() + l2 * (z - zz).norm();
    worst = std::max(worst, diff - bound);
  }
  return worst;
}

double MaxNorm(const SimplicialComplex& complex) {
  double r = 0.0;
  for (const Point& v : complex.vertices()) r = std::max(r, v.norm());
  return r;
}

}  // namespace teamsolve
