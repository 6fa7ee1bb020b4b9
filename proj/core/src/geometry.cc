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

#include "teamsolve/geometry.h"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

#include <Eigen/LU>

#include "teamsolve/linprog.h"

namespace teamsolve {
namespace {

constexpr char kModule[] = "geometry";

[[noreturn]] void Fail(ErrorCode code, const std::string& msg) {
  throw Error(code, kModule, msg);
}

double Factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

bool LexLess(const Point& a, const Point& b) {
  for (int k = 0; k < a.size(); ++k) {
    if (a[k] != b[k]) return a[k] < b[k];
  }
  return false;
}

Point ParsePoint(const nlohmann::json& j, int dim) {
  if (!j.is_array() || static_cast<int>(j.size()) != dim) {
    Fail(ErrorCode::kDimensionMismatch, "vertex has wrong dimension");
  }
  Point p(dim);
  for (int k = 0; k < dim; ++k) p[k] = j[k].get<double>();
  return p;
}

}  // namespace

Norm ParseNorm(const std::string& name) {
  if (name == "l1") return Norm::kL1;
  if (name == "l2" || name == "euclidean") return Norm::kL2;
  if (name == "linf") return Norm::kLinf;
  Fail(ErrorCode::kInvalidArgument, "unknown norm '" + name + "'");
}

double Distance(const Point& a, const Point& b, Norm norm) {
  switch (norm) {
    case Norm::kL1: return (a - b).lpNorm<1>();
    case Norm::kL2: return (a - b).norm();
    case Norm::kLinf: return (a - b).lpNorm<Eigen::Infinity>();
  }
  return 0.0;
}

bool Box::Contains(const Point& x, double tol) const {
  for (int k = 0; k < dim(); ++k) {
    if (x[k] < lower[k] - tol || x[k] > upper[k] + tol) return false;
  }
  return true;
}

SimplicialComplex::SimplicialComplex(int dim, std::vector<Point> vertices,
                                     std::vector<std::vector<int>> simplices)
    : dim_(dim), vertices_(std::move(vertices)), simplices_(std::move(simplices)) {
  if (dim_ < 1 || dim_ > kMaxDim) {
    Fail(ErrorCode::kInvalidArgument,
         "dimension must lie in [1, " + std::to_string(kMaxDim) + "]");
  }
  for (const Point& v : vertices_) {
    if (v.size() != dim_) Fail(ErrorCode::kDimensionMismatch, "vertex dimension");
  }
  for (const auto& s : simplices_) {
    if (static_cast<int>(s.size()) != dim_ + 1) {
      Fail(ErrorCode::kDegenerateSimplex,
           "a simplex in R^" + std::to_string(dim_) + " needs " +
               std::to_string(dim_ + 1) + " vertices");
    }
  }
  Finalize();
}

SimplicialComplex SimplicialComplex::PointSet(std::vector<Point> points) {
  if (points.empty()) Fail(ErrorCode::kInvalidArgument, "empty point set");
  SimplicialComplex c;
  c.dim_ = static_cast<int>(points[0].size());
  if (c.dim_ < 1 || c.dim_ > kMaxDim) {
    Fail(ErrorCode::kInvalidArgument, "point dimension out of range");
  }
  c.point_set_ = true;
  c.vertices_ = std::move(points);
  for (const Point& v : c.vertices_) {
    if (v.size() != c.dim_) Fail(ErrorCode::kDimensionMismatch, "point dimension");
  }
  for (int v = 0; v < c.num_vertices(); ++v) c.simplices_.push_back({v});
  c.Finalize();
  return c;
}

void SimplicialComplex::Finalize() {
  if (vertices_.empty()) Fail(ErrorCode::kInvalidArgument, "no vertices");
  if (simplices_.empty()) Fail(ErrorCode::kInvalidArgument, "no simplices");
  std::vector<int> order(vertices_.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    return LexLess(vertices_[a], vertices_[b]);
  });
  for (size_t k = 1; k < order.size(); ++k) {
    if (!LexLess(vertices_[order[k - 1]], vertices_[order[k]])) {
      Fail(ErrorCode::kInvalidArgument,
           "duplicate vertex " + std::to_string(order[k]));
    }
  }
  const int n = num_vertices();
  const int sd = simplex_dim();
  origin_.resize(simplices_.size());
  inverse_edges_.resize(simplices_.size());
  volume_.assign(simplices_.size(), 0.0);
  for (size_t s = 0; s < simplices_.size(); ++s) {
    const auto& simplex = simplices_[s];
    for (int v : simplex) {
      if (v < 0 || v >= n) Fail(ErrorCode::kInvalidArgument, "vertex index out of range");
    }
    origin_[s] = vertices_[simplex[0]];
    if (sd == 0) continue;
    Matrix edges(dim_, dim_);
    double scale = 0.0;
    for (int j = 1; j <= dim_; ++j) {
      edges.col(j - 1) = vertices_[simplex[j]] - origin_[s];
      scale = std::max(scale, edges.col(j - 1).norm());
    }
    Eigen::PartialPivLU<Matrix> lu(edges);
    double det = lu.determinant();
    if (!(std::abs(det) > 1e-12 * std::pow(scale, dim_))) {
      Fail(ErrorCode::kDegenerateSimplex,
           "simplex " + std::to_string(s) + " is degenerate");
    }
    inverse_edges_[s] = lu.inverse();
    volume_[s] = std::abs(det) / Factorial(dim_);
  }
}

SimplicialComplex SimplicialComplex::BoxPartition(const Box& box,
                                                  const std::vector<int>& counts,
                                                  const std::vector<Box>& holes) {
  const int d = box.dim();
  if (d < 1 || d > kMaxDim || box.upper.size() != d) {
    Fail(ErrorCode::kDimensionMismatch, "box bounds");
  }
  if (static_cast<int>(counts.size()) != d) {
    Fail(ErrorCode::kDimensionMismatch, "box has dimension " + std::to_string(d) +
                                            " but " + std::to_string(counts.size()) +
                                            " counts were given");
  }
  for (int k = 0; k < d; ++k) {
    if (!(box.upper[k] > box.lower[k])) {
      Fail(ErrorCode::kInvalidArgument, "box side lengths must be positive");
    }
    if (counts[k] < 1) Fail(ErrorCode::kInvalidArgument, "counts must be >= 1");
  }
  for (const Box& h : holes) {
    if (h.dim() != d) Fail(ErrorCode::kDimensionMismatch, "hole dimension");
  }
  Point step(d);
  for (int k = 0; k < d; ++k) step[k] = (box.upper[k] - box.lower[k]) / counts[k];

  std::vector<long> vstride(d), cstride(d);
  long num_grid_vertices = 1, num_cells = 1;
  for (int k = 0; k < d; ++k) {
    vstride[k] = num_grid_vertices;
    cstride[k] = num_cells;
    num_grid_vertices *= counts[k] + 1;
    num_cells *= counts[k];
  }
  auto grid_point = [&](const std::vector<int>& idx) {
    Point p(d);
    for (int k = 0; k < d; ++k) {
      p[k] = idx[k] == counts[k] ? box.upper[k] : box.lower[k] + idx[k] * step[k];
    }
    return p;
  };

  std::vector<int> perm(d);
  std::vector<std::vector<int>> grid_simplices;
  std::vector<long> simplex_cell;
  std::vector<int> corner(d, 0);
  for (long cell = 0; cell < num_cells; ++cell) {
    long rem = cell;
    for (int k = 0; k < d; ++k) {
      corner[k] = static_cast<int>(rem % counts[k]);
      rem /= counts[k];
    }
    bool in_hole = false;
    for (const Box& h : holes) {
      bool inside = true;
      for (int k = 0; k < d && inside; ++k) {
        double lo = box.lower[k] + corner[k] * step[k];
        double hi = lo + step[k];
        inside = lo >= h.lower[k] - kTolGeom && hi <= h.upper[k] + kTolGeom;
      }
      if (inside) in_hole = true;
    }
    if (in_hole) continue;
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<int> cur = corner;
      std::vector<int> ids;
      ids.reserve(d + 1);
      auto id_of = [&](const std::vector<int>& idx) {
        long id = 0;
        for (int k = 0; k < d; ++k) id += idx[k] * vstride[k];
        return static_cast<int>(id);
      };
      ids.push_back(id_of(cur));
      for (int k = 0; k < d; ++k) {
        ++cur[perm[k]];
        ids.push_back(id_of(cur));
      }
      grid_simplices.push_back(std::move(ids));
      simplex_cell.push_back(cell);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  if (grid_simplices.empty()) Fail(ErrorCode::kInvalidArgument, "holes cover the box");

  std::vector<int> remap(num_grid_vertices, -1);
  std::vector<Point> vertices;
  std::vector<int> idx(d);
  for (auto& s : grid_simplices) {
    for (int& v : s) {
      if (remap[v] < 0) {
        long rem = v;
        for (int k = 0; k < d; ++k) {
          idx[k] = static_cast<int>(rem % (counts[k] + 1));
          rem /= counts[k] + 1;
        }
        remap[v] = static_cast<int>(vertices.size());
        vertices.push_back(grid_point(idx));
      }
      v = remap[v];
    }
  }
  // Renumber vertices in grid order so that ids are stable and readable.
  std::vector<int> order(vertices.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(), [&](int a, int b) {
    for (int k = d - 1; k >= 0; --k) {
      if (vertices[a][k] != vertices[b][k]) return vertices[a][k] < vertices[b][k];
    }
    return false;
  });
  std::vector<int> rank(vertices.size());
  std::vector<Point> sorted(vertices.size());
  for (size_t r = 0; r < order.size(); ++r) {
    rank[order[r]] = static_cast<int>(r);
    sorted[r] = vertices[order[r]];
  }
  for (auto& s : grid_simplices) {
    for (int& v : s) v = rank[v];
  }

  SimplicialComplex c(d, std::move(sorted), std::move(grid_simplices));
  Matrix map = Matrix::Zero(d, d);
  Point offset(d);
  for (int k = 0; k < d; ++k) {
    map(k, k) = counts[k] / (box.upper[k] - box.lower[k]);
    offset[k] = -map(k, k) * box.lower[k];
  }
  c.BuildLattice(map, offset, counts);
  for (size_t s = 0; s < simplex_cell.size(); ++s) {
    c.lattice_->cells[simplex_cell[s]].push_back(static_cast<int>(s));
  }
  bool refined = std::any_of(counts.begin(), counts.end(), [](int n) { return n > 1; });
  if (holes.empty() && refined) {
    c.coarse_ = std::make_shared<SimplicialComplex>(
        BoxPartition(box, std::vector<int>(d, 1)));
  }
  return c;
}

SimplicialComplex SimplicialComplex::SimplexPartition(const std::vector<Point>& corners,
                                                      int count) {
  if (corners.empty()) Fail(ErrorCode::kInvalidArgument, "no corners");
  const int d = static_cast<int>(corners[0].size());
  if (static_cast<int>(corners.size()) != d + 1) {
    Fail(ErrorCode::kDimensionMismatch, "a simplex in R^d needs d+1 corners");
  }
  if (count < 1) Fail(ErrorCode::kInvalidArgument, "count must be >= 1");
  Matrix edges(d, d);
  for (int j = 1; j <= d; ++j) edges.col(j - 1) = corners[j] - corners[0];

  // Kuhn cells of [0,count]^d whose simplices lie in the sorted region
  // s_1 >= ... >= s_d, mapped through t_j = s_j - s_{j+1}.
  std::map<std::vector<int>, int> id_of;
  std::vector<Point> vertices;
  std::vector<std::vector<int>> simplices;
  std::vector<long> simplex_cell;
  auto vertex_id = [&](const std::vector<int>& s) {
    auto it = id_of.find(s);
    if (it != id_of.end()) return it->second;
    Point t(d);
    for (int j = 0; j < d; ++j) {
      int next = j + 1 < d ? s[j + 1] : 0;
      t[j] = static_cast<double>(s[j] - next) / count;
    }
    Point x = corners[0] + edges * t;
    int id = static_cast<int>(vertices.size());
    vertices.push_back(x);
    id_of.emplace(s, id);
    return id;
  };
  long num_cells = 1;
  for (int k = 0; k < d; ++k) num_cells *= count;
  std::vector<int> corner(d), perm(d);
  for (long cell = 0; cell < num_cells; ++cell) {
    long rem = cell;
    for (int k = 0; k < d; ++k) {
      corner[k] = static_cast<int>(rem % count);
      rem /= count;
    }
    std::iota(perm.begin(), perm.end(), 0);
    do {
      std::vector<std::vector<int>> path;
      std::vector<int> cur = corner;
      path.push_back(cur);
      for (int k = 0; k < d; ++k) {
        ++cur[perm[k]];
        path.push_back(cur);
      }
      std::vector<double> centroid(d, 0.0);
      for (const auto& p : path) {
        for (int k = 0; k < d; ++k) centroid[k] += p[k];
      }
      bool sorted = true;
      for (int k = 0; k + 1 < d; ++k) {
        if (centroid[k] <= centroid[k + 1]) sorted = false;
      }
      if (!sorted) continue;
      std::vector<int> ids;
      for (const auto& p : path) ids.push_back(vertex_id(p));
      simplices.push_back(std::move(ids));
      simplex_cell.push_back(cell);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  SimplicialComplex c(d, std::move(vertices), std::move(simplices));
  Matrix suffix = Matrix::Zero(d, d);
  for (int k = 0; k < d; ++k) {
    for (int j = k; j < d; ++j) suffix(k, j) = 1.0;
  }
  Matrix map = count * suffix * edges.inverse();
  Point offset = -map * corners[0];
  c.BuildLattice(map, offset, std::vector<int>(d, count));
  for (size_t s = 0; s < simplex_cell.size(); ++s) {
    c.lattice_->cells[simplex_cell[s]].push_back(static_cast<int>(s));
  }
  if (count > 1) {
    c.coarse_ = std::make_shared<SimplicialComplex>(SimplexPartition(corners, 1));
  }
  return c;
}

void SimplicialComplex::BuildLattice(Matrix map, Point offset, std::vector<int> counts) {
  Lattice lat;
  lat.map = std::move(map);
  lat.offset = std::move(offset);
  long cells = 1;
  for (int n : counts) cells *= n;
  lat.counts = std::move(counts);
  lat.cells.assign(cells, {});
  lattice_ = std::move(lat);
}

SimplicialComplex SimplicialComplex::FromJson(const nlohmann::json& doc) {
  if (!doc.is_object()) Fail(ErrorCode::kInvalidArgument, "complex must be an object");
  int dim = doc.at("dim").get<int>();
  std::vector<Point> vertices;
  for (const auto& v : doc.at("vertices")) vertices.push_back(ParsePoint(v, dim));
  if (doc.value("kind", std::string("simplicial")) == "points") {
    return PointSet(std::move(vertices));
  }
  std::vector<std::vector<int>> simplices;
  for (const auto& s : doc.at("simplices")) simplices.push_back(s.get<std::vector<int>>());
  return SimplicialComplex(dim, std::move(vertices), std::move(simplices));
}

nlohmann::json SimplicialComplex::ToJson() const {
  nlohmann::json doc;
  doc["dim"] = dim_;
  if (point_set_) doc["kind"] = "points";
  auto& verts = doc["vertices"] = nlohmann::json::array();
  for (const Point& v : vertices_) {
    verts.push_back(std::vector<double>(v.data(), v.data() + v.size()));
  }
  doc["simplices"] = simplices_;
  return doc;
}

double SimplicialComplex::Volume(int s) const { return volume_[s]; }

double SimplicialComplex::Diameter(int s, Norm norm) const {
  double best = 0.0;
  const auto& simplex = simplices_[s];
  for (size_t a = 0; a < simplex.size(); ++a) {
    for (size_t b = a + 1; b < simplex.size(); ++b) {
      best = std::max(best, Distance(vertices_[simplex[a]], vertices_[simplex[b]], norm));
    }
  }
  return best;
}

Box SimplicialComplex::BoundingBox() const {
  Box box{vertices_[0], vertices_[0]};
  for (const Point& v : vertices_) {
    box.lower = box.lower.cwiseMin(v);
    box.upper = box.upper.cwiseMax(v);
  }
  return box;
}

Barycentric SimplicialComplex::BarycentricCoords(int s, const Point& x) const {
  const int sd = simplex_dim();
  Barycentric bc(sd + 1);
  if (sd == 0) {
    bc[0] = 1.0;
    return bc;
  }
  Point t = inverse_edges_[s] * (x - origin_[s]);
  bc[0] = 1.0 - t.sum();
  bc.tail(sd) = t;
  return bc;
}

std::optional<Location> SimplicialComplex::LocateIn(const std::vector<int>& candidates,
                                                    const Point& x) const {
  int best = -1;
  double best_min = -std::numeric_limits<double>::infinity();
  Barycentric best_bc;
  for (int s : candidates) {
    Barycentric bc = BarycentricCoords(s, x);
    double m = bc.minCoeff();
    if (m > best_min) {
      best_min = m;
      best = s;
      best_bc = bc;
      if (m >= 0.0) break;
    }
  }
  if (best < 0 || best_min < -kTolGeom) return std::nullopt;
  Location loc;
  loc.simplex = best;
  loc.coords = best_bc.cwiseMax(0.0);
  loc.coords /= loc.coords.sum();
  return loc;
}

std::optional<Location> SimplicialComplex::LocateLattice(const Point& x) const {
  const Lattice& lat = *lattice_;
  const int d = dim_;
  Point u = lat.map * x + lat.offset;
  std::vector<int> cell(d);
  for (int k = 0; k < d; ++k) {
    double slack = kTolGeom * std::max(1.0, static_cast<double>(lat.counts[k]));
    if (u[k] < -slack || u[k] > lat.counts[k] + slack) return std::nullopt;
    int c = static_cast<int>(std::floor(u[k]));
    cell[k] = std::clamp(c, 0, lat.counts[k] - 1);
  }
  auto linear = [&](const std::vector<int>& c) {
    long id = 0, stride = 1;
    for (int k = 0; k < d; ++k) {
      id += c[k] * stride;
      stride *= lat.counts[k];
    }
    return id;
  };
  if (auto loc = LocateIn(lat.cells[linear(cell)], x)) return loc;
  // Boundary points may belong to a neighbouring cell (holes, sorted region).
  int neighbours = 1;
  for (int k = 0; k < d; ++k) neighbours *= 3;
  std::vector<int> nb(d);
  for (int code = 0; code < neighbours; ++code) {
    int rem = code;
    bool valid = true;
    for (int k = 0; k < d; ++k) {
      nb[k] = cell[k] + rem % 3 - 1;
      rem /= 3;
      if (nb[k] < 0 || nb[k] >= lat.counts[k]) valid = false;
    }
    if (!valid || nb == cell) continue;
    if (auto loc = LocateIn(lat.cells[linear(nb)], x)) return loc;
  }
  return std::nullopt;
}

std::optional<Location> SimplicialComplex::TryLocate(const Point& x) const {
  if (x.size() != dim_) {
    Fail(ErrorCode::kDimensionMismatch, "point has dimension " + std::to_string(x.size()) +
                                            ", complex has " + std::to_string(dim_));
  }
  if (point_set_) {
    for (int v = 0; v < num_vertices(); ++v) {
      double scale = std::max(1.0, vertices_[v].lpNorm<Eigen::Infinity>());
      if ((x - vertices_[v]).lpNorm<Eigen::Infinity>() <= kTolGeom * scale) {
        Location loc;
        loc.simplex = v;
        loc.coords = Barycentric::Ones(1);
        return loc;
      }
    }
    return std::nullopt;
  }
  if (lattice_) return LocateLattice(x);
  std::vector<int> all(simplices_.size());
  std::iota(all.begin(), all.end(), 0);
  return LocateIn(all, x);
}

Location SimplicialComplex::Locate(const Point& x) const {
  auto loc = TryLocate(x);
  if (!loc) {
    std::string coords;
    for (int k = 0; k < x.size(); ++k) coords += (k ? "," : "") + FormatDouble(x[k]);
    Fail(ErrorCode::kPointOutsideComplex, "point (" + coords + ") is not covered");
  }
  return *loc;
}

Point SimplicialComplex::Reconstruct(const Location& loc) const {
  const auto& simplex = simplices_[loc.simplex];
  Point x = Point::Zero(dim_);
  for (size_t j = 0; j < simplex.size(); ++j) x += loc.coords[j] * vertices_[simplex[j]];
  return x;
}

const SimplicialComplex& SimplicialComplex::coarse_cover() const {
  return coarse_ ? *coarse_ : *this;
}

bool SimplicialComplex::IsConforming() const {
  if (point_set_) return true;
  const int d = dim_;
  const int ns = num_simplices();
  std::vector<Box> boxes(ns);
  for (int s = 0; s < ns; ++s) {
    boxes[s] = Box{vertices_[simplices_[s][0]], vertices_[simplices_[s][0]]};
    for (int v : simplices_[s]) {
      boxes[s].lower = boxes[s].lower.cwiseMin(vertices_[v]);
      boxes[s].upper = boxes[s].upper.cwiseMax(vertices_[v]);
    }
  }
  LpSolver solver;
  for (int a = 0; a < ns; ++a) {
    for (int b = a + 1; b < ns; ++b) {
      bool overlap = true;
      for (int k = 0; k < d && overlap; ++k) {
        overlap = boxes[a].lower[k] <= boxes[b].upper[k] + kTolGeom &&
                  boxes[b].lower[k] <= boxes[a].upper[k] + kTolGeom;
      }
      if (!overlap) continue;
      const auto& sa = simplices_[a];
      const auto& sb = simplices_[b];
      // Variables: lambda (d+1) then mu (d+1). Maximise the weight that a
      // common point puts on vertices of a that b does not share.
      LpProblem lp(2 * (d + 1));
      for (int j = 0; j <= d; ++j) {
        if (std::find(sb.begin(), sb.end(), sa[j]) == sb.end()) lp.SetObjective(j, 1.0);
      }
      for (int j = 0; j < 2 * (d + 1); ++j) lp.AddLessEqual({{j, -1.0}}, 0.0);
      std::vector<std::pair<int, double>> sum_a, sum_b;
      for (int j = 0; j <= d; ++j) {
        sum_a.push_back({j, 1.0});
        sum_b.push_back({d + 1 + j, 1.0});
      }
      lp.AddEqual(sum_a, 1.0);
      lp.AddEqual(sum_b, 1.0);
      for (int k = 0; k < d; ++k) {
        std::vector<std::pair<int, double>> row;
        for (int j = 0; j <= d; ++j) {
          row.push_back({j, vertices_[sa[j]][k]});
          row.push_back({d + 1 + j, -vertices_[sb[j]][k]});
        }
        lp.AddEqual(row, 0.0);
      }
      try {
        LpSolution sol = solver.Solve(lp, /*warm_start=*/false);
        if (sol.objective > 1e-7) return false;
      } catch (const Error& e) {
        if (e.code() != ErrorCode::kLpInfeasible) throw;
      }
    }
  }
  return true;
}

int LexicographicMinVertex(const SimplicialComplex& complex) {
  int best = 0;
  for (int v = 1; v < complex.num_vertices(); ++v) {
    if (LexLess(complex.vertex(v), complex.vertex(best))) best = v;
  }
  return best;
}

HatBasis::HatBasis(ComplexPtr complex, int excluded_vertex)
    : complex_(std::move(complex)) {
  if (!complex_) Fail(ErrorCode::kInvalidArgument, "null complex");
  const int n = complex_->num_vertices();
  excluded_ = excluded_vertex < 0 ? LexicographicMinVertex(*complex_) : excluded_vertex;
  if (excluded_ >= n) Fail(ErrorCode::kIndexOutOfRange, "excluded vertex");
  index_of_vertex_.assign(n, -1);
  for (int v = 0; v < n; ++v) {
    if (v == excluded_) continue;
    index_of_vertex_[v] = static_cast<int>(vertex_of_index_.size());
    vertex_of_index_.push_back(v);
  }
}

SparseHat HatBasis::FromLocation(const Location& loc) const {
  SparseHat h;
  const auto& simplex = complex_->simplex(loc.simplex);
  for (size_t j = 0; j < simplex.size(); ++j) {
    int idx = index_of_vertex_[simplex[j]];
    if (idx < 0 || loc.coords[j] == 0.0) continue;
    h.entries[h.count++] = {idx, loc.coords[j]};
  }
  return h;
}

SparseHat HatBasis::EvalSparse(const Point& x) const {
  return FromLocation(complex_->Locate(x));
}

SparseHat HatBasis::AtVertex(int v) const {
  SparseHat h;
  if (index_of_vertex_[v] >= 0) h.entries[h.count++] = {index_of_vertex_[v], 1.0};
  return h;
}

Vector HatBasis::Eval(const Point& x) const {
  Vector g = Vector::Zero(size());
  SparseHat h = EvalSparse(x);
  for (int j = 0; j < h.count; ++j) g[h.entries[j].index] += h.entries[j].value;
  return g;
}

double HatBasis::GradientNorm(int s, const Vector& coeffs) const {
  const SimplicialComplex& c = *complex_;
  if (c.is_point_set()) return 0.0;
  const auto& simplex = c.simplex(s);
  auto coeff = [&](int v) {
    int idx = index_of_vertex_[v];
    return idx < 0 ? 0.0 : coeffs[idx];
  };
  Eigen::RowVectorXd diff(c.dim());
  for (int j = 1; j <= c.dim(); ++j) diff[j - 1] = coeff(simplex[j]) - coeff(simplex[0]);
  // Barycentric tail coordinates are inverse_edges * (x - origin).
  Point grad = (diff * c.BarycentricJacobian(s)).transpose();
  return grad.norm();
}

double EpsilonBar(const SimplicialComplex& complex, double varsigma, Norm norm) {
  if (varsigma < 0.0) Fail(ErrorCode::kInvalidArgument, "varsigma must be >= 0");
  double max_simplex = 0.0;
  for (int s = 0; s < complex.num_simplices(); ++s) {
    max_simplex = std::max(max_simplex, complex.Diameter(s, norm));
  }
  double value = 2.0 * max_simplex;
  if (varsigma > 0.0) {
    double max_pair = 0.0;
    const auto& v = complex.vertices();
    for (size_t a = 0; a < v.size(); ++a) {
      for (size_t b = a + 1; b < v.size(); ++b) {
        max_pair = std::max(max_pair, Distance(v[a], v[b], norm));
      }
    }
    value += 0.5 * varsigma * max_pair;
  }
  return value;
}

namespace {

double SideNorm(const Box& box, Norm norm) {
  return Distance(box.upper, box.lower, norm);
}

}  // namespace

PartitionPlan PlanPartition(const PartitionPlanInput& in) {
  const double budget = in.eps - in.eps_par - in.eps_star;
  if (!(budget > 0.0)) {
    Fail(ErrorCode::kBudgetNonpositive, "eps must exceed eps_par + eps_star");
  }
  const int n = in.num_categories;
  if (n < 1 || static_cast<int>(in.lipschitz1.size()) != n ||
      static_cast<int>(in.type_boxes.size()) != n) {
    Fail(ErrorCode::kDimensionMismatch, "per-category inputs must have length N");
  }
  auto constant = [&](int i) {
    return in.type_norm_constants.empty() ? 1.0 : in.type_norm_constants[i];
  };
  auto cells = [&](double lipschitz, double side, double c, int d) {
    double raw = 8.0 * lipschitz * side * c * std::sqrt(static_cast<double>(d)) / budget;
    return std::max(1, static_cast<int>(std::ceil(raw - 1e-12)));
  };
  PartitionPlan plan;
  double worst = 0.0;
  for (int i = 0; i < n; ++i) {
    const Box& box = in.type_boxes[i];
    std::vector<int> counts(box.dim());
    for (int j = 0; j < box.dim(); ++j) {
      counts[j] = cells(n * in.lipschitz1[i], box.upper[j] - box.lower[j], constant(i),
                        box.dim());
    }
    plan.type_counts.push_back(std::move(counts));
    worst = std::max(worst, SideNorm(box, in.norm) * n * in.lipschitz1[i]);
  }
  const Box& zbox = in.quality_box;
  const double l2 = (n - 1) * in.lipschitz2_bar;
  for (int j = 0; j < zbox.dim(); ++j) {
    plan.quality_counts.push_back(
        cells(l2, zbox.upper[j] - zbox.lower[j], in.quality_norm_constant, zbox.dim()));
  }
  worst = std::max(worst, SideNorm(zbox, in.norm) * l2);
  plan.varsigma_bar = worst > 0.0 ? 0.5 * budget / worst
                                  : std::numeric_limits<double>::infinity();
  return plan;
}

}  // namespace teamsolve
