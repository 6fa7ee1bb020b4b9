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

// Simplicial complexes, hat-function bases on them, and mesh statistics.

#ifndef TEAMSOLVE_GEOMETRY_H_
#define TEAMSOLVE_GEOMETRY_H_

#include <memory>
#include <optional>
#include <vector>

#include <nlohmann/json.hpp>

#include "teamsolve/common.h"

namespace teamsolve {

enum class Norm { kL1, kL2, kLinf };

Norm ParseNorm(const std::string& name);
double Distance(const Point& a, const Point& b, Norm norm = Norm::kL2);

struct Box {
  Point lower;
  Point upper;

  int dim() const { return static_cast<int>(lower.size()); }
  bool Contains(const Point& x, double tol) const;
};

// Barycentric weights carry one more entry than the ambient dimension.
using Barycentric =
    Eigen::Matrix<double, Eigen::Dynamic, 1, Eigen::ColMajor, kMaxDim + 1, 1>;

struct Location {
  int simplex = -1;
  Barycentric coords;
};

// A finite collection of simplices meeting face to face. Two flavours are
// supported: full-dimensional complexes (every simplex has dim()+1 vertices)
// and point sets, whose "simplices" are single points. Point sets model
// finite type or quality spaces; their hat functions are indicators.
class SimplicialComplex {
 public:
  // Validates vertex uniqueness, simplex arity and non-degeneracy.
  SimplicialComplex(int dim, std::vector<Point> vertices,
                    std::vector<std::vector<int>> simplices);

  static SimplicialComplex PointSet(std::vector<Point> points);

  // Regular grid on `box`, every cell split into d! Kuhn simplices. Cells
  // lying inside one of `holes` (closed boxes) are dropped.
  static SimplicialComplex BoxPartition(const Box& box,
                                        const std::vector<int>& counts,
                                        const std::vector<Box>& holes = {});

  // Subdivision of the simplex conv(corners) into count^d congruent pieces.
  static SimplicialComplex SimplexPartition(const std::vector<Point>& corners,
                                            int count);

  static SimplicialComplex FromJson(const nlohmann::json& doc);
  nlohmann::json ToJson() const;

  int dim() const { return dim_; }
  int simplex_dim() const { return point_set_ ? 0 : dim_; }
  bool is_point_set() const { return point_set_; }
  int num_vertices() const { return static_cast<int>(vertices_.size()); }
  int num_simplices() const { return static_cast<int>(simplices_.size()); }
  const Point& vertex(int v) const { return vertices_[v]; }
  const std::vector<Point>& vertices() const { return vertices_; }
  const std::vector<int>& simplex(int s) const { return simplices_[s]; }
  const std::vector<std::vector<int>>& simplices() const { return simplices_; }

  double Volume(int s) const;
  double Diameter(int s, Norm norm = Norm::kL2) const;
  Box BoundingBox() const;

  // Unclamped barycentric coordinates of x with respect to simplex s.
  Barycentric BarycentricCoords(int s, const Point& x) const;
  // Maps x - vertex(simplex(s)[0]) to the trailing barycentric coordinates.
  const Matrix& BarycentricJacobian(int s) const { return inverse_edges_[s]; }

  std::optional<Location> TryLocate(const Point& x) const;
  // Throws kPointOutsideComplex.
  Location Locate(const Point& x) const;
  bool Contains(const Point& x) const { return TryLocate(x).has_value(); }
  Point Reconstruct(const Location& loc) const;

  // A complex covering the same set with as few simplices as known: the
  // single-cell triangulation for hole-free boxes and simplex partitions,
  // this complex otherwise.
  const SimplicialComplex& coarse_cover() const;

  // True when every pair of intersecting simplices meets in a common face.
  // Exhaustive pairwise check, solved with small LPs.
  bool IsConforming() const;

 private:
  struct Lattice {
    Matrix map;  // ambient -> lattice coordinates
    Point offset;
    std::vector<int> counts;
    std::vector<std::vector<int>> cells;  // lattice cell -> simplices
  };

  SimplicialComplex() = default;
  void Finalize();
  std::optional<Location> LocateIn(const std::vector<int>& candidates,
                                   const Point& x) const;
  std::optional<Location> LocateLattice(const Point& x) const;
  void BuildLattice(Matrix map, Point offset, std::vector<int> counts);

  int dim_ = 0;
  bool point_set_ = false;
  std::vector<Point> vertices_;
  std::vector<std::vector<int>> simplices_;
  // Per simplex: first vertex and inverse edge matrix.
  std::vector<Point> origin_;
  std::vector<Matrix> inverse_edges_;
  std::vector<double> volume_;
  std::optional<Lattice> lattice_;
  std::shared_ptr<const SimplicialComplex> coarse_;
};

using ComplexPtr = std::shared_ptr<const SimplicialComplex>;

struct HatEntry {
  int index;
  double value;
};

// Sparse hat vector: at most simplex_dim()+1 nonzero entries.
struct SparseHat {
  int count = 0;
  HatEntry entries[kMaxDim + 1];

  double Dot(const Vector& coeffs) const {
    double s = 0.0;
    for (int j = 0; j < count; ++j) s += entries[j].value * coeffs[entries[j].index];
    return s;
  }
};

// Vertex interpolation functions on a complex, with one vertex dropped.
class HatBasis {
 public:
  // excluded_vertex < 0 selects the lexicographically smallest vertex.
  explicit HatBasis(ComplexPtr complex, int excluded_vertex = -1);

  const SimplicialComplex& complex() const { return *complex_; }
  const ComplexPtr& complex_ptr() const { return complex_; }
  int size() const { return complex_->num_vertices() - 1; }
  int excluded_vertex() const { return excluded_; }
  // Basis index of vertex v, or -1 for the excluded vertex.
  int IndexOfVertex(int v) const { return index_of_vertex_[v]; }
  int VertexOfIndex(int j) const { return vertex_of_index_[j]; }

  Vector Eval(const Point& x) const;
  SparseHat EvalSparse(const Point& x) const;
  SparseHat FromLocation(const Location& loc) const;
  // Hat vector at vertex v (unit vector or empty).
  SparseHat AtVertex(int v) const;

  // Euclidean norm of the gradient of x -> <g(x), coeffs> on simplex s.
  double GradientNorm(int s, const Vector& coeffs) const;

 private:
  ComplexPtr complex_;
  int excluded_;
  std::vector<int> index_of_vertex_;
  std::vector<int> vertex_of_index_;
};

int LexicographicMinVertex(const SimplicialComplex& complex);

// 2 * max simplex diameter + (varsigma / 2) * max vertex distance.
double EpsilonBar(const SimplicialComplex& complex, double varsigma,
                  Norm norm = Norm::kL2);

struct PartitionPlanInput {
  double eps = 0.0;
  double eps_par = 0.0;
  double eps_star = 0.0;
  int num_categories = 1;
  std::vector<double> lipschitz1;       // per category
  double lipschitz2_bar = 0.0;
  std::vector<Box> type_boxes;          // per category
  Box quality_box;
  std::vector<double> type_norm_constants;  // C_i, per category
  double quality_norm_constant = 1.0;       // C_0
  Norm norm = Norm::kL2;
};

struct PartitionPlan {
  std::vector<std::vector<int>> type_counts;
  std::vector<int> quality_counts;
  double varsigma_bar = 0.0;
};

// Throws kBudgetNonpositive when eps <= eps_par + eps_star.
PartitionPlan PlanPartition(const PartitionPlanInput& in);

}  // namespace teamsolve

#endif  // TEAMSOLVE_GEOMETRY_H_
