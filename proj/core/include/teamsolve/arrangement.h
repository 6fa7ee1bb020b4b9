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

// Vertex enumeration for hyperplane arrangements inside products of
// simplices. A function that is a minimum of affine functions on every
// region of the arrangement attains its minimum over the product at one of
// these vertices, which is what the exact oracles and selectors rely on.

#ifndef TEAMSOLVE_ARRANGEMENT_H_
#define TEAMSOLVE_ARRANGEMENT_H_

#include <functional>
#include <vector>

#include "teamsolve/common.h"
#include "teamsolve/geometry.h"

namespace teamsolve {

// One simplex per factor, given by its vertices. A single vertex is a point
// factor and contributes no degrees of freedom.
using SimplexProduct = std::vector<std::vector<Point>>;

// sum_b <normal[b], x_b> = rhs, with x_b the point in factor b.
struct ProductHyperplane {
  std::vector<Point> normal;
  double rhs = 0.0;
};

// Barycentric coordinates in every factor.
using ProductPoint = std::vector<Barycentric>;

// Every point of the product where the active facets and hyperplanes pin
// down a single point. Hyperplanes that miss the interior are ignored.
// Results are deduplicated; coordinates are clamped to be non-negative.
std::vector<ProductPoint> ArrangementVertices(const SimplexProduct& product,
                                              const std::vector<ProductHyperplane>& hyperplanes);

// Ambient point of factor b.
Point FactorPoint(const SimplexProduct& product, const ProductPoint& p, int b);

// <normal, x> = rhs.
struct Hyperplane {
  Point normal;
  double rhs = 0.0;
};

// Calls visit(x) for every vertex of the arrangement of `planes` inside
// simplex s of a full-dimensional complex. Allocation-free apart from the
// filtered plane list; points may repeat. Meant for per-sample use where
// deduplication would cost more than revisiting.
void VisitSimplexArrangement(const SimplicialComplex& complex, int s,
                             const std::vector<Hyperplane>& planes,
                             const std::function<void(const Point&)>& visit);

}  // namespace teamsolve

#endif  // TEAMSOLVE_ARRANGEMENT_H_
