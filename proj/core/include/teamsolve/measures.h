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

// Probability measures on type and quality spaces: finitely supported, or
// with a continuous piecewise-affine density on a simplicial complex.

#ifndef TEAMSOLVE_MEASURES_H_
#define TEAMSOLVE_MEASURES_H_

#include <variant>
#include <vector>

#include "teamsolve/common.h"
#include "teamsolve/geometry.h"

namespace teamsolve {

class DiscreteMeasure {
 public:
  DiscreteMeasure() = default;
  // Zero weights are dropped; the rest are normalised when their sum is
  // within 1e-6 of one. Atoms must be distinct.
  DiscreteMeasure(std::vector<Point> atoms, std::vector<double> weights);

  static DiscreteMeasure Dirac(const Point& atom);

  int size() const { return static_cast<int>(atoms_.size()); }
  int dim() const { return atoms_.empty() ? 0 : static_cast<int>(atoms_[0].size()); }
  const Point& atom(int j) const { return atoms_[j]; }
  double weight(int j) const { return weights_[j]; }
  const std::vector<Point>& atoms() const { return atoms_; }
  const std::vector<double>& weights() const { return weights_; }

  int SampleIndex(Rng& rng) const;

 private:
  std::vector<Point> atoms_;
  std::vector<double> weights_;
  std::vector<double> cumulative_;
};

// Density that is affine on every simplex of a full-dimensional complex and
// continuous across faces (one value per vertex).
class CpwaMeasure {
 public:
  CpwaMeasure(ComplexPtr complex, Vector vertex_density);

  const SimplicialComplex& complex() const { return *complex_; }
  const ComplexPtr& complex_ptr() const { return complex_; }
  const Vector& vertex_density() const { return density_; }
  int dim() const { return complex_->dim(); }
  double SimplexMass(int s) const { return mass_[s]; }
  double Density(const Point& x) const;

  Point Sample(Rng& rng) const;
  // Draw from the density restricted to simplex s.
  Point SampleInSimplex(int s, Rng& rng) const;

 private:
  ComplexPtr complex_;
  Vector density_;
  std::vector<double> mass_;
  std::vector<double> cumulative_;
};

class Measure {
 public:
  Measure(DiscreteMeasure m) : impl_(std::move(m)) {}  // NOLINT
  Measure(CpwaMeasure m) : impl_(std::move(m)) {}      // NOLINT

  bool is_discrete() const { return std::holds_alternative<DiscreteMeasure>(impl_); }
  const DiscreteMeasure& discrete() const { return std::get<DiscreteMeasure>(impl_); }
  const CpwaMeasure& cpwa() const { return std::get<CpwaMeasure>(impl_); }
  int dim() const;

  Point Sample(Rng& rng) const;
  std::vector<Point> Sample(Rng& rng, int n) const;

  Point Mean() const;
  // Integral of |x|^2.
  double SecondMoment() const;

 private:
  std::variant<DiscreteMeasure, CpwaMeasure> impl_;
};

// Exact integrals of the hat functions. For densities the measure's complex
// must refine the basis complex. Throws kSupportOutsideBasis.
Vector MomentVector(const Measure& measure, const HatBasis& basis);

// Generalised inverse distribution function inf{y : F(y) >= t} of a
// one-dimensional measure. Throws kInvalidArgument for t outside [0,1].
double Quantile1d(const Measure& measure, double t);

// Random density on `complex`: i.i.d. standard exponential vertex values
// (a flat Dirichlet draw), normalised to unit mass.
CpwaMeasure RandomCpwaDensity(ComplexPtr complex, Rng& rng);

}  // namespace teamsolve

#endif  // TEAMSOLVE_MEASURES_H_
