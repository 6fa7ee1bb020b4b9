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

// Small builders shared by the unit tests.

#ifndef TEAMSOLVE_TESTS_TESTING_BUILDERS_H_
#define TEAMSOLVE_TESTS_TESTING_BUILDERS_H_

#include <functional>
#include <initializer_list>
#include <memory>
#include <optional>
#include <vector>

#include "teamsolve/common.h"
#include "teamsolve/geometry.h"
#include "teamsolve/measures.h"
#include "teamsolve/problems.h"

namespace teamsolve::testing {

inline Point P(std::initializer_list<double> v) {
  Point p(static_cast<int>(v.size()));
  int k = 0;
  for (double x : v) p[k++] = x;
  return p;
}

inline Box MakeBox(std::initializer_list<double> lo, std::initializer_list<double> hi) {
  return Box{P(lo), P(hi)};
}

inline ComplexPtr Share(SimplicialComplex c) {
  return std::make_shared<const SimplicialComplex>(std::move(c));
}

inline ComplexPtr Grid(std::initializer_list<double> lo, std::initializer_list<double> hi,
                       std::vector<int> counts) {
  return Share(SimplicialComplex::BoxPartition(MakeBox(lo, hi), counts));
}

// Error code raised by fn, if any.
inline std::optional<ErrorCode> CodeOf(const std::function<void()>& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  return std::nullopt;
}

// Instance with uniform densities on every type complex.
inline std::shared_ptr<const Instance> UniformInstance(CostPtr cost,
                                                       std::vector<ComplexPtr> types,
                                                       ComplexPtr quality) {
  std::vector<HatBasis> bases;
  std::vector<Measure> measures;
  for (const ComplexPtr& c : types) {
    bases.emplace_back(c);
    if (c->is_point_set()) {
      std::vector<double> wts(c->num_vertices(), 1.0 / c->num_vertices());
      measures.emplace_back(DiscreteMeasure(c->vertices(), wts));
    } else {
      double vol = 0.0;
      for (int s = 0; s < c->num_simplices(); ++s) vol += c->Volume(s);
      measures.emplace_back(CpwaMeasure(c, Vector::Constant(c->num_vertices(), 1.0 / vol)));
    }
  }
  return std::make_shared<const Instance>(
      Instance::Make(std::move(cost), std::move(bases), HatBasis(quality), std::move(measures)));
}

}  // namespace teamsolve::testing

#endif  // TEAMSOLVE_TESTS_TESTING_BUILDERS_H_
