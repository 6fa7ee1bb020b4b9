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

// W1-optimal couplings between a finitely supported source and a target
// measure, exposed as samplers of the target conditional on a source atom.

#ifndef TEAMSOLVE_TRANSPORT_H_
#define TEAMSOLVE_TRANSPORT_H_

#include <atomic>
#include <iosfwd>
#include <memory>
#include <utility>
#include <vector>

#include "teamsolve/common.h"
#include "teamsolve/geometry.h"
#include "teamsolve/measures.h"

namespace teamsolve {

class CouplingSampler {
 public:
  virtual ~CouplingSampler() = default;

  const DiscreteMeasure& source() const { return source_; }
  const Measure& target() const { return target_; }
  // Transport cost of the coupling: exact for the discrete and quantile
  // plans, a Monte Carlo estimate for the semi-discrete plan.
  double w1() const { return w1_; }

  // Target point given source atom `a`. Thread-safe with per-thread rngs.
  virtual Point SampleTarget(int a, Rng& rng) const = 0;
  // (source atom, target point) drawn from the coupling.
  virtual std::pair<int, Point> SampleJoint(Rng& rng) const;

 protected:
  CouplingSampler(DiscreteMeasure source, Measure target)
      : source_(std::move(source)), target_(std::move(target)) {}

  DiscreteMeasure source_;
  Measure target_;
  double w1_ = 0.0;
};

using SamplerPtr = std::shared_ptr<const CouplingSampler>;

// Optimal plan between two discrete measures from the transport LP.
class DiscretePlan : public CouplingSampler {
 public:
  DiscretePlan(DiscreteMeasure source, DiscreteMeasure target, Norm metric = Norm::kL2);

  Point SampleTarget(int a, Rng& rng) const override;
  int SampleTargetIndex(int a, Rng& rng) const;
  // plan()(a, b): mass moved from source atom a to target atom b.
  const Matrix& plan() const { return plan_; }

 private:
  Matrix plan_;
  std::vector<std::vector<double>> cumulative_;  // per source atom
};

// Comonotone coupling on the real line: atom a is spread over the target
// quantiles between the source CDF just below and at a.
class QuantilePlan : public CouplingSampler {
 public:
  QuantilePlan(DiscreteMeasure source, Measure target);

  Point SampleTarget(int a, Rng& rng) const override;

 private:
  // Source CDF just below and at each atom.
  std::vector<double> lower_, upper_;
};

struct SemiDiscreteOptions {
  int iterations = 20000;
  int minibatch = 256;
  // Initial step; 0 selects half the diameter of the target's bounding box.
  double step0 = 0.0;
  // Largest allowed |cell mass - source weight|.
  double tol_mass = 1e-2;
  int validation_samples = 100000;
  // Rejection trials per conditional draw before falling back.
  int max_trials = 100000;
  // Record the dual value of the averaged potentials this often (0: never).
  int trace_every = 0;
};

// Euclidean transport from a discrete source to a density: potentials phi
// split the target into cells V_a = argmax_a (phi_a - |x_a - y|), found by
// averaged stochastic ascent on the concave dual.
class SemiDiscretePlan : public CouplingSampler {
 public:
  // Throws kCellMassMismatch when the cells miss the source weights by more
  // than tol_mass.
  SemiDiscretePlan(DiscreteMeasure source, CpwaMeasure target, const SemiDiscreteOptions& options,
                   Rng& rng);

  Point SampleTarget(int a, Rng& rng) const override;
  std::pair<int, Point> SampleJoint(Rng& rng) const override;

  const Vector& potentials() const { return phi_; }
  const std::vector<double>& cell_masses() const { return cell_mass_; }
  double mass_error() const { return mass_error_; }
  // (iteration, estimated dual value) pairs.
  const std::vector<std::pair<int, double>>& dual_trace() const { return trace_; }
  // Conditional draws that hit the trial cap and returned the best trial.
  long fallbacks() const { return fallbacks_.load(); }

  // Cell of y, ties to the lowest index.
  int Cell(const Point& y) const;

 private:
  const CpwaMeasure& density() const { return target_.cpwa(); }
  double DualValue(const Vector& phi, const std::vector<Point>& ys) const;

  Vector phi_;
  std::vector<double> cell_mass_;
  double mass_error_ = 0.0;
  std::vector<std::pair<int, double>> trace_;
  int max_trials_ = 0;
  // Per atom: simplices where it can win and their cumulative masses.
  std::vector<std::vector<int>> candidates_;
  std::vector<std::vector<double>> candidate_cumulative_;
  mutable std::atomic<long> fallbacks_{0};
};

// Picks the construction for the pair: LP when both are discrete, quantiles
// on the line, semi-discrete ascent otherwise.
SamplerPtr MakeCoupling(const DiscreteMeasure& source, const Measure& target,
                        const SemiDiscreteOptions& options, Rng& rng);

// W1 between discrete measures.
double W1Discrete(const DiscreteMeasure& a, const DiscreteMeasure& b, Norm metric = Norm::kL2);

// Streams `n` joint samples as CSV with source then target coordinates.
void WriteCoupledSamples(std::ostream& out, const CouplingSampler& sampler, int n, Rng& rng);

}  // namespace teamsolve

#endif  // TEAMSOLVE_TRANSPORT_H_
