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

#include "teamsolve/transport.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <ostream>

#include <glog/logging.h>

#include "teamsolve/linprog.h"

namespace teamsolve {
namespace {

constexpr char kModule[] = "transport";

int PickCumulative(const std::vector<double>& cumulative, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, cumulative.back());
  int k = static_cast<int>(std::upper_bound(cumulative.begin(), cumulative.end(), u(rng)) -
                           cumulative.begin());
  return std::min(k, static_cast<int>(cumulative.size()) - 1);
}

void CheckDims(const DiscreteMeasure& source, int target_dim) {
  if (source.size() == 0) throw Error(ErrorCode::kInvalidArgument, kModule, "empty source measure");
  if (source.dim() != target_dim) {
    throw Error(ErrorCode::kMetricMismatch, kModule,
                "source and target live in spaces of different dimension");
  }
}

// Integral of |a - y| f(y) over [lo, hi] for a piecewise-linear density on
// the line. Simpson's rule is exact on every piece.
double AbsMomentOnSegment(const CpwaMeasure& m, double a, double lo, double hi) {
  if (hi <= lo) return 0.0;
  std::vector<double> cuts{lo, hi};
  for (const Point& v : m.complex().vertices()) {
    if (v[0] > lo && v[0] < hi) cuts.push_back(v[0]);
  }
  if (a > lo && a < hi) cuts.push_back(a);
  std::sort(cuts.begin(), cuts.end());
  auto f = [&](double y) {
    Point p(1);
    p[0] = y;
    return std::abs(a - y) * m.Density(p);
  };
  double total = 0.0;
  for (size_t k = 0; k + 1 < cuts.size(); ++k) {
    double p = cuts[k], q = cuts[k + 1];
    if (q <= p) continue;
    total += (q - p) / 6.0 * (f(p) + 4.0 * f(0.5 * (p + q)) + f(q));
  }
  return total;
}

}  // namespace

std::pair<int, Point> CouplingSampler::SampleJoint(Rng& rng) const {
  int a = source_.SampleIndex(rng);
  return {a, SampleTarget(a, rng)};
}

DiscretePlan::DiscretePlan(DiscreteMeasure source, DiscreteMeasure target, Norm metric)
    : CouplingSampler(std::move(source), Measure(std::move(target))) {
  const DiscreteMeasure& tgt = target_.discrete();
  CheckDims(source_, tgt.dim());
  const int na = source_.size(), nb = tgt.size();
  Matrix dist(na, nb);
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b) dist(a, b) = Distance(source_.atom(a), tgt.atom(b), metric);

  LpProblem lp(na + nb);
  for (int a = 0; a < na; ++a) lp.SetObjective(a, source_.weight(a));
  for (int b = 0; b < nb; ++b) lp.SetObjective(na + b, tgt.weight(b));
  for (int a = 0; a < na; ++a)
    for (int b = 0; b < nb; ++b) lp.AddLessEqual({{a, 1.0}, {na + b, 1.0}}, dist(a, b));
  LpSolver solver;
  LpSolution sol = solver.Solve(lp, false);

  plan_.resize(na, nb);
  cumulative_.assign(na, std::vector<double>(nb));
  w1_ = 0.0;
  for (int a = 0; a < na; ++a) {
    double run = 0.0;
    for (int b = 0; b < nb; ++b) {
      double t = std::max(0.0, sol.inequality_duals[a * nb + b]);
      plan_(a, b) = t;
      w1_ += t * dist(a, b);
      run += t;
      cumulative_[a][b] = run;
    }
    if (run <= 0.0) {
      throw Error(ErrorCode::kLpInfeasible, kModule, "transport plan lost a source atom");
    }
  }
}

int DiscretePlan::SampleTargetIndex(int a, Rng& rng) const {
  return PickCumulative(cumulative_.at(a), rng);
}

Point DiscretePlan::SampleTarget(int a, Rng& rng) const {
  return target_.discrete().atom(SampleTargetIndex(a, rng));
}

QuantilePlan::QuantilePlan(DiscreteMeasure source, Measure target)
    : CouplingSampler(std::move(source), std::move(target)) {
  CheckDims(source_, target_.dim());
  if (target_.dim() != 1) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "quantile coupling needs measures on the line");
  }
  const int n = source_.size();
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](int a, int b) { return source_.atom(a)[0] < source_.atom(b)[0]; });
  lower_.assign(n, 0.0);
  upper_.assign(n, 0.0);
  double run = 0.0;
  for (int a : order) {
    lower_[a] = run;
    run += source_.weight(a);
    upper_[a] = std::min(1.0, run);
  }

  // W1 as the integral of |F1^-1 - F2^-1| over each atom's level range.
  w1_ = 0.0;
  if (target_.is_discrete()) {
    const DiscreteMeasure& t = target_.discrete();
    std::vector<int> tord(t.size());
    std::iota(tord.begin(), tord.end(), 0);
    std::sort(tord.begin(), tord.end(),
              [&](int a, int b) { return t.atom(a)[0] < t.atom(b)[0]; });
    std::vector<double> tlo, thi;
    double c = 0.0;
    for (int b : tord) {
      tlo.push_back(c);
      c += t.weight(b);
      thi.push_back(c);
    }
    for (int a = 0; a < n; ++a) {
      for (size_t k = 0; k < tord.size(); ++k) {
        double overlap = std::min(upper_[a], thi[k]) - std::max(lower_[a], tlo[k]);
        if (overlap > 0.0) w1_ += overlap * std::abs(source_.atom(a)[0] - t.atom(tord[k])[0]);
      }
    }
  } else {
    const CpwaMeasure& m = target_.cpwa();
    for (int a = 0; a < n; ++a) {
      double lo = Quantile1d(target_, lower_[a]);
      double hi = Quantile1d(target_, upper_[a]);
      w1_ += AbsMomentOnSegment(m, source_.atom(a)[0], lo, hi);
    }
  }
}

Point QuantilePlan::SampleTarget(int a, Rng& rng) const {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double v = u(rng);
  double t = v * upper_.at(a) + (1.0 - v) * lower_.at(a);
  Point y(1);
  y[0] = Quantile1d(target_, std::clamp(t, 0.0, 1.0));
  return y;
}

SemiDiscretePlan::SemiDiscretePlan(DiscreteMeasure source, CpwaMeasure target,
                                   const SemiDiscreteOptions& options, Rng& rng)
    : CouplingSampler(std::move(source), Measure(std::move(target))),
      max_trials_(options.max_trials) {
  CheckDims(source_, target_.dim());
  const int n = source_.size();
  const CpwaMeasure& nu = density();
  phi_ = Vector::Zero(n);

  if (n > 1) {
    double step0 = options.step0;
    if (step0 <= 0.0) {
      Box box = nu.complex().BoundingBox();
      step0 = 0.5 * (box.upper - box.lower).norm();
    }
    std::vector<Point> trace_set;
    if (options.trace_every > 0) {
      for (int s = 0; s < 4096; ++s) trace_set.push_back(nu.Sample(rng));
    }
    Vector alpha(n);
    for (int a = 0; a < n; ++a) alpha[a] = source_.weight(a);
    Vector avg = Vector::Zero(n);
    Vector counts(n);
    const int start_avg = options.iterations / 2;
    int averaged = 0;
    for (int t = 1; t <= options.iterations; ++t) {
      counts.setZero();
      for (int s = 0; s < options.minibatch; ++s) counts[Cell(nu.Sample(rng))] += 1.0;
      phi_ += (step0 / std::sqrt(static_cast<double>(t))) * (alpha - counts / options.minibatch);
      if (t > start_avg) {
        ++averaged;
        avg += (phi_ - avg) / averaged;
      }
      if (options.trace_every > 0 && t % options.trace_every == 0 && averaged > 0) {
        trace_.push_back({t, DualValue(avg, trace_set)});
      }
    }
    if (averaged > 0) phi_ = avg;
  }

  // Validation: cell masses and transport cost on fresh samples.
  const int nv = std::max(1, options.validation_samples);
  std::vector<double> counts(n, 0.0);
  double cost = 0.0;
  for (int s = 0; s < nv; ++s) {
    Point y = nu.Sample(rng);
    int a = Cell(y);
    counts[a] += 1.0;
    cost += (source_.atom(a) - y).norm();
  }
  cell_mass_.resize(n);
  mass_error_ = 0.0;
  for (int a = 0; a < n; ++a) {
    cell_mass_[a] = counts[a] / nv;
    mass_error_ = std::max(mass_error_, std::abs(cell_mass_[a] - source_.weight(a)));
  }
  w1_ = cost / nv;
  VLOG(1) << "semi-discrete plan with " << n << " atoms: mass error " << mass_error_;
  if (mass_error_ > options.tol_mass) {
    throw Error(ErrorCode::kCellMassMismatch, kModule,
                "cell masses differ from the source weights by " + FormatDouble(mass_error_) +
                    " (tolerance " + FormatDouble(options.tol_mass) + ")");
  }

  // An atom can only win in simplex S if its score at the centroid is within
  // 2 rho of the best one, rho being S's circumradius about the centroid.
  const SimplicialComplex& c = nu.complex();
  candidates_.assign(n, {});
  candidate_cumulative_.assign(n, {});
  Vector score(n);
  for (int s = 0; s < c.num_simplices(); ++s) {
    if (nu.SimplexMass(s) <= 0.0) continue;
    Point centre = Point::Zero(c.dim());
    for (int v : c.simplex(s)) centre += c.vertex(v);
    centre /= static_cast<double>(c.simplex(s).size());
    double rho = 0.0;
    for (int v : c.simplex(s)) rho = std::max(rho, (c.vertex(v) - centre).norm());
    for (int a = 0; a < n; ++a) score[a] = phi_[a] - (source_.atom(a) - centre).norm();
    const double best = score.maxCoeff();
    for (int a = 0; a < n; ++a) {
      if (best - score[a] <= 2.0 * rho + 1e-12) {
        double prev = candidate_cumulative_[a].empty() ? 0.0 : candidate_cumulative_[a].back();
        candidates_[a].push_back(s);
        candidate_cumulative_[a].push_back(prev + nu.SimplexMass(s));
      }
    }
  }
}

int SemiDiscretePlan::Cell(const Point& y) const {
  int best = 0;
  double value = -std::numeric_limits<double>::infinity();
  for (int a = 0; a < phi_.size(); ++a) {
    double v = phi_[a] - (source_.atom(a) - y).norm();
    if (v > value) {
      value = v;
      best = a;
    }
  }
  return best;
}

double SemiDiscretePlan::DualValue(const Vector& phi, const std::vector<Point>& ys) const {
  double value = 0.0;
  for (int a = 0; a < phi.size(); ++a) value += phi[a] * source_.weight(a);
  double integral = 0.0;
  for (const Point& y : ys) {
    double m = -std::numeric_limits<double>::infinity();
    for (int a = 0; a < phi.size(); ++a) m = std::max(m, phi[a] - (source_.atom(a) - y).norm());
    integral += m;
  }
  return value - integral / static_cast<double>(ys.size());
}

Point SemiDiscretePlan::SampleTarget(int a, Rng& rng) const {
  const CpwaMeasure& nu = density();
  if (phi_.size() == 1) return nu.Sample(rng);
  const auto& cand = candidates_.at(a);
  Point best_point;
  double best_margin = -std::numeric_limits<double>::infinity();
  for (int trial = 0; trial < max_trials_; ++trial) {
    Point y = cand.empty() ? nu.Sample(rng)
                           : nu.SampleInSimplex(cand[PickCumulative(candidate_cumulative_[a], rng)], rng);
    double own = phi_[a] - (source_.atom(a) - y).norm();
    double other = -std::numeric_limits<double>::infinity();
    int winner = a;
    for (int b = 0; b < phi_.size(); ++b) {
      if (b == a) continue;
      double v = phi_[b] - (source_.atom(b) - y).norm();
      if (v > other) other = v;
      // Ties go to the lowest index.
      if (v > own || (v == own && b < a)) winner = b;
    }
    if (winner == a) return y;
    if (own - other > best_margin) {
      best_margin = own - other;
      best_point = y;
    }
  }
  fallbacks_.fetch_add(1);
  return best_point;
}

std::pair<int, Point> SemiDiscretePlan::SampleJoint(Rng& rng) const {
  Point y = density().Sample(rng);
  return {Cell(y), y};
}

SamplerPtr MakeCoupling(const DiscreteMeasure& source, const Measure& target,
                        const SemiDiscreteOptions& options, Rng& rng) {
  if (target.is_discrete()) return std::make_shared<DiscretePlan>(source, target.discrete());
  if (target.dim() == 1) return std::make_shared<QuantilePlan>(source, target);
  return std::make_shared<SemiDiscretePlan>(source, target.cpwa(), options, rng);
}

double W1Discrete(const DiscreteMeasure& a, const DiscreteMeasure& b, Norm metric) {
  return DiscretePlan(a, b, metric).w1();
}

void WriteCoupledSamples(std::ostream& out, const CouplingSampler& sampler, int n, Rng& rng) {
  const int ds = sampler.source().dim(), dt = sampler.target().dim();
  for (int k = 0; k < ds; ++k) out << (k ? "," : "") << "src_" << k;
  for (int k = 0; k < dt; ++k) out << ",tgt_" << k;
  out << '\n';
  for (int s = 0; s < n; ++s) {
    auto [a, y] = sampler.SampleJoint(rng);
    const Point& x = sampler.source().atom(a);
    for (int k = 0; k < ds; ++k) out << (k ? "," : "") << FormatDouble(x[k]);
    for (int k = 0; k < dt; ++k) out << ',' << FormatDouble(y[k]);
    out << '\n';
  }
}

}  // namespace teamsolve
