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

#include "teamsolve/measures.h"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace teamsolve {
namespace {

constexpr char kModule[] = "measures";
constexpr double kNormalizeTol = 1e-6;

double Factorial(int n) {
  double f = 1.0;
  for (int k = 2; k <= n; ++k) f *= k;
  return f;
}

// Integral over a d-simplex of volume `vol` of prod lambda_v^{alpha_v}.
double BarycentricMonomial(double vol, int d, const std::vector<int>& alpha) {
  int total = 0;
  double num = Factorial(d);
  for (int a : alpha) {
    total += a;
    num *= Factorial(a);
  }
  return vol * num / Factorial(d + total);
}

int SampleCumulative(const std::vector<double>& cumulative, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, cumulative.back());
  double r = u(rng);
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r);
  int k = static_cast<int>(it - cumulative.begin());
  return std::min(k, static_cast<int>(cumulative.size()) - 1);
}

// Position in [0,1] at which the trapezoid density with end values fa, fb
// has accumulated the fraction u of its mass.
double TrapezoidInverse(double fa, double fb, double u) {
  double m = u * (fa + fb);
  if (m <= 0.0) return 0.0;
  double t = m / (fa + std::sqrt(fa * fa + (fb - fa) * m));
  return std::clamp(t, 0.0, 1.0);
}

}  // namespace

DiscreteMeasure::DiscreteMeasure(std::vector<Point> atoms, std::vector<double> weights) {
  if (atoms.size() != weights.size() || atoms.empty()) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "discrete measure needs one weight per atom and at least one atom");
  }
  const int d = static_cast<int>(atoms[0].size());
  double total = 0.0;
  for (size_t j = 0; j < atoms.size(); ++j) {
    if (atoms[j].size() != d) {
      throw Error(ErrorCode::kDimensionMismatch, kModule, "atoms of different dimension");
    }
    if (!(weights[j] >= 0.0) || !std::isfinite(weights[j])) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "negative or non-finite weight");
    }
    if (weights[j] == 0.0) continue;
    atoms_.push_back(atoms[j]);
    weights_.push_back(weights[j]);
    total += weights[j];
  }
  if (std::abs(total - 1.0) > kNormalizeTol) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "weights sum to " + FormatDouble(total) + ", not 1");
  }
  for (double& w : weights_) w /= total;
  std::vector<int> order(atoms_.size());
  std::iota(order.begin(), order.end(), 0);
  auto lex = [&](int a, int b) {
    return std::lexicographical_compare(atoms_[a].begin(), atoms_[a].end(),
                                        atoms_[b].begin(), atoms_[b].end());
  };
  std::sort(order.begin(), order.end(), lex);
  for (size_t k = 1; k < order.size(); ++k) {
    if (atoms_[order[k]] == atoms_[order[k - 1]]) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "duplicate atom");
    }
  }
  cumulative_.resize(weights_.size());
  std::partial_sum(weights_.begin(), weights_.end(), cumulative_.begin());
}

DiscreteMeasure DiscreteMeasure::Dirac(const Point& atom) { return DiscreteMeasure({atom}, {1.0}); }

int DiscreteMeasure::SampleIndex(Rng& rng) const { return SampleCumulative(cumulative_, rng); }

CpwaMeasure::CpwaMeasure(ComplexPtr complex, Vector vertex_density)
    : complex_(std::move(complex)), density_(std::move(vertex_density)) {
  if (complex_->is_point_set()) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "density needs a full-dimensional complex");
  }
  if (density_.size() != complex_->num_vertices()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "one density value per vertex expected");
  }
  for (int v = 0; v < density_.size(); ++v) {
    if (!(density_[v] >= 0.0) || !std::isfinite(density_[v])) {
      throw Error(ErrorCode::kInvalidArgument, kModule, "negative or non-finite density");
    }
  }
  const int d = complex_->dim();
  double total = 0.0;
  mass_.resize(complex_->num_simplices());
  for (int s = 0; s < complex_->num_simplices(); ++s) {
    double sum = 0.0;
    for (int v : complex_->simplex(s)) sum += density_[v];
    mass_[s] = complex_->Volume(s) * sum / (d + 1);
    total += mass_[s];
  }
  if (std::abs(total - 1.0) > kNormalizeTol) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "density integrates to " + FormatDouble(total) + ", not 1");
  }
  density_ /= total;
  for (double& m : mass_) m /= total;
  cumulative_.resize(mass_.size());
  std::partial_sum(mass_.begin(), mass_.end(), cumulative_.begin());
}

double CpwaMeasure::Density(const Point& x) const {
  auto loc = complex_->TryLocate(x);
  if (!loc) return 0.0;
  const auto& simp = complex_->simplex(loc->simplex);
  double f = 0.0;
  for (size_t k = 0; k < simp.size(); ++k) f += loc->coords[k] * density_[simp[k]];
  return f;
}

Point CpwaMeasure::Sample(Rng& rng) const {
  return SampleInSimplex(SampleCumulative(cumulative_, rng), rng);
}

Point CpwaMeasure::SampleInSimplex(int s, Rng& rng) const {
  const auto& simp = complex_->simplex(s);
  const int d = complex_->dim();
  std::uniform_real_distribution<double> u(0.0, 1.0);
  if (d == 1) {
    double t = TrapezoidInverse(density_[simp[0]], density_[simp[1]], u(rng));
    return (1.0 - t) * complex_->vertex(simp[0]) + t * complex_->vertex(simp[1]);
  }
  double fmax = 0.0;
  for (int v : simp) fmax = std::max(fmax, density_[v]);
  std::exponential_distribution<double> expo(1.0);
  Barycentric lam(d + 1);
  for (;;) {
    for (int k = 0; k <= d; ++k) lam[k] = expo(rng);
    lam /= lam.sum();
    double f = 0.0;
    for (int k = 0; k <= d; ++k) f += lam[k] * density_[simp[k]];
    if (fmax <= 0.0 || u(rng) * fmax <= f) break;
  }
  Point x = Point::Zero(d);
  for (int k = 0; k <= d; ++k) x += lam[k] * complex_->vertex(simp[k]);
  return x;
}

int Measure::dim() const {
  return is_discrete() ? discrete().dim() : cpwa().dim();
}

Point Measure::Sample(Rng& rng) const {
  if (is_discrete()) return discrete().atom(discrete().SampleIndex(rng));
  return cpwa().Sample(rng);
}

std::vector<Point> Measure::Sample(Rng& rng, int n) const {
  std::vector<Point> out;
  out.reserve(n);
  for (int k = 0; k < n; ++k) out.push_back(Sample(rng));
  return out;
}

Point Measure::Mean() const {
  Point mean = Point::Zero(dim());
  if (is_discrete()) {
    const auto& m = discrete();
    for (int j = 0; j < m.size(); ++j) mean += m.weight(j) * m.atom(j);
    return mean;
  }
  const auto& m = cpwa();
  const auto& c = m.complex();
  const int d = c.dim();
  for (int s = 0; s < c.num_simplices(); ++s) {
    const auto& simp = c.simplex(s);
    // int f x = sum_a sum_u f_a p_u int lambda_a lambda_u
    double fsum = 0.0;
    for (int v : simp) fsum += m.vertex_density()[v];
    double scale = c.Volume(s) / ((d + 1.0) * (d + 2.0));
    for (int v : simp) {
      mean += scale * (fsum + m.vertex_density()[v]) * c.vertex(v);
    }
  }
  return mean;
}

double Measure::SecondMoment() const {
  if (is_discrete()) {
    const auto& m = discrete();
    double s = 0.0;
    for (int j = 0; j < m.size(); ++j) s += m.weight(j) * m.atom(j).squaredNorm();
    return s;
  }
  const auto& m = cpwa();
  const auto& c = m.complex();
  const int d = c.dim();
  const Vector& f = m.vertex_density();
  double total = 0.0;
  std::vector<int> alpha(d + 1);
  for (int s = 0; s < c.num_simplices(); ++s) {
    const auto& simp = c.simplex(s);
    const double vol = c.Volume(s);
    for (int a = 0; a <= d; ++a) {
      for (int u = 0; u <= d; ++u) {
        for (int w = 0; w <= d; ++w) {
          std::fill(alpha.begin(), alpha.end(), 0);
          ++alpha[a];
          ++alpha[u];
          ++alpha[w];
          total += f[simp[a]] * c.vertex(simp[u]).dot(c.vertex(simp[w])) *
                   BarycentricMonomial(vol, d, alpha);
        }
      }
    }
  }
  return total;
}

Vector MomentVector(const Measure& measure, const HatBasis& basis) {
  const SimplicialComplex& bc = basis.complex();
  if (measure.dim() != bc.dim()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "measure and basis dimensions differ");
  }
  Vector moments = Vector::Zero(basis.size());
  if (measure.is_discrete()) {
    const auto& m = measure.discrete();
    for (int j = 0; j < m.size(); ++j) {
      auto loc = bc.TryLocate(m.atom(j));
      if (!loc) {
        throw Error(ErrorCode::kSupportOutsideBasis, kModule,
                    "atom " + std::to_string(j) + " lies outside the basis complex");
      }
      SparseHat h = basis.FromLocation(*loc);
      for (int k = 0; k < h.count; ++k) moments[h.entries[k].index] += m.weight(j) * h.entries[k].value;
    }
    return moments;
  }
  if (bc.is_point_set()) {
    throw Error(ErrorCode::kSupportOutsideBasis, kModule,
                "a density cannot be integrated against indicator functions of points");
  }
  const auto& m = measure.cpwa();
  const auto& mc = m.complex();
  const int d = mc.dim();
  const Vector& f = m.vertex_density();
  for (int s = 0; s < mc.num_simplices(); ++s) {
    const auto& simp = mc.simplex(s);
    Point centroid = Point::Zero(d);
    for (int v : simp) centroid += mc.vertex(v);
    centroid /= d + 1;
    auto host = bc.TryLocate(centroid);
    if (!host) {
      throw Error(ErrorCode::kSupportOutsideBasis, kModule,
                  "density simplex " + std::to_string(s) + " lies outside the basis complex");
    }
    const auto& bsimp = bc.simplex(host->simplex);
    // Hat values of the host simplex's vertices at the corners of s.
    Matrix g(d + 1, d + 1);
    for (int k = 0; k <= d; ++k) {
      Barycentric lam = bc.BarycentricCoords(host->simplex, mc.vertex(simp[k]));
      if (lam.minCoeff() < -kTolGeom) {
        throw Error(ErrorCode::kSupportOutsideBasis, kModule,
                    "density complex does not refine the basis complex");
      }
      for (int b = 0; b <= d; ++b) g(b, k) = std::max(0.0, lam[b]);
    }
    double fsum = 0.0;
    for (int v : simp) fsum += f[v];
    const double scale = mc.Volume(s) / ((d + 1.0) * (d + 2.0));
    for (int b = 0; b <= d; ++b) {
      int j = basis.IndexOfVertex(bsimp[b]);
      if (j < 0) continue;
      double gsum = 0.0, fg = 0.0;
      for (int k = 0; k <= d; ++k) {
        gsum += g(b, k);
        fg += f[simp[k]] * g(b, k);
      }
      moments[j] += scale * (fsum * gsum + fg);
    }
  }
  return moments;
}

double Quantile1d(const Measure& measure, double t) {
  if (!(t >= 0.0 && t <= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "quantile level outside [0,1]");
  }
  if (measure.dim() != 1) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "quantile needs a one-dimensional measure");
  }
  constexpr double kLevelTol = 1e-12;
  if (measure.is_discrete()) {
    const auto& m = measure.discrete();
    std::vector<int> order(m.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(),
              [&](int a, int b) { return m.atom(a)[0] < m.atom(b)[0]; });
    double cum = 0.0;
    for (int j : order) {
      cum += m.weight(j);
      if (cum >= t - kLevelTol) return m.atom(j)[0];
    }
    return m.atom(order.back())[0];
  }
  const auto& m = measure.cpwa();
  const auto& c = m.complex();
  struct Piece {
    double a, b, fa, fb, mass;
  };
  std::vector<Piece> pieces;
  for (int s = 0; s < c.num_simplices(); ++s) {
    int v0 = c.simplex(s)[0], v1 = c.simplex(s)[1];
    if (c.vertex(v0)[0] > c.vertex(v1)[0]) std::swap(v0, v1);
    pieces.push_back({c.vertex(v0)[0], c.vertex(v1)[0], m.vertex_density()[v0],
                      m.vertex_density()[v1], m.SimplexMass(s)});
  }
  std::sort(pieces.begin(), pieces.end(), [](const Piece& p, const Piece& q) { return p.a < q.a; });
  if (t <= 0.0) return pieces.front().a;
  double cum = 0.0;
  for (const Piece& p : pieces) {
    if (p.mass > 0.0 && cum + p.mass >= t - kLevelTol) {
      double u = std::clamp((t - cum) / p.mass, 0.0, 1.0);
      return p.a + (p.b - p.a) * TrapezoidInverse(p.fa, p.fb, u);
    }
    cum += p.mass;
  }
  return pieces.back().b;
}

CpwaMeasure RandomCpwaDensity(ComplexPtr complex, Rng& rng) {
  std::exponential_distribution<double> expo(1.0);
  Vector f(complex->num_vertices());
  for (int v = 0; v < f.size(); ++v) f[v] = expo(rng);
  const int d = complex->dim();
  double total = 0.0;
  for (int s = 0; s < complex->num_simplices(); ++s) {
    double sum = 0.0;
    for (int v : complex->simplex(s)) sum += f[v];
    total += complex->Volume(s) * sum / (d + 1);
  }
  return CpwaMeasure(std::move(complex), f / total);
}

}  // namespace teamsolve
