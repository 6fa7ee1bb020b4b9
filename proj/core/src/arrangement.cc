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

#include "teamsolve/arrangement.h"

#include <algorithm>
#include <cmath>
#include <limits>

namespace teamsolve {
namespace {

constexpr char kModule[] = "arrangement";
constexpr int kMaxLocal = 2 * kMaxDim;
constexpr double kCutTol = 1e-12;
constexpr double kFeasTol = 1e-10;
constexpr double kPivotTol = 1e-12;

// The affine form <a, t> - b in local coordinates.
struct Form {
  double a[kMaxLocal];
  double b;
};

// Solves the square system given by `rows`; false when singular.
bool SolveSquare(const std::vector<const Form*>& rows, int n, double* t) {
  double m[kMaxLocal][kMaxLocal + 1];
  for (int r = 0; r < n; ++r) {
    for (int c = 0; c < n; ++c) m[r][c] = rows[r]->a[c];
    m[r][n] = rows[r]->b;
  }
  for (int c = 0; c < n; ++c) {
    int piv = c;
    for (int r = c + 1; r < n; ++r) {
      if (std::abs(m[r][c]) > std::abs(m[piv][c])) piv = r;
    }
    if (std::abs(m[piv][c]) < kPivotTol) return false;
    if (piv != c) {
      for (int k = c; k <= n; ++k) std::swap(m[piv][k], m[c][k]);
    }
    for (int r = c + 1; r < n; ++r) {
      double f = m[r][c] / m[c][c];
      if (f == 0.0) continue;
      for (int k = c; k <= n; ++k) m[r][k] -= f * m[c][k];
    }
  }
  for (int r = n - 1; r >= 0; --r) {
    double s = m[r][n];
    for (int k = r + 1; k < n; ++k) s -= m[r][k] * t[k];
    t[r] = s / m[r][r];
  }
  return true;
}

}  // namespace

std::vector<ProductPoint> ArrangementVertices(const SimplexProduct& product,
                                              const std::vector<ProductHyperplane>& hyperplanes) {
  const int nb = static_cast<int>(product.size());
  std::vector<int> offset(nb + 1, 0);
  for (int b = 0; b < nb; ++b) {
    if (product[b].empty()) throw Error(ErrorCode::kInvalidArgument, kModule, "empty factor");
    offset[b + 1] = offset[b] + static_cast<int>(product[b].size()) - 1;
  }
  const int dim = offset[nb];
  if (dim > kMaxLocal) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "product has too many dimensions");
  }

  // Facets t_k >= 0 and 1 - sum t >= 0 per factor, as forms that must be
  // non-negative.
  std::vector<Form> facets;
  for (int b = 0; b < nb; ++b) {
    const int d = offset[b + 1] - offset[b];
    if (d == 0) continue;
    for (int k = 0; k < d; ++k) {
      Form f{};
      f.a[offset[b] + k] = 1.0;
      f.b = 0.0;
      facets.push_back(f);
    }
    Form f{};
    for (int k = 0; k < d; ++k) f.a[offset[b] + k] = -1.0;
    f.b = -1.0;
    facets.push_back(f);
  }

  // Hyperplanes that cut through the interior, normalised and deduplicated.
  std::vector<Form> cuts;
  for (const ProductHyperplane& h : hyperplanes) {
    if (static_cast<int>(h.normal.size()) != nb) {
      throw Error(ErrorCode::kDimensionMismatch, kModule, "hyperplane has the wrong factor count");
    }
    Form f{};
    double rhs = h.rhs, lo = -h.rhs, hi = -h.rhs, scale = std::abs(h.rhs);
    for (int b = 0; b < nb; ++b) {
      const Point& p0 = product[b][0];
      double base = h.normal[b].dot(p0);
      rhs -= base;
      double vmin = base, vmax = base;
      for (size_t k = 1; k < product[b].size(); ++k) {
        double v = h.normal[b].dot(product[b][k]);
        vmin = std::min(vmin, v);
        vmax = std::max(vmax, v);
        f.a[offset[b] + k - 1] = v - base;
      }
      lo += vmin;
      hi += vmax;
      scale += std::max(std::abs(vmin), std::abs(vmax));
    }
    const double eps = kCutTol * (1.0 + scale);
    if (!(lo < -eps && hi > eps)) continue;
    double norm = 0.0;
    int first = -1;
    for (int k = 0; k < dim; ++k) {
      norm += f.a[k] * f.a[k];
      if (first < 0 && std::abs(f.a[k]) > 0.0) first = k;
    }
    norm = std::sqrt(norm);
    if (first < 0 || norm == 0.0) continue;
    double sign = f.a[first] < 0 ? -1.0 : 1.0;
    for (int k = 0; k < dim; ++k) f.a[k] *= sign / norm;
    f.b = rhs * sign / norm;
    bool duplicate = false;
    for (const Form& g : cuts) {
      double diff = std::abs(g.b - f.b);
      for (int k = 0; k < dim && diff <= 1e-12; ++k) diff += std::abs(g.a[k] - f.a[k]);
      if (diff <= 1e-12) {
        duplicate = true;
        break;
      }
    }
    if (!duplicate) cuts.push_back(f);
  }

  std::vector<const Form*> rows;
  for (const Form& f : facets) rows.push_back(&f);
  for (const Form& f : cuts) rows.push_back(&f);
  const int nrows = static_cast<int>(rows.size());

  std::vector<std::vector<double>> found;
  auto record = [&](const double* t) {
    for (const Form& f : facets) {
      double v = -f.b;
      for (int k = 0; k < dim; ++k) v += f.a[k] * t[k];
      if (v < -kFeasTol) return;
    }
    for (const auto& g : found) {
      double diff = 0.0;
      for (int k = 0; k < dim; ++k) diff = std::max(diff, std::abs(g[k] - t[k]));
      if (diff <= 1e-10) return;
    }
    found.emplace_back(t, t + dim);
  };

  if (dim == 0) {
    found.emplace_back();
  } else if (nrows >= dim) {
    std::vector<int> pick(dim);
    for (int k = 0; k < dim; ++k) pick[k] = k;
    std::vector<const Form*> chosen(dim);
    double t[kMaxLocal];
    for (;;) {
      for (int k = 0; k < dim; ++k) chosen[k] = rows[pick[k]];
      if (SolveSquare(chosen, dim, t)) record(t);
      int k = dim - 1;
      while (k >= 0 && pick[k] == nrows - dim + k) --k;
      if (k < 0) break;
      ++pick[k];
      for (int j = k + 1; j < dim; ++j) pick[j] = pick[j - 1] + 1;
    }
  }

  std::vector<ProductPoint> out;
  out.reserve(found.size());
  for (const auto& t : found) {
    ProductPoint p(nb);
    for (int b = 0; b < nb; ++b) {
      const int d = offset[b + 1] - offset[b];
      Barycentric lam(d + 1);
      double rest = 1.0;
      for (int k = 0; k < d; ++k) {
        lam[k + 1] = std::max(0.0, t[offset[b] + k]);
        rest -= t[offset[b] + k];
      }
      lam[0] = std::max(0.0, rest);
      lam /= lam.sum();
      p[b] = lam;
    }
    out.push_back(std::move(p));
  }
  return out;
}

Point FactorPoint(const SimplexProduct& product, const ProductPoint& p, int b) {
  Point x = Point::Zero(product[b][0].size());
  for (size_t k = 0; k < product[b].size(); ++k) x += p[b][k] * product[b][k];
  return x;
}

void VisitSimplexArrangement(const SimplicialComplex& complex, int s,
                             const std::vector<Hyperplane>& planes,
                             const std::function<void(const Point&)>& visit) {
  if (complex.is_point_set()) {
    visit(complex.vertex(complex.simplex(s)[0]));
    return;
  }
  const int d = complex.dim();
  const auto& simp = complex.simplex(s);
  const Matrix& jac = complex.BarycentricJacobian(s);
  const Point& v0 = complex.vertex(simp[0]);

  // Facets lambda_k = 0 as forms in ambient coordinates.
  std::vector<Form> forms;
  forms.reserve(d + 1 + planes.size());
  Form last{};
  last.b = 1.0;
  for (int k = 0; k < d; ++k) {
    Form f{};
    double at_v0 = 0.0;
    for (int c = 0; c < d; ++c) {
      f.a[c] = jac(k, c);
      at_v0 += jac(k, c) * v0[c];
      last.a[c] += jac(k, c);
    }
    f.b = at_v0;
    last.b += at_v0;
    forms.push_back(f);
  }
  forms.push_back(last);
  const int num_facets = static_cast<int>(forms.size());

  for (const Hyperplane& h : planes) {
    double lo = std::numeric_limits<double>::infinity(), hi = -lo, scale = std::abs(h.rhs);
    for (int v : simp) {
      double val = h.normal.dot(complex.vertex(v)) - h.rhs;
      lo = std::min(lo, val);
      hi = std::max(hi, val);
      scale = std::max(scale, std::abs(h.normal.dot(complex.vertex(v))));
    }
    const double eps = kCutTol * (1.0 + scale);
    if (!(lo < -eps && hi > eps)) continue;
    Form f{};
    for (int c = 0; c < d; ++c) f.a[c] = h.normal[c];
    f.b = h.rhs;
    forms.push_back(f);
  }

  // Vertices of the simplex need no solve.
  for (int v : simp) visit(complex.vertex(v));
  const int nrows = static_cast<int>(forms.size());
  if (nrows == num_facets) return;

  std::vector<int> pick(d);
  for (int k = 0; k < d; ++k) pick[k] = k;
  std::vector<const Form*> chosen(d);
  double t[kMaxLocal];
  Point x(d);
  Barycentric lam(d + 1);
  for (;;) {
    // Subsets made only of facets give the simplex vertices, done above.
    if (pick[d - 1] >= num_facets) {
      for (int k = 0; k < d; ++k) chosen[k] = &forms[pick[k]];
      if (SolveSquare(chosen, d, t)) {
        for (int c = 0; c < d; ++c) x[c] = t[c];
        Vector rel = jac * (x - v0);
        lam[0] = 1.0 - rel.sum();
        for (int k = 0; k < d; ++k) lam[k + 1] = rel[k];
        if (lam.minCoeff() >= -kFeasTol) {
          lam = lam.cwiseMax(0.0);
          lam /= lam.sum();
          x = complex.Reconstruct(Location{s, lam});
          visit(x);
        }
      }
    }
    int k = d - 1;
    while (k >= 0 && pick[k] == nrows - d + k) --k;
    if (k < 0) break;
    ++pick[k];
    for (int j = k + 1; j < d; ++j) pick[j] = pick[j - 1] + 1;
  }
}

}  // namespace teamsolve
