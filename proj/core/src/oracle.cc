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

#include "teamsolve/oracle.h"

#include <algorithm>
#include <cmath>
#include <limits>
#include <functional>
#include <map>

#include <Eigen/LU>

#include <glog/logging.h>

#include "teamsolve/arrangement.h"

namespace teamsolve {
namespace {

constexpr char kModule[] = "oracle";
constexpr double kInf = std::numeric_limits<double>::infinity();

SparseHat HatAt(const HatBasis& basis, int simplex, const Barycentric& lam) {
  return basis.FromLocation(Location{simplex, lam});
}

// Coefficients of `coeffs` at the vertices of simplex s (zero for the
// excluded vertex).
void GatherVertexValues(const HatBasis& basis, int s, const Vector& coeffs, double* out) {
  const auto& simp = basis.complex().simplex(s);
  for (size_t k = 0; k < simp.size(); ++k) {
    int j = basis.IndexOfVertex(simp[k]);
    out[k] = j < 0 ? 0.0 : coeffs[j];
  }
}

void CheckInputs(const Instance& inst, int i, const Vector& y, const Vector& w) {
  if (i < 0 || i >= inst.num_categories()) {
    throw Error(ErrorCode::kIndexOutOfRange, kModule, "category out of range");
  }
  if (y.size() != inst.type_bases[i].size() || w.size() != inst.quality_basis.size()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "coefficient vectors have the wrong size");
  }
}

// Per-cell minima, reduced to the best entries within the margin.
struct CellMin {
  double value;
  int cell;
  int item;
};

std::vector<CellMin> SelectPool(std::vector<CellMin> minima, const OracleOptions& options) {
  std::sort(minima.begin(), minima.end(), [](const CellMin& a, const CellMin& b) {
    return a.value < b.value || (a.value == b.value && a.cell < b.cell);
  });
  std::vector<CellMin> out;
  if (minima.empty()) return out;
  const double limit = minima.front().value + options.pool_margin;
  for (const CellMin& m : minima) {
    if (static_cast<int>(out.size()) >= std::max(1, options.pool_cap)) break;
    if (!out.empty() && m.value > limit) break;
    out.push_back(m);
  }
  return out;
}

OracleResult Finish(std::vector<Cut> pool, double best, double lower) {
  OracleResult r;
  r.x = pool.front().x;
  r.z = pool.front().z;
  r.g_at_x = pool.front().g;
  r.h_at_z = pool.front().h;
  r.beta_tilde = best;
  r.beta_lower = lower;
  r.pool = std::move(pool);
  return r;
}

class CellCpwaOracle : public Oracle {
 public:
  CellCpwaOracle(InstancePtr inst, OracleOptions options)
      : inst_(std::move(inst)), options_(options) {
    if (inst_->cost->decomposition() != Decomposition::kCpwaPieces) {
      throw Error(ErrorCode::kMissingDecomposition, kModule,
                  inst_->cost->family() + " cost has no piecewise-affine decomposition");
    }
    const int n = inst_->num_categories();
    categories_.resize(n);
    ParallelFor(n, DefaultThreadCount(), [&](int i) { Precompute(i); });
    size_t total = 0;
    for (const auto& c : categories_) total += c.data.size() / c.stride;
    VLOG(1) << "cell_cpwa oracle: " << total << " arrangement vertices";
  }

  std::string name() const override { return "cell_cpwa"; }

  OracleResult Solve(int i, const Vector& y, const Vector& w, double) const override {
    CheckInputs(*inst_, i, y, w);
    const Category& cat = categories_[i];
    const HatBasis& xb = inst_->type_bases[i];
    const HatBasis& zb = inst_->quality_basis;
    const int nx = cat.nx, nz = cat.nz;
    std::vector<CellMin> minima;
    minima.reserve(cat.pairs.size());
    double yv[kMaxDim + 1], wv[kMaxDim + 1];
    for (size_t p = 0; p < cat.pairs.size(); ++p) {
      const Pair& pair = cat.pairs[p];
      if (pair.begin == pair.end) continue;
      GatherVertexValues(xb, pair.sx, y, yv);
      GatherVertexValues(zb, pair.sz, w, wv);
      double best = kInf;
      int arg = -1;
      for (int c = pair.begin; c < pair.end; ++c) {
        const double* rec = &cat.data[static_cast<size_t>(c) * cat.stride];
        double f = rec[0];
        for (int k = 0; k < nx; ++k) f -= rec[1 + k] * yv[k];
        for (int k = 0; k < nz; ++k) f -= rec[1 + nx + k] * wv[k];
        if (f < best) {
          best = f;
          arg = c;
        }
      }
      minima.push_back({best, static_cast<int>(p), arg});
    }
    if (minima.empty()) throw Error(ErrorCode::kInvalidArgument, kModule, "empty search space");
    std::vector<Cut> pool;
    for (const CellMin& m : SelectPool(std::move(minima), options_)) {
      const Pair& pair = cat.pairs[m.cell];
      const double* rec = &cat.data[static_cast<size_t>(m.item) * cat.stride];
      Barycentric lx = Eigen::Map<const Vector>(rec + 1, nx);
      Barycentric lz = Eigen::Map<const Vector>(rec + 1 + nx, nz);
      Cut cut;
      cut.x = xb.complex().Reconstruct(Location{pair.sx, lx});
      cut.z = zb.complex().Reconstruct(Location{pair.sz, lz});
      cut.g = HatAt(xb, pair.sx, lx);
      cut.h = HatAt(zb, pair.sz, lz);
      cut.cost = rec[0];
      pool.push_back(std::move(cut));
    }
    double best = ViolationObjective(*inst_, i, pool.front().x, pool.front().z, y, w);
    return Finish(std::move(pool), best, best);
  }

 private:
  struct Pair {
    int sx, sz;
    int begin, end;
  };
  // Candidate records: cost, barycentric x (nx entries), barycentric z.
  struct Category {
    int nx = 0, nz = 0, stride = 1;
    std::vector<Pair> pairs;
    std::vector<double> data;
  };

  void Precompute(int i) {
    const SimplicialComplex& xc = inst_->type_bases[i].complex();
    const SimplicialComplex& zc = inst_->quality_basis.complex();
    Category& cat = categories_[i];
    cat.nx = xc.simplex_dim() + 1;
    cat.nz = zc.simplex_dim() + 1;
    cat.stride = 1 + cat.nx + cat.nz;
    std::vector<ProductHyperplane> planes;
    for (const Breakpoint& b : inst_->cost->Breakpoints(i)) {
      if (b.ax.size() != xc.dim() || b.az.size() != zc.dim()) {
        throw Error(ErrorCode::kDimensionMismatch, kModule,
                    "cost breakpoints do not match the space dimensions");
      }
      planes.push_back({{b.ax, b.az}, b.rhs});
    }
    int count = 0;
    for (int sx = 0; sx < xc.num_simplices(); ++sx) {
      for (int sz = 0; sz < zc.num_simplices(); ++sz) {
        SimplexProduct prod(2);
        for (int v : xc.simplex(sx)) prod[0].push_back(xc.vertex(v));
        for (int v : zc.simplex(sz)) prod[1].push_back(zc.vertex(v));
        Pair pair{sx, sz, count, count};
        for (const ProductPoint& p : ArrangementVertices(prod, planes)) {
          Point x = FactorPoint(prod, p, 0), z = FactorPoint(prod, p, 1);
          cat.data.push_back(inst_->cost->Eval(i, x, z));
          for (int k = 0; k < cat.nx; ++k) cat.data.push_back(p[0][k]);
          for (int k = 0; k < cat.nz; ++k) cat.data.push_back(p[1][k]);
          ++count;
        }
        pair.end = count;
        cat.pairs.push_back(pair);
      }
    }
  }

  InstancePtr inst_;
  OracleOptions options_;
  std::vector<Category> categories_;
};

class QuadraticOracle : public Oracle {
 public:
  QuadraticOracle(InstancePtr inst, OracleOptions options)
      : inst_(std::move(inst)), options_(options) {
    if (inst_->cost->decomposition() != Decomposition::kQuadratic) {
      throw Error(ErrorCode::kWrongCostModel, kModule,
                  "quadratic oracle needs the barycenter cost, got " + inst_->cost->family());
    }
    const SimplicialComplex& zc = inst_->quality_basis.complex();
    std::map<std::vector<int>, bool> seen;
    for (int s = 0; s < zc.num_simplices(); ++s) {
      const auto& simp = zc.simplex(s);
      const int n = static_cast<int>(simp.size());
      for (int mask = 1; mask < (1 << n); ++mask) {
        std::vector<int> verts;
        for (int k = 0; k < n; ++k) {
          if (mask & (1 << k)) verts.push_back(simp[k]);
        }
        std::sort(verts.begin(), verts.end());
        if (!seen.emplace(verts, true).second) continue;
        Face f;
        f.verts = verts;
        f.v0 = zc.vertex(verts[0]);
        const int k = static_cast<int>(verts.size()) - 1;
        f.d.resize(zc.dim(), k);
        for (int j = 0; j < k; ++j) f.d.col(j) = zc.vertex(verts[j + 1]) - f.v0;
        if (k > 0) f.gram_inverse = (f.d.transpose() * f.d).inverse();
        for (int v : verts) f.hat_index.push_back(inst_->quality_basis.IndexOfVertex(v));
        faces_.push_back(std::move(f));
      }
    }
  }

  std::string name() const override { return "quadratic"; }

  OracleResult Solve(int i, const Vector& y, const Vector& w, double) const override {
    CheckInputs(*inst_, i, y, w);
    const double lambda = inst_->cost->QuadraticWeight(i);
    const HatBasis& xb = inst_->type_bases[i];
    const SimplicialComplex& xc = xb.complex();
    std::vector<CellMin> minima;
    std::vector<Point> best_z(xc.num_vertices());
    for (int v = 0; v < xc.num_vertices(); ++v) {
      const Point& x = xc.vertex(v);
      const int jx = xb.IndexOfVertex(v);
      const double yv = jx < 0 ? 0.0 : y[jx];
      double best = kInf;
      for (const Face& f : faces_) {
        double value;
        Point z;
        if (!Evaluate(f, x, lambda, w, &z, &value)) continue;
        value -= yv;
        if (value < best) {
          best = value;
          best_z[v] = z;
        }
      }
      minima.push_back({best, v, 0});
    }
    std::vector<Cut> pool;
    for (const CellMin& m : SelectPool(std::move(minima), options_)) {
      Cut cut;
      cut.x = xc.vertex(m.cell);
      cut.z = best_z[m.cell];
      cut.g = xb.AtVertex(m.cell);
      cut.h = inst_->quality_basis.EvalSparse(cut.z);
      cut.cost = inst_->cost->Eval(i, cut.x, cut.z);
      pool.push_back(std::move(cut));
    }
    double best = ViolationObjective(*inst_, i, pool.front().x, pool.front().z, y, w);
    return Finish(std::move(pool), best, best);
  }

 private:
  struct Face {
    std::vector<int> verts;
    Point v0;
    Matrix d;
    Matrix gram_inverse;
    std::vector<int> hat_index;
  };

  // Minimiser of lambda |z|^2 - 2 lambda <x, z> - <h(z), w> on the affine
  // hull of the face, if it lies in the closed face.
  bool Evaluate(const Face& f, const Point& x, double lambda, const Vector& w, Point* z,
                double* value) const {
    const int k = static_cast<int>(f.verts.size()) - 1;
    const double w0 = f.hat_index[0] < 0 ? 0.0 : w[f.hat_index[0]];
    double hw = w0;
    Point zz = f.v0;
    if (k > 0) {
      Vector rhs = f.d.transpose() * (x - f.v0);
      for (int j = 0; j < k; ++j) {
        double wj = f.hat_index[j + 1] < 0 ? 0.0 : w[f.hat_index[j + 1]];
        rhs[j] += (wj - w0) / (2.0 * lambda);
      }
      Vector t = f.gram_inverse * rhs;
      if (t.minCoeff() < -1e-12 || t.sum() > 1.0 + 1e-12) return false;
      zz = f.v0 + f.d * t;
      for (int j = 0; j < k; ++j) {
        double wj = f.hat_index[j + 1] < 0 ? 0.0 : w[f.hat_index[j + 1]];
        hw += t[j] * (wj - w0);
      }
    }
    *z = zz;
    *value = lambda * (zz.squaredNorm() - 2.0 * x.dot(zz)) - hw;
    return true;
  }

  InstancePtr inst_;
  OracleOptions options_;
  std::vector<Face> faces_;
};

// All barycentric vectors with entries in {0, 1/r, ..., 1}.
std::vector<Barycentric> Lattice(int d, int r) {
  std::vector<Barycentric> out;
  if (d == 0) {
    out.push_back(Barycentric::Ones(1));
    return out;
  }
  std::vector<int> parts(d + 1, 0);
  // Enumerate compositions of r into d+1 parts.
  std::function<void(int, int)> rec = [&](int k, int left) {
    if (k == d) {
      parts[d] = left;
      Barycentric lam(d + 1);
      for (int j = 0; j <= d; ++j) lam[j] = static_cast<double>(parts[j]) / r;
      out.push_back(lam);
      return;
    }
    for (int a = 0; a <= left; ++a) {
      parts[k] = a;
      rec(k + 1, left - a);
    }
  };
  rec(0, r);
  return out;
}

long LatticeSize(int d, long r) {
  // C(r + d, d)
  double s = 1.0;
  for (int j = 1; j <= d; ++j) s = s * static_cast<double>(r + j) / j;
  return s > 4e18 ? std::numeric_limits<long>::max() : static_cast<long>(s + 0.5);
}

class LipschitzGridOracle : public Oracle {
 public:
  LipschitzGridOracle(InstancePtr inst, OracleOptions options)
      : inst_(std::move(inst)), options_(options) {}

  std::string name() const override { return "lipschitz_grid"; }

  OracleResult Solve(int i, const Vector& y, const Vector& w, double tau) const override {
    CheckInputs(*inst_, i, y, w);
    if (!(tau > 0.0)) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "the grid oracle cannot certify tau = 0; use an exact oracle");
    }
    const HatBasis& xb = inst_->type_bases[i];
    const HatBasis& zb = inst_->quality_basis;
    const SimplicialComplex& xc = xb.complex();
    const SimplicialComplex& zc = zb.complex();
    const double l1 = inst_->cost->L1(i), l2 = inst_->cost->L2(i);

    // Resolution per simplex so that each factor contributes at most tau/2.
    auto resolution = [&](const SimplicialComplex& c, const HatBasis& b, int s,
                          const Vector& coeffs, double l) -> int {
      if (c.is_point_set()) return 1;
      double slope = l + b.GradientNorm(s, coeffs);
      double r = std::ceil(2.0 * slope * c.Diameter(s) / tau);
      if (r > 1e6) throw Error(ErrorCode::kInvalidArgument, kModule, "tau too small for the grid");
      return std::max(1, static_cast<int>(r));
    };
    std::vector<int> rx(xc.num_simplices()), rz(zc.num_simplices());
    long total_x = 0, total_z = 0;
    for (int s = 0; s < xc.num_simplices(); ++s) {
      rx[s] = resolution(xc, xb, s, y, l1);
      total_x += LatticeSize(xc.simplex_dim(), rx[s]);
    }
    for (int s = 0; s < zc.num_simplices(); ++s) {
      rz[s] = resolution(zc, zb, s, w, l2);
      total_z += LatticeSize(zc.simplex_dim(), rz[s]);
    }
    if (static_cast<double>(total_x) * static_cast<double>(total_z) >
        static_cast<double>(options_.max_grid_points)) {
      throw Error(ErrorCode::kInvalidArgument, kModule,
                  "grid would need " + FormatDouble(static_cast<double>(total_x) * total_z) +
                      " evaluations; raise tau or use an exact oracle");
    }
    struct Node {
      int simplex;
      Barycentric lam;
      Point p;
      double lin;  // <g, y> or <h, w>
    };
    auto nodes = [&](const SimplicialComplex& c, const HatBasis& b, const std::vector<int>& r,
                     const Vector& coeffs) {
      std::vector<Node> out;
      std::map<int, std::vector<Barycentric>> cache;
      for (int s = 0; s < c.num_simplices(); ++s) {
        auto it = cache.find(r[s]);
        if (it == cache.end()) it = cache.emplace(r[s], Lattice(c.simplex_dim(), r[s])).first;
        for (const Barycentric& lam : it->second) {
          Location loc{s, lam};
          out.push_back({s, lam, c.Reconstruct(loc), b.FromLocation(loc).Dot(coeffs)});
        }
      }
      return out;
    };
    std::vector<Node> xs = nodes(xc, xb, rx, y);
    std::vector<Node> zs = nodes(zc, zb, rz, w);
    // Minimum per (x simplex, z simplex) pair.
    const int nzs = zc.num_simplices();
    std::vector<CellMin> minima(static_cast<size_t>(xc.num_simplices()) * nzs,
                                CellMin{kInf, -1, -1});
    for (size_t a = 0; a < xs.size(); ++a) {
      for (size_t b = 0; b < zs.size(); ++b) {
        double f = inst_->cost->Eval(i, xs[a].p, zs[b].p) - xs[a].lin - zs[b].lin;
        CellMin& m = minima[static_cast<size_t>(xs[a].simplex) * nzs + zs[b].simplex];
        if (f < m.value) {
          m.value = f;
          m.cell = static_cast<int>(a);
          m.item = static_cast<int>(b);
        }
      }
    }
    minima.erase(std::remove_if(minima.begin(), minima.end(),
                                [](const CellMin& m) { return m.cell < 0; }),
                 minima.end());
    std::vector<Cut> pool;
    for (const CellMin& m : SelectPool(std::move(minima), options_)) {
      const Node& nx = xs[m.cell];
      const Node& nz = zs[m.item];
      Cut cut;
      cut.x = nx.p;
      cut.z = nz.p;
      cut.g = xb.FromLocation(Location{nx.simplex, nx.lam});
      cut.h = zb.FromLocation(Location{nz.simplex, nz.lam});
      cut.cost = inst_->cost->Eval(i, cut.x, cut.z);
      pool.push_back(std::move(cut));
    }
    double best = ViolationObjective(*inst_, i, pool.front().x, pool.front().z, y, w);
    return Finish(std::move(pool), best, best - tau);
  }

 private:
  InstancePtr inst_;
  OracleOptions options_;
};

}  // namespace

std::unique_ptr<Oracle> MakeCellCpwaOracle(InstancePtr instance, OracleOptions options) {
  return std::make_unique<CellCpwaOracle>(std::move(instance), options);
}

std::unique_ptr<Oracle> MakeQuadraticOracle(InstancePtr instance, OracleOptions options) {
  return std::make_unique<QuadraticOracle>(std::move(instance), options);
}

std::unique_ptr<Oracle> MakeLipschitzGridOracle(InstancePtr instance, OracleOptions options) {
  return std::make_unique<LipschitzGridOracle>(std::move(instance), options);
}

std::unique_ptr<Oracle> MakeOracle(const std::string& name, InstancePtr instance,
                                   OracleOptions options) {
  if (name == "cell_cpwa") return MakeCellCpwaOracle(std::move(instance), options);
  if (name == "quadratic") return MakeQuadraticOracle(std::move(instance), options);
  if (name == "lipschitz_grid") return MakeLipschitzGridOracle(std::move(instance), options);
  if (name == "auto") {
    switch (instance->cost->decomposition()) {
      case Decomposition::kCpwaPieces: return MakeCellCpwaOracle(std::move(instance), options);
      case Decomposition::kQuadratic: return MakeQuadraticOracle(std::move(instance), options);
      case Decomposition::kLipschitzOnly:
        return MakeLipschitzGridOracle(std::move(instance), options);
    }
  }
  throw Error(ErrorCode::kInvalidArgument, kModule, "unknown oracle '" + name + "'");
}

double ViolationObjective(const Instance& instance, int i, const Point& x, const Point& z,
                          const Vector& y, const Vector& w) {
  return instance.cost->Eval(i, x, z) - instance.type_bases[i].EvalSparse(x).Dot(y) -
         instance.quality_basis.EvalSparse(z).Dot(w);
}

Vector Densify(const SparseHat& h, int size) {
  Vector v = Vector::Zero(size);
  for (int k = 0; k < h.count; ++k) v[h.entries[k].index] += h.entries[k].value;
  return v;
}

}  // namespace teamsolve
