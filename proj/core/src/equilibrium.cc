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

#include "teamsolve/equilibrium.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include <Eigen/LU>
#include <glog/logging.h>

namespace teamsolve {
namespace {

constexpr char kModule[] = "equilibrium";
constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kTieTol = 1e-12;

bool LexLess(const Point& a, const Point& b) {
  for (int k = 0; k < a.size(); ++k) {
    if (a[k] < b[k]) return true;
    if (a[k] > b[k]) return false;
  }
  return false;
}

// Keeps the smallest value; near-ties go to the lexicographically smaller
// point.
struct BestPoint {
  double value = kInf;
  Point point;

  void Offer(double v, const Point& p) {
    if (v < value - kTieTol) {
      value = v;
      point = p;
    } else if (v <= value + kTieTol && LexLess(p, point)) {
      value = std::min(value, v);
      point = p;
    }
  }
};

std::vector<long long> Key(const Point& p) {
  std::vector<long long> k(p.size());
  for (int j = 0; j < p.size(); ++j) k[j] = std::llround(p[j] * 1e12);
  return k;
}

int Pick(const std::vector<std::pair<int, double>>& cumulative, Rng& rng) {
  std::uniform_real_distribution<double> u(0.0, cumulative.back().second);
  const double r = u(rng);
  auto it = std::upper_bound(cumulative.begin(), cumulative.end(), r,
                             [](double v, const std::pair<int, double>& e) { return v < e.second; });
  if (it == cumulative.end()) --it;
  return it->first;
}

bool IsZeroPoint(const Point& p) { return p.size() == 0 || p.cwiseAbs().maxCoeff() == 0.0; }

}  // namespace

QualitySelector::QualitySelector(std::shared_ptr<const Instance> instance)
    : inst_(std::move(instance)), cover_(&inst_->quality_basis.complex().coarse_cover()) {
  const CostModel& cost = *inst_->cost;
  const int n = inst_->num_categories();
  if (cost.decomposition() == Decomposition::kCpwaPieces) {
    planes_.resize(n);
    for (int i = 0; i < n; ++i) {
      for (const Breakpoint& b : cost.Breakpoints(i)) {
        if (!IsZeroPoint(b.az)) planes_[i].push_back(b);
      }
    }
  } else if (cost.decomposition() == Decomposition::kQuadratic && !cover_->is_point_set()) {
    std::set<std::vector<int>> seen;
    for (int s = 0; s < cover_->num_simplices(); ++s) {
      const auto& simp = cover_->simplex(s);
      const int m = static_cast<int>(simp.size());
      for (int mask = 1; mask < (1 << m); ++mask) {
        std::vector<int> verts;
        for (int k = 0; k < m; ++k) {
          if (mask & (1 << k)) verts.push_back(simp[k]);
        }
        std::sort(verts.begin(), verts.end());
        if (!seen.insert(verts).second) continue;
        Face f;
        f.v0 = cover_->vertex(verts[0]);
        const int k = static_cast<int>(verts.size()) - 1;
        f.d.resize(cover_->dim(), k);
        for (int j = 0; j < k; ++j) f.d.col(j) = cover_->vertex(verts[j + 1]) - f.v0;
        if (k > 0) f.gram_inverse = (f.d.transpose() * f.d).inverse();
        faces_.push_back(std::move(f));
      }
    }
  }
}

Point QualitySelector::operator()(const std::vector<Point>& xs) const {
  const CostModel& cost = *inst_->cost;
  if (static_cast<int>(xs.size()) != inst_->num_categories()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "one type per category expected");
  }
  if (cover_->is_point_set()) {
    BestPoint best;
    for (const Point& z : cover_->vertices()) {
      double v = 0.0;
      for (size_t i = 0; i < xs.size(); ++i) v += cost.Eval(static_cast<int>(i), xs[i], z);
      best.Offer(v, z);
    }
    return best.point;
  }
  switch (cost.decomposition()) {
    case Decomposition::kCpwaPieces: return SelectCpwa(xs);
    case Decomposition::kQuadratic: return SelectQuadratic(xs);
    case Decomposition::kLipschitzOnly: break;
  }
  throw Error(ErrorCode::kWrongCostModel, kModule,
              "quality selection needs a piecewise-affine or quadratic cost");
}

Point QualitySelector::SelectCpwa(const std::vector<Point>& xs) const {
  const CostModel& cost = *inst_->cost;
  std::vector<Hyperplane> planes;
  for (size_t i = 0; i < xs.size(); ++i) {
    for (const Breakpoint& b : planes_[i]) planes.push_back({b.az, b.rhs - b.ax.dot(xs[i])});
  }
  BestPoint best;
  for (int s = 0; s < cover_->num_simplices(); ++s) {
    VisitSimplexArrangement(*cover_, s, planes, [&](const Point& z) {
      double v = 0.0;
      for (size_t i = 0; i < xs.size(); ++i) v += cost.Eval(static_cast<int>(i), xs[i], z);
      best.Offer(v, z);
    });
  }
  return best.point;
}

Point QualitySelector::SelectQuadratic(const std::vector<Point>& xs) const {
  const CostModel& cost = *inst_->cost;
  double total = 0.0;
  Point mean = Point::Zero(cover_->dim());
  for (size_t i = 0; i < xs.size(); ++i) {
    double l = cost.QuadraticWeight(static_cast<int>(i));
    total += l;
    mean += l * xs[i];
  }
  mean /= total;
  if (inst_->quality_basis.complex().Contains(mean)) return mean;
  // Project the weighted mean onto Z face by face.
  BestPoint best;
  for (const Face& f : faces_) {
    Point z = f.v0;
    if (f.d.cols() > 0) {
      Vector t = f.gram_inverse * (f.d.transpose() * (mean - f.v0));
      if (t.minCoeff() < -1e-12 || t.sum() > 1.0 + 1e-12) continue;
      z = f.v0 + f.d * t;
    }
    best.Offer((z - mean).squaredNorm(), z);
  }
  return best.point;
}

TransferFunctions::TransferFunctions(std::shared_ptr<const Instance> instance,
                                     std::vector<CategorySolution> solution)
    : inst_(std::move(instance)), solution_(std::move(solution)) {
  if (static_cast<int>(solution_.size()) != inst_->num_categories()) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "one solution block per category expected");
  }
}

double TransferFunctions::Infimum(int i, const Point& z) const {
  const CostModel& cost = *inst_->cost;
  const HatBasis& xb = inst_->type_bases[i];
  const SimplicialComplex& xc = xb.complex();
  const CategorySolution& sol = solution_[i];
  double best = kInf;
  if (xc.is_point_set() || cost.decomposition() == Decomposition::kQuadratic) {
    // Affine in x on every cell, so vertices suffice.
    for (int v = 0; v < xc.num_vertices(); ++v) {
      int j = xb.IndexOfVertex(v);
      double gy = j < 0 ? 0.0 : sol.y[j];
      best = std::min(best, cost.Eval(i, xc.vertex(v), z) - gy);
    }
    return best - sol.y0;
  }
  if (cost.decomposition() != Decomposition::kCpwaPieces) {
    throw Error(ErrorCode::kWrongCostModel, kModule,
                "transfer functions need a piecewise-affine or quadratic cost");
  }
  std::vector<Hyperplane> planes;
  for (const Breakpoint& b : cost.Breakpoints(i)) {
    if (!IsZeroPoint(b.ax)) planes.push_back({b.ax, b.rhs - b.az.dot(z)});
  }
  for (int s = 0; s < xc.num_simplices(); ++s) {
    VisitSimplexArrangement(xc, s, planes, [&](const Point& x) {
      Barycentric lam = xc.BarycentricCoords(s, x);
      lam = lam.cwiseMax(0.0);
      lam /= lam.sum();
      double v = cost.Eval(i, x, z) - xb.FromLocation(Location{s, lam}).Dot(sol.y);
      best = std::min(best, v);
    });
  }
  return best - sol.y0;
}

double TransferFunctions::Eval(int i, const Point& z) const {
  if (i < 0 || i >= size()) throw Error(ErrorCode::kIndexOutOfRange, kModule, "category out of range");
  return EvalAll(z)[i];
}

std::vector<double> TransferFunctions::EvalAll(const Point& z) const {
  const int n = size();
  std::vector<double> out(n);
  double sum = 0.0;
  for (int i = 0; i + 1 < n; ++i) {
    out[i] = Infimum(i, z);
    sum += out[i];
  }
  out[n - 1] = -sum;
  return out;
}

double EpsTheo(double eps_lsip, const std::vector<double>& l1, const std::vector<double>& l2,
               const std::vector<double>& radius_x, double radius_h, int i_hat) {
  const int n = static_cast<int>(l1.size());
  if (static_cast<int>(l2.size()) != n || static_cast<int>(radius_x.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "one constant per category expected");
  }
  double eps = eps_lsip;
  double l2_sum = 0.0;
  for (int i = 0; i < n; ++i) {
    eps += l1[i] * radius_x[i];
    if (i != i_hat) l2_sum += l2[i];
  }
  return eps + l2_sum * radius_h;
}

Equilibrium::Equilibrium(std::shared_ptr<const Instance> instance, const CuttingPlaneResult& lsip,
                         const EquilibriumOptions& options)
    : inst_(std::move(instance)), options_(options) {
  auto start = std::chrono::steady_clock::now();
  const int n = inst_->num_categories();
  if (static_cast<int>(lsip.theta.size()) != n || static_cast<int>(lsip.solution.size()) != n) {
    throw Error(ErrorCode::kDimensionMismatch, kModule, "cutting-plane output has the wrong size");
  }
  report_.shift = inst_->cost->ObjectiveShift(inst_->measures);
  report_.alpha_lb = lsip.alpha_lb + report_.shift;
  report_.alpha_ub = lsip.alpha_ub + report_.shift;
  for (int i = 0; i < n; ++i) report_.nu_hat_i.push_back(lsip.theta[i].QualityMarginal());

  std::vector<int> m;
  for (const HatBasis& b : inst_->type_bases) m.push_back(b.size());
  report_.sparsity_bound = SparsityBound(m, inst_->quality_basis.size());
  ChooseCategory(lsip.theta);
  report_.nu_hat = report_.nu_hat_i[report_.i_hat];
  report_.support_size = report_.nu_hat.size();

  std::vector<double> l1, l2, rx;
  for (int i = 0; i < n; ++i) {
    l1.push_back(inst_->cost->L1(i));
    l2.push_back(inst_->cost->L2(i));
    rx.push_back(EpsilonBar(inst_->type_bases[i].complex(), 0.0));
  }
  report_.eps_theo = EpsTheo(lsip.eps_lsip, l1, l2, rx,
                             EpsilonBar(inst_->quality_basis.complex(), 0.0), report_.i_hat);

  transfers_ = std::make_unique<TransferFunctions>(inst_, lsip.solution);
  selector_ = std::make_unique<QualitySelector>(inst_);
  BuildChain(lsip.theta);
  report_.exact = EstimateExactly();
  if (!report_.exact) EstimateMonteCarlo();
  report_.eps_hat_sub = {report_.alpha_hat_ub.mean - report_.alpha_lb, report_.alpha_hat_ub.stderr};
  report_.eps_tilde_sub = {report_.alpha_tilde_ub.mean - report_.alpha_lb,
                           report_.alpha_tilde_ub.stderr};
  ComputeDiagnostics();
  for (const SamplerPtr& c : x_couplings_) {
    if (auto* semi = dynamic_cast<const SemiDiscretePlan*>(c.get())) {
      report_.transport_fallbacks += semi->fallbacks();
    }
  }
  if (report_.transport_fallbacks > 0) {
    LOG(WARNING) << report_.transport_fallbacks
                 << " conditional draws hit the rejection cap and used the best trial";
  }
  report_.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

void Equilibrium::ChooseCategory(const std::vector<DiscreteCoupling>&) {
  const int n = inst_->num_categories();
  if (options_.i_hat >= 0) {
    if (options_.i_hat >= n) throw Error(ErrorCode::kIndexOutOfRange, kModule, "i_hat out of range");
    report_.i_hat = options_.i_hat;
    return;
  }
  std::vector<int> candidates;
  for (int i = 0; i < n; ++i) {
    if (report_.nu_hat_i[i].size() <= report_.sparsity_bound) candidates.push_back(i);
  }
  if (candidates.empty()) {
    for (int i = 0; i < n; ++i) candidates.push_back(i);
  }
  Matrix w1 = Matrix::Zero(n, n);
  for (int a = 0; a < n; ++a)
    for (int b = a + 1; b < n; ++b)
      w1(a, b) = w1(b, a) = W1Discrete(report_.nu_hat_i[a], report_.nu_hat_i[b]);
  int best = candidates.front();
  for (int i : candidates) {
    if (w1.row(i).sum() < w1.row(best).sum() - 1e-15) best = i;
  }
  report_.i_hat = best;
}

void Equilibrium::BuildChain(const std::vector<DiscreteCoupling>& theta) {
  const int n = inst_->num_categories();
  z_plans_.assign(n, nullptr);
  x_marginals_.clear();
  cond_.assign(n, {});
  x_couplings_.clear();
  for (int i = 0; i < n; ++i) {
    if (i != report_.i_hat) {
      z_plans_[i] = std::make_shared<DiscretePlan>(report_.nu_hat, report_.nu_hat_i[i]);
    }
    const DiscreteMeasure& nz = report_.nu_hat_i[i];
    std::map<std::vector<long long>, int> z_index;
    for (int a = 0; a < nz.size(); ++a) z_index[Key(nz.atom(a))] = a;
    std::map<std::vector<long long>, int> x_index;
    std::vector<Point> xs;
    std::vector<double> xw;
    cond_[i].assign(nz.size(), {});
    const DiscreteCoupling& c = theta[i];
    for (int e = 0; e < c.size(); ++e) {
      auto [it, fresh] = x_index.emplace(Key(c.x[e]), static_cast<int>(xs.size()));
      if (fresh) {
        xs.push_back(c.x[e]);
        xw.push_back(0.0);
      }
      xw[it->second] += c.weight[e];
      auto& list = cond_[i][z_index.at(Key(c.z[e]))];
      double prev = list.empty() ? 0.0 : list.back().second;
      list.push_back({it->second, prev + c.weight[e]});
    }
    x_marginals_.emplace_back(xs, xw);
    Rng rng = MakeRng(options_.seed, 1000 + i);
    x_couplings_.push_back(MakeCoupling(x_marginals_.back(), inst_->measures[i],
                                        options_.transport, rng));
    report_.transport_w1.push_back(x_couplings_.back()->w1());
    auto* semi = dynamic_cast<const SemiDiscretePlan*>(x_couplings_.back().get());
    report_.transport_mass_error.push_back(semi ? semi->mass_error() : 0.0);
  }
}

EquilibriumDraw Equilibrium::Sample(Rng& rng) const {
  const int n = inst_->num_categories();
  EquilibriumDraw d;
  d.z_atom = report_.nu_hat.SampleIndex(rng);
  d.z = report_.nu_hat.atom(d.z_atom);
  d.xbar.resize(n);
  for (int i = 0; i < n; ++i) {
    int zi = i == report_.i_hat ? d.z_atom : z_plans_[i]->SampleTargetIndex(d.z_atom, rng);
    int xi = Pick(cond_[i][zi], rng);
    d.xbar[i] = x_couplings_[i]->SampleTarget(xi, rng);
  }
  d.zbar = (*selector_)(d.xbar);
  return d;
}

bool Equilibrium::EstimateExactly() {
  const int n = inst_->num_categories();
  const DiscreteMeasure& nu = report_.nu_hat;
  // q[i][a]: law of Xbar_i given Z = atom a, as (type atom, probability).
  std::vector<std::vector<std::vector<std::pair<int, double>>>> q(n);
  for (int i = 0; i < n; ++i) {
    auto* xplan = dynamic_cast<const DiscretePlan*>(x_couplings_[i].get());
    if (!inst_->measures[i].is_discrete() || xplan == nullptr) return false;
    const Matrix& xp = xplan->plan();
    q[i].resize(nu.size());
    for (int a = 0; a < nu.size(); ++a) {
      std::map<int, double> law;
      const int nzi = report_.nu_hat_i[i].size();
      for (int zi = 0; zi < nzi; ++zi) {
        double pz = i == report_.i_hat ? (zi == a ? 1.0 : 0.0)
                                       : z_plans_[i]->plan()(a, zi) / nu.weight(a);
        if (pz <= 0.0 || cond_[i][zi].empty()) continue;
        const auto& list = cond_[i][zi];
        const double total = list.back().second;
        double prev = 0.0;
        for (const auto& [xi, cum] : list) {
          double px = (cum - prev) / total;
          prev = cum;
          const double row = xp.row(xi).sum();
          for (int b = 0; b < xp.cols(); ++b) {
            if (xp(xi, b) > 0.0) law[b] += pz * px * xp(xi, b) / row;
          }
        }
      }
      for (const auto& [b, p] : law) {
        if (p > 1e-15) q[i][a].push_back({b, p});
      }
    }
  }
  double combos = 0.0;
  for (int a = 0; a < nu.size(); ++a) {
    double c = 1.0;
    for (int i = 0; i < n; ++i) c *= static_cast<double>(q[i][a].size());
    combos += c;
  }
  if (combos > static_cast<double>(options_.exact_limit)) return false;

  double hat = 0.0, tilde = 0.0;
  std::vector<int> pos(n);
  std::vector<Point> xs(n);
  for (int a = 0; a < nu.size(); ++a) {
    const Point& z = nu.atom(a);
    for (int i = 0; i < n; ++i) {
      for (const auto& [b, p] : q[i][a]) {
        hat += nu.weight(a) * p * inst_->cost->Eval(i, inst_->measures[i].discrete().atom(b), z);
      }
    }
    std::fill(pos.begin(), pos.end(), 0);
    for (;;) {
      double p = nu.weight(a);
      for (int i = 0; i < n; ++i) {
        p *= q[i][a][pos[i]].second;
        xs[i] = inst_->measures[i].discrete().atom(q[i][a][pos[i]].first);
      }
      Point zbar = (*selector_)(xs);
      for (int i = 0; i < n; ++i) tilde += p * inst_->cost->Eval(i, xs[i], zbar);
      int i = 0;
      while (i < n && ++pos[i] == static_cast<int>(q[i][a].size())) pos[i++] = 0;
      if (i == n) break;
    }
  }
  report_.alpha_hat_ub = {hat + report_.shift, 0.0};
  report_.alpha_tilde_ub = {tilde + report_.shift, 0.0};
  exact_law_ = std::move(q);
  return true;
}

void Equilibrium::EstimateMonteCarlo() {
  const int n = inst_->num_categories();
  const int reps = std::max(1, options_.repetitions);
  const long samples = std::max(1L, options_.samples);
  std::vector<double> hat(reps), tilde(reps), hat_sq(reps), tilde_sq(reps);
  ParallelFor(reps, options_.threads, [&](int r) {
    Rng rng = MakeRng(options_.seed, 1 + r);
    double h = 0.0, t = 0.0, h2 = 0.0, t2 = 0.0;
    for (long s = 0; s < samples; ++s) {
      EquilibriumDraw d = Sample(rng);
      double vh = 0.0, vt = 0.0;
      for (int i = 0; i < n; ++i) {
        vh += inst_->cost->Eval(i, d.xbar[i], d.z);
        vt += inst_->cost->Eval(i, d.xbar[i], d.zbar);
      }
      h += vh;
      t += vt;
      h2 += vh * vh;
      t2 += vt * vt;
    }
    hat[r] = h / samples;
    tilde[r] = t / samples;
    hat_sq[r] = h2 / samples;
    tilde_sq[r] = t2 / samples;
  });
  auto summarise = [&](const std::vector<double>& means, const std::vector<double>& squares) {
    McEstimate e;
    for (double v : means) e.mean += v;
    e.mean /= reps;
    if (reps >= 2) {
      double var = 0.0;
      for (double v : means) var += (v - e.mean) * (v - e.mean);
      e.stderr = std::sqrt(var / (reps - 1) / reps);
    } else {
      double var = std::max(0.0, squares[0] - means[0] * means[0]);
      e.stderr = std::sqrt(var / samples);
    }
    e.mean += report_.shift;
    return e;
  };
  report_.alpha_hat_ub = summarise(hat, hat_sq);
  report_.alpha_tilde_ub = summarise(tilde, tilde_sq);
}

void Equilibrium::ComputeDiagnostics() {
  const int n = inst_->num_categories();
  const DiscreteMeasure& nu = report_.nu_hat;
  std::vector<Point> grid = TestGrid(inst_->quality_basis.complex(), options_.diagnostic_grid);
  for (const Point& z : nu.atoms()) grid.push_back(z);
  std::vector<std::vector<double>> phi_grid;
  double me2 = 0.0;
  for (const Point& z : grid) {
    std::vector<double> v = transfers_->EvalAll(z);
    double s = 0.0;
    for (double x : v) s += x;
    me2 = std::max(me2, std::abs(s));
    phi_grid.push_back(std::move(v));
  }
  report_.diagnostics.me2 = me2;
  const size_t first_atom = grid.size() - nu.size();

  auto c_transform = [&](int i, const Point& x) {
    double best = kInf;
    for (size_t g = 0; g < grid.size(); ++g) {
      best = std::min(best, inst_->cost->Eval(i, x, grid[g]) - phi_grid[g][i]);
    }
    return best;
  };

  // Weighted draws (z atom, xbar per category).
  struct Item {
    int a;
    std::vector<Point> xbar;
    double weight;
  };
  std::vector<std::vector<std::pair<Point, double>>> xbar_by_cat(n);
  std::vector<std::vector<int>> atom_by_cat(n);
  if (report_.exact) {
    for (int i = 0; i < n; ++i) {
      for (int a = 0; a < nu.size(); ++a) {
        for (const auto& [b, p] : exact_law_[i][a]) {
          xbar_by_cat[i].push_back({inst_->measures[i].discrete().atom(b), nu.weight(a) * p});
          atom_by_cat[i].push_back(a);
        }
      }
    }
  } else {
    Rng rng = MakeRng(options_.seed, 999999);
    const int draws = std::max(1, options_.diagnostic_samples);
    for (int s = 0; s < draws; ++s) {
      EquilibriumDraw d = Sample(rng);
      for (int i = 0; i < n; ++i) {
        xbar_by_cat[i].push_back({d.xbar[i], 1.0 / draws});
        atom_by_cat[i].push_back(d.z_atom);
      }
    }
  }
  report_.diagnostics.me1.assign(n, 0.0);
  report_.diagnostics.me3.assign(n, 0.0);
  const Point mu_z = [&] {
    Point m = Point::Zero(nu.dim());
    for (int a = 0; a < nu.size(); ++a) m += nu.weight(a) * nu.atom(a);
    return m;
  }();
  for (int i = 0; i < n; ++i) {
    Point mx = Point::Zero(inst_->measures[i].dim());
    Point mz = Point::Zero(nu.dim());
    double gap = 0.0;
    for (size_t e = 0; e < xbar_by_cat[i].size(); ++e) {
      const auto& [x, w] = xbar_by_cat[i][e];
      const int a = atom_by_cat[i][e];
      mx += w * x;
      mz += w * nu.atom(a);
      gap += w * (inst_->cost->Eval(i, x, nu.atom(a)) - phi_grid[first_atom + a][i] -
                  c_transform(i, x));
    }
    report_.diagnostics.me1[i] =
        std::max((mx - inst_->measures[i].Mean()).cwiseAbs().maxCoeff(),
                 (mz - mu_z).cwiseAbs().maxCoeff());
    report_.diagnostics.me3[i] = gap;
  }
}

std::vector<Point> Equilibrium::TestGrid(const SimplicialComplex& z, int approx_points) {
  std::vector<Point> out = z.vertices();
  if (z.is_point_set()) return out;
  const int d = z.dim();
  const int per_axis =
      std::max(2, static_cast<int>(std::ceil(std::pow(std::max(1, approx_points), 1.0 / d))));
  Box box = z.BoundingBox();
  std::vector<int> idx(d, 0);
  for (;;) {
    Point p(d);
    for (int k = 0; k < d; ++k) {
      p[k] = box.lower[k] + (box.upper[k] - box.lower[k]) * idx[k] / (per_axis - 1);
    }
    if (z.Contains(p)) out.push_back(p);
    int k = 0;
    while (k < d && ++idx[k] == per_axis) idx[k++] = 0;
    if (k == d) break;
  }
  return out;
}

void WriteMeasureCsv(std::ostream& out, const DiscreteMeasure& m) {
  for (int k = 0; k < m.dim(); ++k) out << "z_" << k << ',';
  out << "weight\n";
  for (int a = 0; a < m.size(); ++a) {
    for (int k = 0; k < m.dim(); ++k) out << FormatDouble(m.atom(a)[k]) << ',';
    out << FormatDouble(m.weight(a)) << '\n';
  }
}

}  // namespace teamsolve
