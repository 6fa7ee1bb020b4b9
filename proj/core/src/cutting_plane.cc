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

#include "teamsolve/cutting_plane.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <map>
#include <ostream>
#include <set>

#include <glog/logging.h>

namespace teamsolve {
namespace {

constexpr char kModule[] = "cutting_plane";

using Clock = std::chrono::steady_clock;

double Seconds(Clock::time_point since) {
  return std::chrono::duration<double>(Clock::now() - since).count();
}

// Rounded coordinates used to recognise repeated support points.
std::vector<long long> PointKey(const Point& x, const Point& z) {
  std::vector<long long> key;
  key.reserve(x.size() + z.size());
  for (int k = 0; k < x.size(); ++k) key.push_back(std::llround(x[k] * 1e12));
  for (int k = 0; k < z.size(); ++k) key.push_back(std::llround(z[k] * 1e12));
  return key;
}

struct Layout {
  std::vector<int> offset;  // index of y0 for each category
  int k = 0;
  int total = 0;

  int y0(int i) const { return offset[i]; }
  int y(int i, int j) const { return offset[i] + 1 + j; }
  int w(int i, int j, int m) const { return offset[i] + 1 + m + j; }
};

struct RowPoint {
  int category;
  Point x;
  Point z;
};

class Relaxation {
 public:
  explicit Relaxation(const Instance& inst) : inst_(inst), problem_(Size(inst)) {
    const int n = inst.num_categories();
    layout_.k = inst.quality_basis.size();
    int at = 0;
    for (int i = 0; i < n; ++i) {
      layout_.offset.push_back(at);
      at += 1 + inst.type_bases[i].size() + layout_.k;
    }
    layout_.total = at;
    keys_.resize(n);
    for (int i = 0; i < n; ++i) {
      problem_.SetObjective(layout_.y0(i), 1.0);
      const Vector& gbar = inst.moments[i];
      for (int j = 0; j < gbar.size(); ++j) problem_.SetObjective(layout_.y(i, j), gbar[j]);
    }
    for (int j = 0; j < layout_.k; ++j) {
      SparseTerms terms;
      for (int i = 0; i < n; ++i) terms.push_back({layout_.w(i, j, M(i)), 1.0});
      problem_.AddEqual(terms, 0.0);
    }
  }

  // Adds the constraint for (x, z) unless an equal point is present.
  bool Add(int i, const Cut& cut) {
    if (!keys_[i].insert(PointKey(cut.x, cut.z)).second) return false;
    SparseTerms terms{{layout_.y0(i), 1.0}};
    for (int e = 0; e < cut.g.count; ++e) {
      terms.push_back({layout_.y(i, cut.g.entries[e].index), cut.g.entries[e].value});
    }
    for (int e = 0; e < cut.h.count; ++e) {
      terms.push_back({layout_.w(i, cut.h.entries[e].index, M(i)), cut.h.entries[e].value});
    }
    problem_.AddLessEqual(terms, cut.cost);
    rows_.push_back({i, cut.x, cut.z});
    return true;
  }

  void Extract(const Vector& primal, std::vector<CategorySolution>* out) const {
    out->resize(inst_.num_categories());
    for (int i = 0; i < inst_.num_categories(); ++i) {
      CategorySolution& s = (*out)[i];
      s.y0 = primal[layout_.y0(i)];
      s.y = primal.segment(layout_.y(i, 0), M(i));
      s.w = primal.segment(layout_.w(i, 0, M(i)), layout_.k);
    }
  }

  const LpProblem& problem() const { return problem_; }
  const std::vector<RowPoint>& rows() const { return rows_; }

 private:
  static int Size(const Instance& inst) {
    int total = 0;
    for (const HatBasis& b : inst.type_bases) total += 1 + b.size() + inst.quality_basis.size();
    return total;
  }
  int M(int i) const { return inst_.type_bases[i].size(); }

  const Instance& inst_;
  LpProblem problem_;
  Layout layout_;
  std::vector<std::set<std::vector<long long>>> keys_;
  std::vector<RowPoint> rows_;
};

Cut VertexCut(const Instance& inst, int i, int vx, int vz) {
  const HatBasis& xb = inst.type_bases[i];
  const HatBasis& zb = inst.quality_basis;
  Cut c;
  c.x = xb.complex().vertex(vx);
  c.z = zb.complex().vertex(vz);
  c.g = xb.AtVertex(vx);
  c.h = zb.AtVertex(vz);
  c.cost = inst.cost->Eval(i, c.x, c.z);
  return c;
}

// Basic optimal solution of
//   min sum_j t_j c(x_j, z_j)  s.t.  sum_j t_j (1, g(x_j), h(z_j)) = current moments,
// posed as the dual of an LP with one inequality per support point.
void Purify(const Instance& inst, int i, DiscreteCoupling* c, const LpOptions& options) {
  const HatBasis& xb = inst.type_bases[i];
  const HatBasis& zb = inst.quality_basis;
  const int m = xb.size(), k = zb.size();
  const int n = 1 + m + k;
  if (c->size() <= n) return;
  Vector target = Vector::Zero(n);
  std::vector<SparseTerms> cols;
  std::vector<double> cost;
  for (int a = 0; a < c->size(); ++a) {
    SparseTerms terms{{0, 1.0}};
    SparseHat g = xb.EvalSparse(c->x[a]);
    SparseHat h = zb.EvalSparse(c->z[a]);
    for (int e = 0; e < g.count; ++e) terms.push_back({1 + g.entries[e].index, g.entries[e].value});
    for (int e = 0; e < h.count; ++e) terms.push_back({1 + m + h.entries[e].index, h.entries[e].value});
    for (const auto& [j, v] : terms) target[j] += c->weight[a] * v;
    cols.push_back(std::move(terms));
    cost.push_back(inst.cost->Eval(i, c->x[a], c->z[a]));
  }
  LpProblem lp(n);
  for (int j = 0; j < n; ++j) lp.SetObjective(j, target[j]);
  for (int a = 0; a < c->size(); ++a) lp.AddLessEqual(cols[a], cost[a]);
  LpSolution sol = LpSolver(options).Solve(lp, false);
  DiscreteCoupling out;
  double total = 0.0;
  for (int a = 0; a < c->size(); ++a) {
    double t = sol.inequality_duals[a];
    if (t < 1e-12) continue;
    out.x.push_back(c->x[a]);
    out.z.push_back(c->z[a]);
    out.weight.push_back(t);
    total += t;
  }
  for (double& t : out.weight) t /= total;
  *c = std::move(out);
}

}  // namespace

DiscreteMeasure DiscreteCoupling::QualityMarginal() const {
  std::map<std::vector<long long>, int> index;
  std::vector<Point> atoms;
  std::vector<double> weights;
  for (int a = 0; a < size(); ++a) {
    auto [it, fresh] = index.emplace(PointKey(Point(), z[a]), static_cast<int>(atoms.size()));
    if (fresh) {
      atoms.push_back(z[a]);
      weights.push_back(0.0);
    }
    weights[it->second] += weight[a];
  }
  return DiscreteMeasure(std::move(atoms), std::move(weights));
}

CuttingPlaneResult RunCuttingPlane(const Instance& inst, const Oracle& oracle,
                                   const CuttingPlaneOptions& options) {
  const int n = inst.num_categories();
  if (!(options.eps_lsip > 0.0)) {
    throw Error(ErrorCode::kInvalidArgument, kModule, "eps_lsip must be positive");
  }
  const double tau = options.tau < 0.0 ? std::min(1e-10, options.eps_lsip / (2.0 * n))
                                       : options.tau;
  if (!(tau < options.eps_lsip / n)) {
    throw Error(ErrorCode::kInvalidArgument, kModule,
                "oracle tolerance must be below eps_lsip / N");
  }

  Relaxation relax(inst);
  if (!options.initial_points.empty()) {
    if (static_cast<int>(options.initial_points.size()) != n) {
      throw Error(ErrorCode::kDimensionMismatch, kModule, "one initial point set per category");
    }
    for (int i = 0; i < n; ++i) {
      for (const auto& [x, z] : options.initial_points[i]) {
        Cut c;
        c.x = x;
        c.z = z;
        c.g = inst.type_bases[i].EvalSparse(x);
        c.h = inst.quality_basis.EvalSparse(z);
        c.cost = inst.cost->Eval(i, x, z);
        relax.Add(i, c);
      }
    }
  }
  for (int i = 0; i < n && options.initial_points.empty(); ++i) {
    const int nx = inst.type_bases[i].complex().num_vertices();
    const int nz = inst.quality_basis.complex().num_vertices();
    for (int vx = 0; vx < nx; ++vx)
      for (int vz = 0; vz < nz; ++vz) relax.Add(i, VertexCut(inst, i, vx, vz));
  }

  CuttingPlaneResult result;
  result.tau = tau;
  result.eps_lsip = options.eps_lsip;
  LpSolver solver(options.lp);
  std::vector<OracleResult> found(n);
  LpSolution lp;
  for (int r = 0;; ++r) {
    if (r >= options.max_iterations) {
      const double gap = result.log.empty() ? std::numeric_limits<double>::infinity() : result.log.back().gap;
      throw Error(ErrorCode::kMaxIterations, kModule,
                  "no convergence after " + std::to_string(r) + " iterations; gap " +
                      FormatDouble(gap));
    }
    IterationRecord rec;
    rec.r = r;
    auto start = Clock::now();
    try {
      lp = solver.Solve(relax.problem());
    } catch (const Error& e) {
      if (e.code() == ErrorCode::kLpUnbounded) {
        throw Error(ErrorCode::kUnboundedRelaxation, kModule,
                    "relaxation is unbounded; the initial constraint set is too small or a "
                    "type hat has zero mass");
      }
      throw;
    }
    rec.lp_time = Seconds(start);
    rec.lp_value = lp.objective;
    relax.Extract(lp.primal, &result.solution);

    start = Clock::now();
    ParallelFor(n, options.threads, [&](int i) {
      const CategorySolution& s = result.solution[i];
      found[i] = oracle.Solve(i, s.y, s.w, tau);
    });
    rec.oracle_time = Seconds(start);

    double gap = 0.0;
    for (int i = 0; i < n; ++i) gap += result.solution[i].y0 - found[i].beta_lower;
    rec.gap = gap;
    if (gap > options.eps_lsip) {
      for (int i = 0; i < n; ++i) {
        const double y0 = result.solution[i].y0;
        bool first = true;
        for (const Cut& c : found[i].pool) {
          // The minimiser always goes in; the rest only if violated.
          double v = c.cost - c.g.Dot(result.solution[i].y) - c.h.Dot(result.solution[i].w);
          if ((first || v < y0) && relax.Add(i, c)) ++rec.cuts_added;
          first = false;
        }
      }
    }
    result.log.push_back(rec);
    VLOG(1) << "r=" << r << " lp=" << FormatDouble(rec.lp_value) << " gap=" << FormatDouble(gap)
            << " cuts=" << rec.cuts_added;
    if (gap <= options.eps_lsip) break;
    if (rec.cuts_added == 0) {
      throw Error(ErrorCode::kMaxIterations, kModule,
                  "oracle returned no new points while the gap is " + FormatDouble(gap));
    }
  }

  const IterationRecord& last = result.log.back();
  result.alpha_ub = last.lp_value;
  result.alpha_lb = last.lp_value - last.gap;
  for (int i = 0; i < n; ++i) result.solution[i].y0 = found[i].beta_lower;
  result.total_cuts = static_cast<int>(relax.rows().size());

  // Couplings from the row duals.
  result.theta.assign(n, DiscreteCoupling{});
  const auto& rows = relax.rows();
  for (size_t r = 0; r < rows.size(); ++r) {
    double t = lp.inequality_duals[static_cast<int>(r)];
    if (t < 1e-12) continue;
    DiscreteCoupling& c = result.theta[rows[r].category];
    c.x.push_back(rows[r].x);
    c.z.push_back(rows[r].z);
    c.weight.push_back(t);
  }
  for (int i = 0; i < n; ++i) {
    DiscreteCoupling& c = result.theta[i];
    double total = 0.0;
    for (double t : c.weight) total += t;
    if (c.weight.empty() || total <= 0.0) {
      throw Error(ErrorCode::kLpInfeasible, kModule,
                  "relaxation dual has no mass for category " + std::to_string(i));
    }
    for (double& t : c.weight) t /= total;
    if (options.purify) Purify(inst, i, &c, options.lp);
  }
  LOG(INFO) << "cutting plane finished after " << result.log.size() << " iterations: ["
            << FormatDouble(result.alpha_lb) << ", " << FormatDouble(result.alpha_ub) << "]";
  return result;
}

int SparsityBound(const std::vector<int>& m, int k) {
  if (m.empty()) throw Error(ErrorCode::kInvalidArgument, kModule, "no categories");
  return *std::min_element(m.begin(), m.end()) + k + 2;
}

void WriteIterationCsv(std::ostream& out, const std::vector<IterationRecord>& log) {
  out << "r,lp_value,gap,cuts_added,lp_time,oracle_time\n";
  for (const IterationRecord& r : log) {
    out << r.r << ',' << FormatDouble(r.lp_value) << ',' << FormatDouble(r.gap) << ','
        << r.cuts_added << ',' << FormatDouble(r.lp_time) << ',' << FormatDouble(r.oracle_time)
        << '\n';
  }
}

}  // namespace teamsolve
