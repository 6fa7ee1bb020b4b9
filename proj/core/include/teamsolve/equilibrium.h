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

// Approximate matching equilibria assembled from the cutting-plane output:
// the discrete quality measure nu_hat, transfer functions, the sampler chain
// that reglues the dual couplings onto the true type measures, and Monte
// Carlo upper bounds with their sub-optimality certificates.

#ifndef TEAMSOLVE_EQUILIBRIUM_H_
#define TEAMSOLVE_EQUILIBRIUM_H_

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <vector>

#include "teamsolve/arrangement.h"
#include "teamsolve/common.h"
#include "teamsolve/cutting_plane.h"
#include "teamsolve/measures.h"
#include "teamsolve/problems.h"
#include "teamsolve/transport.h"

namespace teamsolve {

// Minimiser of z -> sum_i c_i(x_i, z) over Z. Among minimisers within 1e-12
// of the optimum the lexicographically smallest is returned.
class QualitySelector {
 public:
  explicit QualitySelector(std::shared_ptr<const Instance> instance);

  Point operator()(const std::vector<Point>& xs) const;

 private:
  Point SelectCpwa(const std::vector<Point>& xs) const;
  Point SelectQuadratic(const std::vector<Point>& xs) const;

  std::shared_ptr<const Instance> inst_;
  const SimplicialComplex* cover_;
  // Breakpoints with a z part, per category.
  std::vector<std::vector<Breakpoint>> planes_;
  // Faces of the cover for projections: vertices and Gram data.
  struct Face {
    Point v0;
    Matrix d;
    Matrix gram_inverse;
  };
  std::vector<Face> faces_;
};

// phi_i(z) = inf_x {c_i(x, z) - y0_i - <g_i(x), y_i>} for i < N-1, and the
// last one is minus the sum of the others.
class TransferFunctions {
 public:
  TransferFunctions(std::shared_ptr<const Instance> instance,
                    std::vector<CategorySolution> solution);

  int size() const { return static_cast<int>(solution_.size()); }
  double Eval(int i, const Point& z) const;
  // All N values at z; they sum to zero exactly.
  std::vector<double> EvalAll(const Point& z) const;

 private:
  double Infimum(int i, const Point& z) const;

  std::shared_ptr<const Instance> inst_;
  std::vector<CategorySolution> solution_;
};

// eps_LSIP + sum_i L1_i r_i + (sum_{i != i_hat} L2_i) r_h.
double EpsTheo(double eps_lsip, const std::vector<double>& l1, const std::vector<double>& l2,
               const std::vector<double>& radius_x, double radius_h, int i_hat);

struct McEstimate {
  double mean = 0.0;
  double stderr = 0.0;
};

struct EquilibriumOptions {
  long samples = 100000;
  int repetitions = 20;
  uint64_t seed = 1;
  int threads = 0;
  // Fixed category for nu_hat; negative picks the one whose nu_hat_i is
  // closest in summed W1 to the others among those within the sparsity
  // bound.
  int i_hat = -1;
  SemiDiscreteOptions transport;
  // Enumerate expectations exactly when all type measures are discrete and
  // the number of joint outcomes stays below this.
  long exact_limit = 1000000;
  // Draws and grid size for the equilibrium residuals.
  int diagnostic_samples = 2000;
  int diagnostic_grid = 400;
};

struct Diagnostics {
  // Marginal first-moment mismatch of the reglued couplings, per category.
  std::vector<double> me1;
  // Largest |sum_i phi_i(z)| on the test grid.
  double me2 = 0.0;
  // E[c_i - phi_i] - E[phi_i^c] with the c-transform taken on the grid.
  std::vector<double> me3;
};

struct EquilibriumReport {
  int i_hat = 0;
  DiscreteMeasure nu_hat;
  std::vector<DiscreteMeasure> nu_hat_i;
  // Constant added to every reported objective value.
  double shift = 0.0;
  double alpha_lb = 0.0;
  double alpha_ub = 0.0;  // of the final relaxation
  McEstimate alpha_hat_ub;
  McEstimate alpha_tilde_ub;
  McEstimate eps_hat_sub;
  McEstimate eps_tilde_sub;
  double eps_theo = 0.0;
  bool exact = false;
  int support_size = 0;
  int sparsity_bound = 0;
  std::vector<double> transport_w1;
  std::vector<double> transport_mass_error;
  long transport_fallbacks = 0;
  Diagnostics diagnostics;
  double seconds = 0.0;
};

// One draw of the chain: Z ~ nu_hat, the regluing steps per category, and
// the recomputed quality.
struct EquilibriumDraw {
  int z_atom = 0;
  Point z;
  std::vector<Point> xbar;
  Point zbar;
};

class Equilibrium {
 public:
  Equilibrium(std::shared_ptr<const Instance> instance, const CuttingPlaneResult& lsip,
              const EquilibriumOptions& options);

  const EquilibriumReport& report() const { return report_; }
  const TransferFunctions& transfers() const { return *transfers_; }
  const QualitySelector& selector() const { return *selector_; }
  EquilibriumDraw Sample(Rng& rng) const;

  // Points of Z for plots and residuals: a box lattice clipped to Z plus all
  // mesh vertices.
  static std::vector<Point> TestGrid(const SimplicialComplex& z, int approx_points);

 private:
  void ChooseCategory(const std::vector<DiscreteCoupling>& theta);
  void BuildChain(const std::vector<DiscreteCoupling>& theta);
  bool EstimateExactly();
  void EstimateMonteCarlo();
  void ComputeDiagnostics();

  std::shared_ptr<const Instance> inst_;
  EquilibriumOptions options_;
  EquilibriumReport report_;
  std::unique_ptr<TransferFunctions> transfers_;
  std::unique_ptr<QualitySelector> selector_;

  // Per category: Z -> Z_i plan, X_i | Z_i tables, X_i -> Xbar_i coupling.
  std::vector<std::shared_ptr<const DiscretePlan>> z_plans_;
  std::vector<DiscreteMeasure> x_marginals_;
  // cond_[i][zi]: (x-marginal atom, cumulative weight).
  std::vector<std::vector<std::vector<std::pair<int, double>>>> cond_;
  std::vector<SamplerPtr> x_couplings_;
  // Exact mode only: law of Xbar_i given each nu_hat atom.
  std::vector<std::vector<std::vector<std::pair<int, double>>>> exact_law_;
};

// nu_hat atoms and weights as CSV.
void WriteMeasureCsv(std::ostream& out, const DiscreteMeasure& m);

}  // namespace teamsolve

#endif  // TEAMSOLVE_EQUILIBRIUM_H_
