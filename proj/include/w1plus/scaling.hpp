#pragma once

#include <vector>

#include "w1plus/orientation.hpp"
#include "w1plus/transport.hpp"
#include "w1plus/weights.hpp"

namespace w1plus {

/** One admissible pair (x <= y, x in supp f0, y in supp f1) with its
 * reference kernel value c(x, y) = m(x, y) / d(x, y)!. */
struct CostCell {
  int x;
  int y;
  int distance;
  double c;
};

/** Reference kernel restricted to the admissible support pairs. */
struct CostKernel {
  std::vector<CostCell> cells;  // sorted by (x, y)
  std::vector<int> supp0;       // support of f0, sorted
  std::vector<int> supp1;       // support of f1, sorted

  int cell_index(int x, int y) const;  // -1 if absent
};

/**
 * Builds the reference kernel over D = {(x, y) : f0(x) > 0, f1(y) > 0,
 * x <= y}. Throws empty_face if D is empty or misses a support point of
 * either marginal (no coupling concentrated on D could then exist).
 */
CostKernel cost_kernel(const OrientedGraph& og, const PartialOrder& po,
                       const WeightSystem& m, const DistanceTable& dist,
                       const Measure& f0, const Measure& f1);

/**
 * Result of minimising the divergence J over couplings supported on D.
 * The minimiser has the product form pi(x, y) = c(x, y) a(x) b(y).
 */
struct ScalingResult {
  Coupling pi;              // entries aligned with CostKernel::cells
  std::vector<double> a;    // dense size n, 0 off supp f0
  std::vector<double> b;    // dense size n, 0 off supp f1
  double J = 0.0;           // value of the objective at pi
  double marginal_error = 0.0;
  int iterations = 0;       // 0 when solved directly (forest case)
  bool direct = false;      // true when solved by leaf peeling, no iteration
  std::vector<double> j_trace;  // J after each sweep (iterative case)
};

/**
 * Minimises J(pi) = sum pi log(pi / c) - pi over couplings with marginals
 * (f0, f1) supported on the cells of `cost`.
 *
 * When the bipartite cell graph is a forest the face is a single point and
 * the unique coupling is computed exactly by leaf peeling, with (a, b)
 * recovered by tree propagation. Otherwise log-domain alternating scaling
 * runs until the worst marginal error is <= tol (throws no_convergence
 * after max_iter sweeps).
 */
ScalingResult minimize_J(const CostKernel& cost, const Measure& f0,
                         const Measure& f1, double tol = 1e-12,
                         int max_iter = 100000);

/**
 * J(pi) for a coupling supported on the cells of `cost`; entries off the
 * cell set or negative masses throw support_violation. Terms with pi = 0
 * contribute 0.
 */
double J_value(const CostKernel& cost, const Coupling& pi);

}  // namespace w1plus
