#pragma once

#include <utility>
#include <vector>

#include "w1plus/graph.hpp"

namespace w1plus {

/** One cell of a coupling: mass sitting on the vertex pair (x, y). */
struct CouplingEntry {
  int x;
  int y;
  double mass;
};

/** Coupling between two measures, entries sorted by (x, y), plus its cost. */
struct Coupling {
  std::vector<CouplingEntry> entries;
  double cost = 0.0;

  /** Row marginal (sum over y) as a dense vector of size n. */
  std::vector<double> row_marginal(int n) const;
  /** Column marginal (sum over x) as a dense vector of size n. */
  std::vector<double> col_marginal(int n) const;
};

/** Value and optimal witness of the order-1 transport problem. */
struct W1Result {
  double value = 0.0;
  Coupling witness;
};

/**
 * Wasserstein-1 distance between f0 and f1 for the hop metric, with an
 * optimal witness coupling, computed by successive-shortest-path min-cost
 * flow on the bipartite support graph (integer arc costs, real masses).
 *
 * Pre: f0, f1 are valid probability measures (sums within 1e-9 of 1; the
 * masses are rebalanced by their exact sums internally so supply equals
 * demand to machine precision). Witness marginals match f0/f1 within 1e-10.
 */
W1Result w1(const Graph& g, const DistanceTable& dist, const Measure& f0,
            const Measure& f1);

/**
 * Union of the supports of all optimal couplings: the set of pairs (x, y)
 * that carry positive mass in at least one optimal coupling.
 *
 * Computed per pair by a lexicographic probe: one primary min-cost flow
 * fixes the optimal face via integer dual potentials (a cell is on the face
 * iff its reduced cost is exactly zero); a pair is a member iff the witness
 * already carries mass > 1e-12 there, or an augmenting cycle through the
 * pair exists inside the zero-reduced-cost residual graph, i.e. iff the
 * maximum of pi(x, y) over the optimal face is positive.
 */
struct SupportUnion {
  std::vector<std::pair<int, int>> pairs;  // sorted (x, y)
  double w1_value = 0.0;                   // value the face was computed against

  bool contains(int x, int y) const;
};

SupportUnion support_union(const Graph& g, const DistanceTable& dist,
                           const Measure& f0, const Measure& f1);

/**
 * Whether `coupling` is an optimal coupling between f0 and f1:
 * marginals must match within 1e-10 (throws unbalanced_marginals otherwise)
 * and the transport cost must not exceed W1(f0, f1) + tol.
 */
bool is_optimal(const Graph& g, const DistanceTable& dist, const Measure& f0,
                const Measure& f1, const Coupling& coupling, double tol = 1e-9);

/** Transport cost sum(pi(x,y) * d(x,y)) of an arbitrary coupling. */
double coupling_cost(const DistanceTable& dist, const Coupling& coupling);

}  // namespace w1plus
