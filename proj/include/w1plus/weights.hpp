#pragma once

#include <span>
#include <string>
#include <tuple>
#include <vector>

#include "w1plus/orientation.hpp"

namespace w1plus {

/**
 * Vertex and arc weights on an oriented graph. The default system counts
 * oriented geodesics: m(x) = (number of maximal oriented paths through x),
 * m(x0 -> x1) = (number of maximal oriented paths through that arc), which
 * factor as up(x) * down(x) and up(x0) * down(x1) for the counts of oriented
 * paths ending at x from a source / starting at x into a sink.
 */
struct WeightSystem {
  std::vector<double> vertex;  // size n; 0 on inactive vertices
  std::vector<double> arc;     // aligned with OrientedGraph::arcs
  bool overflow = false;       // true if a count exceeded 2^53 (exactness lost)
};

WeightSystem default_weights(const OrientedGraph& og);

/**
 * Assembles a WeightSystem from named arc weights (tail, head, weight):
 * every oriented arc must be covered exactly once with a positive weight;
 * vertex weights follow from the conservation identities (out-sum off sinks,
 * in-sum at sinks, 1 on isolated active vertices). The result is validated,
 * so inconsistent tables throw divergence_violation. Coverage and naming
 * problems throw invalid_argument.
 */
WeightSystem weights_from_arc_table(
    const Graph& g, const OrientedGraph& og,
    const std::vector<std::tuple<std::string, std::string, double>>& table);

/**
 * Validates an externally supplied weight system: strict positivity on
 * active vertices and arcs, and one-sided conservation
 *   sum of m over arcs leaving x  == m(x) for every non-sink x,
 *   sum of m over arcs entering x == m(x) for every non-source x,
 * within |residual| <= tol * max(1, m(x)). Throws invalid_argument or
 * divergence_violation.
 */
void validate_weights(const OrientedGraph& og, const WeightSystem& m,
                      double tol = 1e-10);

/**
 * Pair weights m(x, v) for all v reachable from x, via one forward pass in
 * topological order: m(x, v) = sum over oriented paths p from x to v of
 * (product of arc weights along p) / (product of m over interior vertices).
 * Returns a dense size-n vector, zero where v is not reachable; entry [x]
 * holds m(x, x) = m(x).
 */
std::vector<double> pair_weights_from(const OrientedGraph& og,
                                      const WeightSystem& m, int x);

/** Mirror image of pair_weights_from: m(v, y) for all v with v <= y. */
std::vector<double> pair_weights_into(const OrientedGraph& og,
                                      const WeightSystem& m, int y);

/**
 * Tuple weight of an increasing chain (x_0 <= x_1 <= ... <= x_k):
 *   m(chain) = product of m(x_i, x_{i+1}) / product of m(x_i) over interior i,
 * with m(z, z) = m(z). Throws not_comparable if consecutive entries are not
 * comparable (equivalently, if some pair weight vanishes), or if the chain
 * is empty or leaves the active set.
 */
double tuple_weight(const OrientedGraph& og, const WeightSystem& m,
                    std::span<const int> chain);

/**
 * Transition kernels of the weight system, acting on vertex functions:
 *   (K u)(x1)  = sum over arcs x0 -> x1 of m(x0, x1) / m(x1) * u(x0),
 *   (K* u)(x0) = sum over arcs x0 -> x1 of m(x0, x1) / m(x0) * u(x1).
 * Rows of K sum to 1 off sources, rows of K* sum to 1 off sinks, and the two
 * are adjoint for the inner product <u, v> = sum m(x) u(x) v(x).
 */
class Kernels {
 public:
  Kernels() = default;
  Kernels(const OrientedGraph& og, const WeightSystem& m);

  std::vector<double> apply_K(const std::vector<double>& u) const;
  std::vector<double> apply_Kstar(const std::vector<double>& u) const;

  /** <u, v> = sum over vertices of m(x) u(x) v(x). */
  double inner(const std::vector<double>& u, const std::vector<double>& v) const;

 private:
  int n_ = 0;
  std::vector<std::pair<int, int>> arcs_;
  std::vector<double> ratio_in_;   // m(arc)/m(head), for K
  std::vector<double> ratio_out_;  // m(arc)/m(tail), for K*
  std::vector<double> mass_;       // m(x)
};

}  // namespace w1plus
