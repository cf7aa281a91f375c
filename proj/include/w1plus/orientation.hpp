#pragma once

#include <array>
#include <cstdint>
#include <utility>
#include <vector>

#include "w1plus/graph.hpp"
#include "w1plus/transport.hpp"

namespace w1plus {

/**
 * Acyclic orientation of the edges that participate in optimal transport:
 * an edge {a, b} is oriented a -> b iff some support-union pair (x, y)
 * has d(x, a) + 1 + d(b, y) == d(x, y), i.e. the edge is traversed from a
 * to b by a geodesic from x to y.
 *
 * Construction throws orientation_conflict if an edge would receive both
 * directions or if the resulting digraph is not acyclic, and checks that
 * every oriented path realizes the hop distance between its endpoints.
 */
struct OrientedGraph {
  int n = 0;                              // vertex count of underlying graph
  std::vector<std::pair<int, int>> arcs;  // sorted (tail, head)
  std::vector<std::vector<int>> out_arcs; // per vertex: indices into arcs
  std::vector<std::vector<int>> in_arcs;
  std::vector<char> is_active;            // incident to an arc, or fixed point
  std::vector<int> active;                // sorted list of active vertices
  std::vector<int> sources;               // active, no incoming arc
  std::vector<int> sinks;                 // active, no outgoing arc
  std::vector<int> topo;                  // active vertices, topological order
  int longest_path = 0;                   // max arc count over oriented paths

  /** Index of arc tail->head, or -1 if that arc is absent. */
  int arc_index(int tail, int head) const;
  bool is_source(int v) const;
  bool is_sink(int v) const;
};

OrientedGraph orient(const Graph& g, const DistanceTable& dist,
                     const SupportUnion& support);

/**
 * Assembles the derived structure (adjacency, active set, sources, sinks,
 * topological order, longest path) from an explicit arc list plus isolated
 * active vertices. Throws orientation_conflict on an oriented cycle. Used by
 * orient() and by deserialisation; performs no geodesy validation.
 */
OrientedGraph assemble_oriented(int n, std::vector<std::pair<int, int>> arcs,
                                const std::vector<int>& extra_active);

/**
 * Reachability order of the oriented graph restricted to active vertices:
 * x <= y iff x == y or an oriented path runs from x to y.
 */
class PartialOrder {
 public:
  PartialOrder() = default;
  PartialOrder(const OrientedGraph& og);

  /** Reflexive comparability; vertices outside the active set are only
   * comparable to themselves. */
  bool leq(int x, int y) const;

 private:
  int n_ = 0;
  std::vector<int> pos_;                   // vertex -> active position or -1
  std::vector<std::vector<std::uint64_t>> reach_;  // per active: bitset
};

PartialOrder order(const OrientedGraph& og);

/**
 * Oriented two-step chains (x0, x1, x2), with the arc indices of both steps,
 * sorted lexicographically. These index the edge-level divergence.
 */
struct TripleSet {
  std::vector<std::array<int, 3>> triples;
  std::vector<std::pair<int, int>> arc_pairs;  // (arc x0->x1, arc x1->x2)
};

TripleSet oriented_triples(const OrientedGraph& og);

/**
 * Vertex divergence of an arc field: (div q)(x) = sum of q over arcs leaving
 * x minus sum of q over arcs entering x. T needs zero-initialisation and +=,
 * -= (double and Polynomial both qualify).
 */
template <class T>
std::vector<T> divergence_vertex(const OrientedGraph& og,
                                 const std::vector<T>& arc_field) {
  std::vector<T> out(static_cast<std::size_t>(og.n));
  for (std::size_t a = 0; a < og.arcs.size(); ++a) {
    out[static_cast<std::size_t>(og.arcs[a].first)] += arc_field[a];
    out[static_cast<std::size_t>(og.arcs[a].second)] -= arc_field[a];
  }
  return out;
}

/**
 * Arc divergence of a field on oriented triples:
 * (div h)(x1 -> x2) = sum over x3 of h(x1, x2, x3)
 *                   - sum over x0 of h(x0, x1, x2).
 */
template <class T>
std::vector<T> divergence_arc(const OrientedGraph& og, const TripleSet& ts,
                              const std::vector<T>& triple_field) {
  std::vector<T> out(og.arcs.size());
  for (std::size_t i = 0; i < ts.triples.size(); ++i) {
    out[static_cast<std::size_t>(ts.arc_pairs[i].first)] += triple_field[i];
    out[static_cast<std::size_t>(ts.arc_pairs[i].second)] -= triple_field[i];
  }
  return out;
}

/**
 * Breadth-first spanning forest of the active components, one tree per
 * connected component of the arc set, each grown from that component's
 * lexicographically smallest source name (smallest active name if the
 * component has no source). Returns arc indices.
 */
std::vector<int> default_spanning_forest(const OrientedGraph& og,
                                         const Graph& g);

/**
 * Edge flux through a spanning forest: removing a tree arc splits its tree
 * in two; the flux through the arc equals minus the sum of `dfdt` over the
 * tail-side part. Pre: dfdt sums to 0 within 1e-12 on every tree (throws
 * divergence_violation otherwise); tree_arc_ids must form a spanning forest
 * of the active components (throws not_spanning otherwise). Returns a dense
 * per-arc vector, zero off the forest, whose vertex divergence equals -dfdt
 * on active vertices within 1e-12.
 */
std::vector<double> tree_flux(const OrientedGraph& og,
                              const std::vector<int>& tree_arc_ids,
                              const std::vector<double>& dfdt);

}  // namespace w1plus
