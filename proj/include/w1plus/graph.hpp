#pragma once

#include <cstdint>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "w1plus/errors.hpp"

namespace w1plus {

/**
 * Finite connected simple graph with opaque vertex identifiers.
 *
 * Vertices are mapped to dense integer indices in the order they were
 * declared; all algorithms work on indices and only translate back to names
 * at the IO boundary. Edges are stored once with endpoints normalized to
 * (min,max) index order and kept sorted; adjacency lists are sorted.
 */
class Graph {
 public:
  /**
   * Build a graph from vertex names and name pairs.
   * Throws Error with code:
   *  - duplicate_vertex        if a name appears twice,
   *  - dangling_edge_endpoint  if an edge references an unknown name,
   *  - self_loop               if an edge joins a vertex to itself,
   *  - disconnected_graph      if the edge set does not connect all vertices.
   * Parallel edges collapse to a single edge.
   */
  Graph(std::vector<std::string> vertex_names,
        const std::vector<std::pair<std::string, std::string>>& edge_names);

  int vertex_count() const { return static_cast<int>(names_.size()); }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  const std::string& name(int v) const { return names_[v]; }
  const std::vector<std::string>& names() const { return names_; }

  /** Index of a vertex name; throws unknown_vertex if absent. */
  int index_of(const std::string& name) const;
  bool has_vertex(const std::string& name) const {
    return index_.count(name) != 0;
  }

  /** Undirected edges, endpoints in (low,high) index order, sorted. */
  const std::vector<std::pair<int, int>>& edges() const { return edges_; }

  /** Sorted neighbor list of v. */
  const std::vector<int>& neighbors(int v) const { return adj_[v]; }

 private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, int> index_;
  std::vector<std::pair<int, int>> edges_;
  std::vector<std::vector<int>> adj_;
};

/** All-pairs hop distances; dist[u][v] >= 0 (graphs are connected). */
using DistanceTable = std::vector<std::vector<int>>;

/** Breadth-first all-pairs distances. */
DistanceTable all_pairs_distances(const Graph& g);

/** Single-source breadth-first distances. */
std::vector<int> bfs_distances(const Graph& g, int source);

/**
 * Finitely supported probability distribution on the graph's vertices,
 * stored densely (zero mass off the support).
 */
struct Measure {
  std::vector<double> mass;

  /** Indices with mass > 0, ascending. */
  std::vector<int> support() const;
  double sum() const;
};

/**
 * Validate that `m` is a probability measure for `g`: matching size,
 * no negative masses, total mass within `tol` of 1.
 * Throws negative_mass / unnormalized_measure / invalid_argument.
 */
void validate_measure(const Graph& g, const Measure& m, double tol = 1e-12);

/**
 * Number of geodesics (shortest paths) from x to y, computed by dynamic
 * programming on the distance-decreasing DAG. Exact while the count stays
 * below 2^53; `overflow` (optional) is set when that threshold is passed.
 */
double geodesic_count(const Graph& g, const DistanceTable& dist, int x, int y,
                      bool* overflow = nullptr);

/**
 * Enumerate the geodesics from x to y as vertex index sequences
 * (each starts with x and ends with y; length = dist[x][y] + 1).
 *
 * Desk-scale safety: throws too_many_geodesics when more than `limit`
 * geodesics exist, unless `force` is set. Use geodesic_count() first when
 * only the number is needed.
 */
std::vector<std::vector<int>> geodesics_between(const Graph& g,
                                                const DistanceTable& dist,
                                                int x, int y,
                                                std::size_t limit = 10000,
                                                bool force = false);

}  // namespace w1plus
