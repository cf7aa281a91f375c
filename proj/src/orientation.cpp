#include "w1plus/orientation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <queue>
#include <string>

#include "w1plus/errors.hpp"

namespace w1plus {

namespace {

/** Union-find over vertex indices. */
class DisjointSets {
 public:
  explicit DisjointSets(int n) : parent_(static_cast<std::size_t>(n)) {
    std::iota(parent_.begin(), parent_.end(), 0);
  }
  int find(int v) {
    while (parent_[static_cast<std::size_t>(v)] != v) {
      parent_[static_cast<std::size_t>(v)] = parent_[static_cast<std::size_t>(parent_[static_cast<std::size_t>(v)])];
      v = parent_[static_cast<std::size_t>(v)];
    }
    return v;
  }
  bool unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a == b) return false;
    parent_[static_cast<std::size_t>(a)] = b;
    return true;
  }

 private:
  std::vector<int> parent_;
};

}  // namespace

int OrientedGraph::arc_index(int tail, int head) const {
  auto it = std::lower_bound(arcs.begin(), arcs.end(), std::make_pair(tail, head));
  if (it != arcs.end() && *it == std::make_pair(tail, head))
    return static_cast<int>(it - arcs.begin());
  return -1;
}

bool OrientedGraph::is_source(int v) const {
  return is_active[static_cast<std::size_t>(v)] && in_arcs[static_cast<std::size_t>(v)].empty();
}

bool OrientedGraph::is_sink(int v) const {
  return is_active[static_cast<std::size_t>(v)] && out_arcs[static_cast<std::size_t>(v)].empty();
}

OrientedGraph assemble_oriented(int n, std::vector<std::pair<int, int>> arcs,
                                const std::vector<int>& extra_active) {
  OrientedGraph og;
  og.n = n;
  og.arcs = std::move(arcs);
  std::sort(og.arcs.begin(), og.arcs.end());
  og.is_active.assign(static_cast<std::size_t>(n), 0);
  og.out_arcs.assign(static_cast<std::size_t>(n), {});
  og.in_arcs.assign(static_cast<std::size_t>(n), {});
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    og.out_arcs[static_cast<std::size_t>(og.arcs[k].first)].push_back(static_cast<int>(k));
    og.in_arcs[static_cast<std::size_t>(og.arcs[k].second)].push_back(static_cast<int>(k));
    og.is_active[static_cast<std::size_t>(og.arcs[k].first)] = 1;
    og.is_active[static_cast<std::size_t>(og.arcs[k].second)] = 1;
  }
  for (int v : extra_active) og.is_active[static_cast<std::size_t>(v)] = 1;
  for (int v = 0; v < n; ++v) {
    if (og.is_active[static_cast<std::size_t>(v)]) og.active.push_back(v);
  }
  for (int v : og.active) {
    if (og.in_arcs[static_cast<std::size_t>(v)].empty()) og.sources.push_back(v);
    if (og.out_arcs[static_cast<std::size_t>(v)].empty()) og.sinks.push_back(v);
  }

  // Topological order over active vertices (deterministic: smallest index
  // first). A leftover vertex means an oriented cycle.
  std::vector<int> indegree(static_cast<std::size_t>(n), 0);
  for (const auto& [tail, head] : og.arcs) {
    (void)tail;
    ++indegree[static_cast<std::size_t>(head)];
  }
  std::priority_queue<int, std::vector<int>, std::greater<>> ready;
  for (int v : og.active) {
    if (indegree[static_cast<std::size_t>(v)] == 0) ready.push(v);
  }
  while (!ready.empty()) {
    const int v = ready.top();
    ready.pop();
    og.topo.push_back(v);
    for (int k : og.out_arcs[static_cast<std::size_t>(v)]) {
      const int w = og.arcs[static_cast<std::size_t>(k)].second;
      if (--indegree[static_cast<std::size_t>(w)] == 0) ready.push(w);
    }
  }
  if (og.topo.size() != og.active.size()) {
    fail(Errc::orientation_conflict, "transport orientation contains a cycle");
  }
  std::vector<int> depth(static_cast<std::size_t>(n), 0);
  for (int v : og.topo) {
    for (int k : og.in_arcs[static_cast<std::size_t>(v)]) {
      depth[static_cast<std::size_t>(v)] =
          std::max(depth[static_cast<std::size_t>(v)],
                   depth[static_cast<std::size_t>(og.arcs[static_cast<std::size_t>(k)].first)] + 1);
    }
    og.longest_path = std::max(og.longest_path, depth[static_cast<std::size_t>(v)]);
  }
  return og;
}

OrientedGraph orient(const Graph& g, const DistanceTable& dist,
                     const SupportUnion& support) {
  std::vector<std::pair<int, int>> arcs;

  for (const auto& [a, b] : g.edges()) {
    bool forward = false;   // a -> b used by a geodesic of some support pair
    bool backward = false;  // b -> a
    for (const auto& [x, y] : support.pairs) {
      const int dxy = dist[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
      if (dist[static_cast<std::size_t>(x)][static_cast<std::size_t>(a)] + 1 +
              dist[static_cast<std::size_t>(b)][static_cast<std::size_t>(y)] == dxy)
        forward = true;
      if (dist[static_cast<std::size_t>(x)][static_cast<std::size_t>(b)] + 1 +
              dist[static_cast<std::size_t>(a)][static_cast<std::size_t>(y)] == dxy)
        backward = true;
    }
    if (forward && backward) {
      fail(Errc::orientation_conflict,
           "edge {" + g.name(a) + ", " + g.name(b) +
               "} is traversed in both directions by optimal transport");
    }
    if (forward) arcs.emplace_back(a, b);
    if (backward) arcs.emplace_back(b, a);
  }

  // Support pairs that stay put keep their vertex active even when no arc
  // touches it.
  std::vector<int> extra_active;
  for (const auto& [x, y] : support.pairs) {
    if (x == y) extra_active.push_back(x);
  }
  OrientedGraph og = assemble_oriented(g.vertex_count(), std::move(arcs), extra_active);

  // Every oriented path must realise the hop distance between its endpoints;
  // with acyclicity this reduces to: longest oriented path u -> v equals
  // d(u, v) for every reachable pair.
  std::vector<int> topo_pos(static_cast<std::size_t>(og.n), -1);
  for (std::size_t i = 0; i < og.topo.size(); ++i)
    topo_pos[static_cast<std::size_t>(og.topo[i])] = static_cast<int>(i);
  std::vector<int> longest(static_cast<std::size_t>(og.n));
  for (int u : og.topo) {
    std::fill(longest.begin(), longest.end(), -1);
    longest[static_cast<std::size_t>(u)] = 0;
    for (std::size_t i = static_cast<std::size_t>(topo_pos[static_cast<std::size_t>(u)]);
         i < og.topo.size(); ++i) {
      const int v = og.topo[i];
      if (longest[static_cast<std::size_t>(v)] < 0) continue;
      og.longest_path = std::max(og.longest_path, longest[static_cast<std::size_t>(v)]);
      if (v != u &&
          longest[static_cast<std::size_t>(v)] !=
              dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]) {
        fail(Errc::orientation_conflict,
             "oriented path from '" + g.name(u) + "' to '" + g.name(v) +
                 "' is longer than their distance");
      }
      for (int k : og.out_arcs[static_cast<std::size_t>(v)]) {
        const int w = og.arcs[static_cast<std::size_t>(k)].second;
        longest[static_cast<std::size_t>(w)] =
            std::max(longest[static_cast<std::size_t>(w)], longest[static_cast<std::size_t>(v)] + 1);
      }
    }
  }
  return og;
}

PartialOrder::PartialOrder(const OrientedGraph& og) : n_(og.n) {
  pos_.assign(static_cast<std::size_t>(n_), -1);
  for (std::size_t i = 0; i < og.active.size(); ++i)
    pos_[static_cast<std::size_t>(og.active[i])] = static_cast<int>(i);
  const std::size_t words = (og.active.size() + 63) / 64;
  reach_.assign(og.active.size(), std::vector<std::uint64_t>(words, 0));
  // Backward sweep: reach(u) = {u} union reach over out-neighbours.
  for (auto it = og.topo.rbegin(); it != og.topo.rend(); ++it) {
    const int u = *it;
    const std::size_t pu = static_cast<std::size_t>(pos_[static_cast<std::size_t>(u)]);
    reach_[pu][pu / 64] |= (std::uint64_t{1} << (pu % 64));
    for (int k : og.out_arcs[static_cast<std::size_t>(u)]) {
      const int w = og.arcs[static_cast<std::size_t>(k)].second;
      const std::size_t pw = static_cast<std::size_t>(pos_[static_cast<std::size_t>(w)]);
      for (std::size_t j = 0; j < words; ++j) reach_[pu][j] |= reach_[pw][j];
    }
  }
}

bool PartialOrder::leq(int x, int y) const {
  if (x == y) return true;
  if (x < 0 || y < 0 || x >= n_ || y >= n_) return false;
  const int px = pos_[static_cast<std::size_t>(x)];
  const int py = pos_[static_cast<std::size_t>(y)];
  if (px < 0 || py < 0) return false;
  const std::size_t p = static_cast<std::size_t>(py);
  return (reach_[static_cast<std::size_t>(px)][p / 64] >> (p % 64)) & 1;
}

PartialOrder order(const OrientedGraph& og) { return PartialOrder(og); }

TripleSet oriented_triples(const OrientedGraph& og) {
  TripleSet ts;
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    const auto [a, b] = og.arcs[k];
    for (int k2 : og.out_arcs[static_cast<std::size_t>(b)]) {
      const int c = og.arcs[static_cast<std::size_t>(k2)].second;
      ts.triples.push_back({a, b, c});
      ts.arc_pairs.emplace_back(static_cast<int>(k), k2);
    }
  }
  return ts;
}

std::vector<int> default_spanning_forest(const OrientedGraph& og, const Graph& g) {
  // Undirected adjacency over arcs, used both for components and the BFS.
  std::vector<std::vector<std::pair<int, int>>> adj(static_cast<std::size_t>(og.n));
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    adj[static_cast<std::size_t>(og.arcs[k].first)].emplace_back(og.arcs[k].second, static_cast<int>(k));
    adj[static_cast<std::size_t>(og.arcs[k].second)].emplace_back(og.arcs[k].first, static_cast<int>(k));
  }

  std::vector<int> component(static_cast<std::size_t>(og.n), -1);
  std::vector<std::vector<int>> members;
  for (int v : og.active) {
    if (component[static_cast<std::size_t>(v)] >= 0) continue;
    const int c = static_cast<int>(members.size());
    members.emplace_back();
    std::vector<int> stack{v};
    component[static_cast<std::size_t>(v)] = c;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      members.back().push_back(u);
      for (const auto& [w, k] : adj[static_cast<std::size_t>(u)]) {
        (void)k;
        if (component[static_cast<std::size_t>(w)] < 0) {
          component[static_cast<std::size_t>(w)] = c;
          stack.push_back(w);
        }
      }
    }
  }

  std::vector<int> tree;
  std::vector<char> visited(static_cast<std::size_t>(og.n), 0);
  for (const auto& comp : members) {
    int root = -1;
    for (int v : comp) {
      if (!og.is_source(v)) continue;
      if (root < 0 || g.name(v) < g.name(root)) root = v;
    }
    if (root < 0) {
      for (int v : comp)
        if (root < 0 || g.name(v) < g.name(root)) root = v;
    }
    std::queue<int> bfs;
    bfs.push(root);
    visited[static_cast<std::size_t>(root)] = 1;
    while (!bfs.empty()) {
      const int u = bfs.front();
      bfs.pop();
      for (const auto& [w, k] : adj[static_cast<std::size_t>(u)]) {
        if (visited[static_cast<std::size_t>(w)]) continue;
        visited[static_cast<std::size_t>(w)] = 1;
        tree.push_back(k);
        bfs.push(w);
      }
    }
  }
  std::sort(tree.begin(), tree.end());
  return tree;
}

std::vector<double> tree_flux(const OrientedGraph& og,
                              const std::vector<int>& tree_arc_ids,
                              const std::vector<double>& dfdt) {
  if (dfdt.size() != static_cast<std::size_t>(og.n))
    fail(Errc::invalid_argument, "rate vector size does not match the vertex count");
  for (int k : tree_arc_ids) {
    if (k < 0 || static_cast<std::size_t>(k) >= og.arcs.size())
      fail(Errc::not_spanning, "tree arc index out of range");
  }

  // Acyclicity of the candidate forest.
  DisjointSets sets(og.n);
  for (int k : tree_arc_ids) {
    if (!sets.unite(og.arcs[static_cast<std::size_t>(k)].first,
                    og.arcs[static_cast<std::size_t>(k)].second))
      fail(Errc::not_spanning, "tree arcs contain a cycle");
  }

  // Spanning: within each active component the tree must have size-1 arcs.
  DisjointSets full(og.n);
  for (const auto& [a, b] : og.arcs) full.unite(a, b);
  std::vector<int> comp_size(static_cast<std::size_t>(og.n), 0);
  std::vector<int> comp_tree_arcs(static_cast<std::size_t>(og.n), 0);
  for (int v : og.active) ++comp_size[static_cast<std::size_t>(full.find(v))];
  for (int k : tree_arc_ids)
    ++comp_tree_arcs[static_cast<std::size_t>(full.find(og.arcs[static_cast<std::size_t>(k)].first))];
  for (int v = 0; v < og.n; ++v) {
    if (comp_size[static_cast<std::size_t>(v)] > 0 &&
        comp_tree_arcs[static_cast<std::size_t>(v)] != comp_size[static_cast<std::size_t>(v)] - 1)
      fail(Errc::not_spanning, "arc set does not span every active component");
  }

  // Balance: the rate must vanish off the active set and sum to zero on
  // every tree.
  for (int v = 0; v < og.n; ++v) {
    if (!og.is_active[static_cast<std::size_t>(v)] &&
        std::abs(dfdt[static_cast<std::size_t>(v)]) > 1e-12)
      fail(Errc::divergence_violation, "rate is nonzero off the active set");
  }
  std::vector<double> comp_sum(static_cast<std::size_t>(og.n), 0.0);
  for (int v : og.active)
    comp_sum[static_cast<std::size_t>(full.find(v))] += dfdt[static_cast<std::size_t>(v)];
  for (int v = 0; v < og.n; ++v) {
    if (comp_size[static_cast<std::size_t>(v)] > 0 && std::abs(comp_sum[static_cast<std::size_t>(v)]) > 1e-12)
      fail(Errc::divergence_violation, "rate does not balance on a component");
  }

  // Tree adjacency for the side sums.
  std::vector<std::vector<std::pair<int, int>>> tadj(static_cast<std::size_t>(og.n));
  for (int k : tree_arc_ids) {
    tadj[static_cast<std::size_t>(og.arcs[static_cast<std::size_t>(k)].first)].emplace_back(
        og.arcs[static_cast<std::size_t>(k)].second, k);
    tadj[static_cast<std::size_t>(og.arcs[static_cast<std::size_t>(k)].second)].emplace_back(
        og.arcs[static_cast<std::size_t>(k)].first, k);
  }

  std::vector<double> flux(og.arcs.size(), 0.0);
  std::vector<char> seen(static_cast<std::size_t>(og.n), 0);
  for (int k : tree_arc_ids) {
    // Sum of the rate over the tail side of the split tree.
    std::fill(seen.begin(), seen.end(), 0);
    const int tail = og.arcs[static_cast<std::size_t>(k)].first;
    std::vector<int> stack{tail};
    seen[static_cast<std::size_t>(tail)] = 1;
    long double side = 0.0L;
    while (!stack.empty()) {
      const int u = stack.back();
      stack.pop_back();
      side += dfdt[static_cast<std::size_t>(u)];
      for (const auto& [w, k2] : tadj[static_cast<std::size_t>(u)]) {
        if (k2 == k || seen[static_cast<std::size_t>(w)]) continue;
        seen[static_cast<std::size_t>(w)] = 1;
        stack.push_back(w);
      }
    }
    flux[static_cast<std::size_t>(k)] = -static_cast<double>(side);
  }
  return flux;
}

}  // namespace w1plus
