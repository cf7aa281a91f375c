#include "w1plus/graph.hpp"

#include <algorithm>
#include <cmath>
#include <queue>

namespace w1plus {

const char* errc_name(Errc code) noexcept {
  switch (code) {
    case Errc::duplicate_vertex: return "duplicate_vertex";
    case Errc::dangling_edge_endpoint: return "dangling_edge_endpoint";
    case Errc::disconnected_graph: return "disconnected_graph";
    case Errc::self_loop: return "self_loop";
    case Errc::unknown_vertex: return "unknown_vertex";
    case Errc::unnormalized_measure: return "unnormalized_measure";
    case Errc::negative_mass: return "negative_mass";
    case Errc::unbalanced_marginals: return "unbalanced_marginals";
    case Errc::orientation_conflict: return "orientation_conflict";
    case Errc::not_spanning: return "not_spanning";
    case Errc::divergence_violation: return "divergence_violation";
    case Errc::not_comparable: return "not_comparable";
    case Errc::empty_face: return "empty_face";
    case Errc::no_convergence: return "no_convergence";
    case Errc::support_violation: return "support_violation";
    case Errc::zero_density: return "zero_density";
    case Errc::perturbation_infeasible: return "perturbation_infeasible";
    case Errc::too_many_geodesics: return "too_many_geodesics";
    case Errc::invalid_argument: return "invalid_argument";
    case Errc::io_error: return "io_error";
  }
  return "unknown";
}

void fail(Errc code, const std::string& message) { throw Error(code, message); }

Graph::Graph(std::vector<std::string> vertex_names,
             const std::vector<std::pair<std::string, std::string>>& edge_names)
    : names_(std::move(vertex_names)) {
  index_.reserve(names_.size());
  for (int i = 0; i < static_cast<int>(names_.size()); ++i) {
    auto [it, inserted] = index_.emplace(names_[i], i);
    if (!inserted)
      fail(Errc::duplicate_vertex, "duplicate vertex '" + names_[i] + "'");
  }
  edges_.reserve(edge_names.size());
  for (const auto& [a, b] : edge_names) {
    auto ia = index_.find(a);
    auto ib = index_.find(b);
    if (ia == index_.end())
      fail(Errc::dangling_edge_endpoint, "edge endpoint '" + a + "' is not a vertex");
    if (ib == index_.end())
      fail(Errc::dangling_edge_endpoint, "edge endpoint '" + b + "' is not a vertex");
    int u = ia->second, v = ib->second;
    if (u == v) fail(Errc::self_loop, "self-loop at vertex '" + a + "'");
    edges_.emplace_back(std::min(u, v), std::max(u, v));
  }
  std::sort(edges_.begin(), edges_.end());
  edges_.erase(std::unique(edges_.begin(), edges_.end()), edges_.end());

  adj_.assign(names_.size(), {});
  for (const auto& [u, v] : edges_) {
    adj_[u].push_back(v);
    adj_[v].push_back(u);
  }
  for (auto& list : adj_) std::sort(list.begin(), list.end());

  if (!names_.empty()) {
    std::vector<int> d = bfs_distances(*this, 0);
    for (int v = 0; v < vertex_count(); ++v)
      if (d[v] < 0)
        fail(Errc::disconnected_graph,
             "graph is disconnected: vertex '" + names_[v] +
                 "' is unreachable from '" + names_[0] + "'");
  }
}

int Graph::index_of(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end())
    fail(Errc::unknown_vertex, "unknown vertex '" + name + "'");
  return it->second;
}

std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.vertex_count(), -1);
  std::queue<int> queue;
  dist[source] = 0;
  queue.push(source);
  while (!queue.empty()) {
    int u = queue.front();
    queue.pop();
    for (int v : g.neighbors(u)) {
      if (dist[v] < 0) {
        dist[v] = dist[u] + 1;
        queue.push(v);
      }
    }
  }
  return dist;
}

DistanceTable all_pairs_distances(const Graph& g) {
  DistanceTable table(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) table[v] = bfs_distances(g, v);
  return table;
}

std::vector<int> Measure::support() const {
  std::vector<int> out;
  for (int v = 0; v < static_cast<int>(mass.size()); ++v)
    if (mass[v] > 0.0) out.push_back(v);
  return out;
}

double Measure::sum() const {
  double total = 0.0;
  for (double x : mass) total += x;
  return total;
}

void validate_measure(const Graph& g, const Measure& m, double tol) {
  if (static_cast<int>(m.mass.size()) != g.vertex_count())
    fail(Errc::invalid_argument, "measure size does not match vertex count");
  for (int v = 0; v < g.vertex_count(); ++v)
    if (m.mass[v] < 0.0)
      fail(Errc::negative_mass, "negative mass at vertex '" + g.name(v) + "'");
  double total = m.sum();
  if (std::abs(total - 1.0) > tol)
    fail(Errc::unnormalized_measure,
         "measure masses sum to " + std::to_string(total) + ", expected 1");
}

namespace {

// Vertices lying on at least one geodesic from x to y, i.e. with
// d(x,v) + d(v,y) == d(x,y).
bool on_geodesic(const DistanceTable& dist, int x, int y, int v) {
  return dist[x][v] + dist[v][y] == dist[x][y];
}

}  // namespace

double geodesic_count(const Graph& g, const DistanceTable& dist, int x, int y,
                      bool* overflow) {
  if (overflow) *overflow = false;
  const double exact_limit = 9007199254740992.0;  // 2^53
  // Collect on-geodesic vertices ordered by distance from x.
  std::vector<int> layer_order;
  for (int v = 0; v < g.vertex_count(); ++v)
    if (on_geodesic(dist, x, y, v)) layer_order.push_back(v);
  std::sort(layer_order.begin(), layer_order.end(),
            [&](int a, int b) { return dist[x][a] < dist[x][b]; });
  std::vector<double> count(g.vertex_count(), 0.0);
  count[x] = 1.0;
  for (int v : layer_order) {
    if (v == x) continue;
    double total = 0.0;
    for (int u : g.neighbors(v))
      if (on_geodesic(dist, x, y, u) && dist[x][u] + 1 == dist[x][v])
        total += count[u];
    count[v] = total;
    if (overflow && total > exact_limit) *overflow = true;
  }
  return count[y];
}

std::vector<std::vector<int>> geodesics_between(const Graph& g,
                                                const DistanceTable& dist,
                                                int x, int y, std::size_t limit,
                                                bool force) {
  if (!force) {
    double n = geodesic_count(g, dist, x, y);
    if (n > static_cast<double>(limit))
      fail(Errc::too_many_geodesics,
           "pair ('" + g.name(x) + "','" + g.name(y) + "') has " +
               std::to_string(static_cast<long long>(n)) +
               " geodesics (limit " + std::to_string(limit) +
               "); request the count instead or force enumeration");
  }
  std::vector<std::vector<int>> out;
  std::vector<int> path{x};
  // Depth-first walk of the distance-decreasing DAG.
  auto extend = [&](auto&& self, int v) -> void {
    if (v == y) {
      out.push_back(path);
      return;
    }
    for (int u : g.neighbors(v)) {
      if (dist[x][u] == dist[x][v] + 1 && on_geodesic(dist, x, y, u)) {
        path.push_back(u);
        self(self, u);
        path.pop_back();
      }
    }
  };
  extend(extend, x);
  return out;
}

}  // namespace w1plus
