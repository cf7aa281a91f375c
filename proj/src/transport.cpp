#include "w1plus/transport.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "w1plus/errors.hpp"

namespace w1plus {

namespace {

constexpr double kResidualEps = 1e-14;  // arc considered saturated below this
constexpr double kMemberEps = 1e-12;    // mass threshold for face membership

struct Arc {
  int to;
  double cap;        // remaining capacity
  long long cost;    // integer hop cost (negated on reverse arcs)
  int rev;           // index of the reverse arc in adj[to]
};

/**
 * Minimum-cost flow on the bipartite support network by successive shortest
 * augmenting paths, Bellman-Ford on the residual graph. Costs stay integer
 * throughout, so the terminal potentials are exact integers and the optimal
 * face (zero reduced cost cells) is identified without tolerance.
 */
class SupportNetwork {
 public:
  SupportNetwork(const DistanceTable& dist, const std::vector<int>& supp0,
                 const std::vector<int>& supp1, const std::vector<double>& a,
                 const std::vector<double>& b)
      : supp0_(supp0), supp1_(supp1) {
    n0_ = static_cast<int>(supp0.size());
    n1_ = static_cast<int>(supp1.size());
    node_count_ = n0_ + n1_ + 2;
    adj_.resize(static_cast<std::size_t>(node_count_));
    for (int i = 0; i < n0_; ++i) add_arc(source_node(), src(i), a[static_cast<std::size_t>(i)], 0);
    for (int j = 0; j < n1_; ++j) add_arc(snk(j), sink_node(), b[static_cast<std::size_t>(j)], 0);
    for (int i = 0; i < n0_; ++i)
      for (int j = 0; j < n1_; ++j)
        add_arc(src(i), snk(j),
                std::numeric_limits<double>::infinity(),
                dist[static_cast<std::size_t>(supp0[static_cast<std::size_t>(i)])]
                    [static_cast<std::size_t>(supp1[static_cast<std::size_t>(j)])]);
  }

  void solve() {
    // Pushing one unit in total; each augmentation saturates a boundary arc
    // or zeroes a reverse arc, so the generous cap below is never reached.
    const int max_rounds = 64 * (n0_ + n1_ + 2) * (n0_ + n1_ + 2);
    for (int round = 0; round < max_rounds; ++round) {
      if (!augment_once()) return;
    }
    fail(Errc::no_convergence, "min-cost flow augmentation failed to terminate");
  }

  /** Flow currently on the cell (i, j) of the support grid. */
  double cell_flow(int i, int j) const {
    const Arc& arc = adj_[static_cast<std::size_t>(src(i))]
                         [static_cast<std::size_t>(cell_arc_index(i, j))];
    // Remaining reverse capacity equals the flow pushed through the arc.
    return adj_[static_cast<std::size_t>(arc.to)][static_cast<std::size_t>(arc.rev)].cap;
  }

  /**
   * Integer potentials p with p(head) - p(tail) <= cost on every usable
   * residual arc: Bellman-Ford from an implicit super-node linked to all
   * nodes at cost 0. Valid because the optimal residual graph has no
   * negative cycle.
   */
  std::vector<long long> potentials() const {
    std::vector<long long> p(static_cast<std::size_t>(node_count_), 0);
    for (int round = 0; round <= node_count_; ++round) {
      bool changed = false;
      for (int u = 0; u < node_count_; ++u) {
        for (const Arc& arc : adj_[static_cast<std::size_t>(u)]) {
          if (arc.cap <= kResidualEps) continue;
          long long cand = p[static_cast<std::size_t>(u)] + arc.cost;
          if (cand < p[static_cast<std::size_t>(arc.to)]) {
            p[static_cast<std::size_t>(arc.to)] = cand;
            changed = true;
          }
        }
      }
      if (!changed) return p;
    }
    fail(Errc::no_convergence, "negative cycle in optimal residual graph");
  }

  int src(int i) const { return 1 + i; }
  int snk(int j) const { return 1 + n0_ + j; }
  int source_node() const { return 0; }
  int sink_node() const { return n0_ + n1_ + 1; }

 private:
  void add_arc(int from, int to, double cap, long long cost) {
    adj_[static_cast<std::size_t>(from)].push_back(
        {to, cap, cost, static_cast<int>(adj_[static_cast<std::size_t>(to)].size())});
    adj_[static_cast<std::size_t>(to)].push_back(
        {from, 0.0, -cost, static_cast<int>(adj_[static_cast<std::size_t>(from)].size()) - 1});
  }

  /** adj[src(i)] holds the reverse of its boundary arc at index 0, then the
   * n1 cell arcs in column order. */
  int cell_arc_index(int i, int j) const {
    (void)i;
    return 1 + j;
  }

  bool augment_once() {
    const long long inf = std::numeric_limits<long long>::max() / 4;
    std::vector<long long> dist(static_cast<std::size_t>(node_count_), inf);
    std::vector<int> par_node(static_cast<std::size_t>(node_count_), -1);
    std::vector<int> par_arc(static_cast<std::size_t>(node_count_), -1);
    dist[static_cast<std::size_t>(source_node())] = 0;
    for (int round = 0; round < node_count_; ++round) {
      bool changed = false;
      for (int u = 0; u < node_count_; ++u) {
        if (dist[static_cast<std::size_t>(u)] == inf) continue;
        const auto& arcs = adj_[static_cast<std::size_t>(u)];
        for (std::size_t k = 0; k < arcs.size(); ++k) {
          const Arc& arc = arcs[k];
          if (arc.cap <= kResidualEps) continue;
          long long cand = dist[static_cast<std::size_t>(u)] + arc.cost;
          if (cand < dist[static_cast<std::size_t>(arc.to)]) {
            dist[static_cast<std::size_t>(arc.to)] = cand;
            par_node[static_cast<std::size_t>(arc.to)] = u;
            par_arc[static_cast<std::size_t>(arc.to)] = static_cast<int>(k);
            changed = true;
          }
        }
      }
      if (!changed) break;
    }
    if (dist[static_cast<std::size_t>(sink_node())] == inf) return false;

    double bottleneck = std::numeric_limits<double>::infinity();
    for (int v = sink_node(); v != source_node(); v = par_node[static_cast<std::size_t>(v)]) {
      const Arc& arc = adj_[static_cast<std::size_t>(par_node[static_cast<std::size_t>(v)])]
                           [static_cast<std::size_t>(par_arc[static_cast<std::size_t>(v)])];
      bottleneck = std::min(bottleneck, arc.cap);
    }
    if (!(bottleneck > kResidualEps)) return false;
    for (int v = sink_node(); v != source_node(); v = par_node[static_cast<std::size_t>(v)]) {
      Arc& arc = adj_[static_cast<std::size_t>(par_node[static_cast<std::size_t>(v)])]
                     [static_cast<std::size_t>(par_arc[static_cast<std::size_t>(v)])];
      arc.cap -= bottleneck;
      adj_[static_cast<std::size_t>(arc.to)][static_cast<std::size_t>(arc.rev)].cap += bottleneck;
    }
    return true;
  }

  std::vector<int> supp0_, supp1_;
  int n0_ = 0, n1_ = 0, node_count_ = 0;
  std::vector<std::vector<Arc>> adj_;
};

struct SolvedTransport {
  std::vector<int> supp0, supp1;
  std::vector<std::vector<double>> flow;        // n0 x n1
  std::vector<std::vector<char>> on_face;       // zero reduced cost cells
  double value = 0.0;
};

SolvedTransport solve_support_problem(const Graph& g, const DistanceTable& dist,
                                      const Measure& f0, const Measure& f1) {
  validate_measure(g, f0, 1e-9);
  validate_measure(g, f1, 1e-9);
  SolvedTransport out;
  out.supp0 = f0.support();
  out.supp1 = f1.support();
  const double sum0 = f0.sum();
  const double sum1 = f1.sum();
  std::vector<double> a, b;
  a.reserve(out.supp0.size());
  b.reserve(out.supp1.size());
  for (int x : out.supp0) a.push_back(f0.mass[static_cast<std::size_t>(x)] / sum0);
  for (int y : out.supp1) b.push_back(f1.mass[static_cast<std::size_t>(y)] / sum1);

  SupportNetwork net(dist, out.supp0, out.supp1, a, b);
  net.solve();
  const auto p = net.potentials();

  const int n0 = static_cast<int>(out.supp0.size());
  const int n1 = static_cast<int>(out.supp1.size());
  out.flow.assign(static_cast<std::size_t>(n0), std::vector<double>(static_cast<std::size_t>(n1), 0.0));
  out.on_face.assign(static_cast<std::size_t>(n0), std::vector<char>(static_cast<std::size_t>(n1), 0));
  long double value = 0.0L;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const double fl = net.cell_flow(i, j);
      const long long d = dist[static_cast<std::size_t>(out.supp0[static_cast<std::size_t>(i)])]
                              [static_cast<std::size_t>(out.supp1[static_cast<std::size_t>(j)])];
      out.flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = fl;
      value += static_cast<long double>(fl) * static_cast<long double>(d);
      const long long reduced = d + p[static_cast<std::size_t>(net.src(i))] -
                                p[static_cast<std::size_t>(net.snk(j))];
      out.on_face[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = (reduced == 0) ? 1 : 0;
    }
  }
  out.value = static_cast<double>(value);
  return out;
}

}  // namespace

std::vector<double> Coupling::row_marginal(int n) const {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : entries) out[static_cast<std::size_t>(e.x)] += e.mass;
  return out;
}

std::vector<double> Coupling::col_marginal(int n) const {
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (const auto& e : entries) out[static_cast<std::size_t>(e.y)] += e.mass;
  return out;
}

bool SupportUnion::contains(int x, int y) const {
  return std::binary_search(pairs.begin(), pairs.end(), std::make_pair(x, y));
}

W1Result w1(const Graph& g, const DistanceTable& dist, const Measure& f0,
            const Measure& f1) {
  const SolvedTransport sol = solve_support_problem(g, dist, f0, f1);
  W1Result out;
  out.value = sol.value;
  for (std::size_t i = 0; i < sol.supp0.size(); ++i) {
    for (std::size_t j = 0; j < sol.supp1.size(); ++j) {
      if (sol.flow[i][j] > kMemberEps) {
        out.witness.entries.push_back({sol.supp0[i], sol.supp1[j], sol.flow[i][j]});
      }
    }
  }
  out.witness.cost = coupling_cost(dist, out.witness);
  return out;
}

SupportUnion support_union(const Graph& g, const DistanceTable& dist,
                           const Measure& f0, const Measure& f1) {
  const SolvedTransport sol = solve_support_problem(g, dist, f0, f1);
  const int n0 = static_cast<int>(sol.supp0.size());
  const int n1 = static_cast<int>(sol.supp1.size());

  // Residual digraph of the optimal face on nodes 0..n0-1 (rows) and
  // n0..n0+n1-1 (columns): forward arcs on face cells, backward arcs where
  // the witness carries mass. A cell (i, j) can gain mass within the face
  // iff column node j reaches row node i here.
  std::vector<std::vector<int>> adj(static_cast<std::size_t>(n0 + n1));
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      if (sol.on_face[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
        adj[static_cast<std::size_t>(i)].push_back(n0 + j);
      if (sol.flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > kMemberEps)
        adj[static_cast<std::size_t>(n0 + j)].push_back(i);
    }
  }
  std::vector<std::vector<char>> reach_col(static_cast<std::size_t>(n1),
                                           std::vector<char>(static_cast<std::size_t>(n0 + n1), 0));
  for (int j = 0; j < n1; ++j) {
    auto& seen = reach_col[static_cast<std::size_t>(j)];
    std::vector<int> stack{n0 + j};
    seen[static_cast<std::size_t>(n0 + j)] = 1;
    while (!stack.empty()) {
      int u = stack.back();
      stack.pop_back();
      for (int v : adj[static_cast<std::size_t>(u)]) {
        if (!seen[static_cast<std::size_t>(v)]) {
          seen[static_cast<std::size_t>(v)] = 1;
          stack.push_back(v);
        }
      }
    }
  }

  SupportUnion out;
  out.w1_value = sol.value;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const bool carries = sol.flow[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > kMemberEps;
      const bool gainable = sol.on_face[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] &&
                            reach_col[static_cast<std::size_t>(j)][static_cast<std::size_t>(i)];
      if (carries || gainable) {
        out.pairs.emplace_back(sol.supp0[static_cast<std::size_t>(i)],
                               sol.supp1[static_cast<std::size_t>(j)]);
      }
    }
  }
  std::sort(out.pairs.begin(), out.pairs.end());
  (void)g;
  return out;
}

double coupling_cost(const DistanceTable& dist, const Coupling& coupling) {
  long double total = 0.0L;
  for (const auto& e : coupling.entries) {
    total += static_cast<long double>(e.mass) *
             static_cast<long double>(dist[static_cast<std::size_t>(e.x)][static_cast<std::size_t>(e.y)]);
  }
  return static_cast<double>(total);
}

bool is_optimal(const Graph& g, const DistanceTable& dist, const Measure& f0,
                const Measure& f1, const Coupling& coupling, double tol) {
  const int n = g.vertex_count();
  for (const auto& e : coupling.entries) {
    if (e.x < 0 || e.x >= n || e.y < 0 || e.y >= n)
      fail(Errc::unknown_vertex, "coupling entry outside the vertex range");
    if (e.mass < -1e-12)
      fail(Errc::negative_mass, "coupling entry with mass " + std::to_string(e.mass));
  }
  const auto row = coupling.row_marginal(n);
  const auto col = coupling.col_marginal(n);
  for (int v = 0; v < n; ++v) {
    if (std::abs(row[static_cast<std::size_t>(v)] - f0.mass[static_cast<std::size_t>(v)]) > 1e-10 ||
        std::abs(col[static_cast<std::size_t>(v)] - f1.mass[static_cast<std::size_t>(v)]) > 1e-10) {
      fail(Errc::unbalanced_marginals,
           "coupling marginals do not match the prescribed measures at vertex '" +
               g.name(v) + "'");
    }
  }
  const double value = w1(g, dist, f0, f1).value;
  return coupling_cost(dist, coupling) <= value + tol;
}

}  // namespace w1plus
