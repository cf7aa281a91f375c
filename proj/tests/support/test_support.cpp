#include "test_support.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <set>
#include <stdexcept>
#include <string>
#include <utility>

namespace testsupport {

using w1plus::DistanceTable;
using w1plus::Graph;
using w1plus::Measure;

// ---- generators -----------------------------------------------------------

namespace {

std::vector<std::string> numbered_names(int n) {
  std::vector<std::string> names;
  names.reserve(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) names.push_back(std::to_string(i));
  return names;
}

}  // namespace

Graph path_graph(int n) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i + 1 < n; ++i)
    edges.emplace_back(std::to_string(i), std::to_string(i + 1));
  return Graph(numbered_names(n), edges);
}

Graph cycle_graph(int n) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < n; ++i)
    edges.emplace_back(std::to_string(i), std::to_string((i + 1) % n));
  return Graph(numbered_names(n), edges);
}

Graph grid_graph(int rows, int cols) {
  const auto name = [](int i, int j) {
    return std::to_string(i) + "_" + std::to_string(j);
  };
  std::vector<std::string> names;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 0; i < rows; ++i) {
    for (int j = 0; j < cols; ++j) {
      names.push_back(name(i, j));
      if (i + 1 < rows) edges.emplace_back(name(i, j), name(i + 1, j));
      if (j + 1 < cols) edges.emplace_back(name(i, j), name(i, j + 1));
    }
  }
  return Graph(std::move(names), edges);
}

Graph random_tree(int n, std::mt19937_64& rng) {
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    edges.emplace_back(std::to_string(pick(rng)), std::to_string(i));
  }
  return Graph(numbered_names(n), edges);
}

Graph random_connected(int n, int extra, std::mt19937_64& rng) {
  std::set<std::pair<int, int>> used;
  std::vector<std::pair<std::string, std::string>> edges;
  for (int i = 1; i < n; ++i) {
    std::uniform_int_distribution<int> pick(0, i - 1);
    const int j = pick(rng);
    used.emplace(j, i);
    edges.emplace_back(std::to_string(j), std::to_string(i));
  }
  std::uniform_int_distribution<int> pick(0, n - 1);
  for (int added = 0, guard = 0; added < extra && guard < 50 * (extra + 1); ++guard) {
    int a = pick(rng), b = pick(rng);
    if (a == b) continue;
    if (a > b) std::swap(a, b);
    if (!used.emplace(a, b).second) continue;
    edges.emplace_back(std::to_string(a), std::to_string(b));
    ++added;
  }
  return Graph(numbered_names(n), edges);
}

Measure dirac(const Graph& g, int v) {
  Measure f;
  f.mass.assign(static_cast<std::size_t>(g.vertex_count()), 0.0);
  f.mass[static_cast<std::size_t>(v)] = 1.0;
  return f;
}

Measure random_ball_measure(const Graph& g, const DistanceTable& dist,
                            int center, int radius, int max_support,
                            int denominator, std::mt19937_64& rng) {
  std::vector<int> ball;
  for (int v = 0; v < g.vertex_count(); ++v) {
    if (dist[static_cast<std::size_t>(center)][static_cast<std::size_t>(v)] <= radius)
      ball.push_back(v);
  }
  std::shuffle(ball.begin(), ball.end(), rng);
  std::uniform_int_distribution<int> size_pick(1, max_support);
  const int k = std::min<int>(size_pick(rng), static_cast<int>(ball.size()));
  ball.resize(static_cast<std::size_t>(k));

  // Split `denominator` units over the k chosen vertices, one unit minimum.
  std::vector<int> units(static_cast<std::size_t>(k), 1);
  std::uniform_int_distribution<int> cell(0, k - 1);
  for (int u = k; u < denominator; ++u) ++units[static_cast<std::size_t>(cell(rng))];

  Measure f;
  f.mass.assign(static_cast<std::size_t>(g.vertex_count()), 0.0);
  for (int i = 0; i < k; ++i) {
    f.mass[static_cast<std::size_t>(ball[static_cast<std::size_t>(i)])] =
        static_cast<double>(units[static_cast<std::size_t>(i)]) / denominator;
  }
  return f;
}

// ---- oracles ----------------------------------------------------------------

std::vector<std::vector<int>> floyd_warshall(const Graph& g) {
  const int n = g.vertex_count();
  const int inf = std::numeric_limits<int>::max() / 4;
  std::vector<std::vector<int>> d(static_cast<std::size_t>(n),
                                  std::vector<int>(static_cast<std::size_t>(n), inf));
  for (int v = 0; v < n; ++v) d[static_cast<std::size_t>(v)][static_cast<std::size_t>(v)] = 0;
  for (const auto& [a, b] : g.edges()) {
    d[static_cast<std::size_t>(a)][static_cast<std::size_t>(b)] = 1;
    d[static_cast<std::size_t>(b)][static_cast<std::size_t>(a)] = 1;
  }
  for (int k = 0; k < n; ++k) {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        const int via = d[static_cast<std::size_t>(i)][static_cast<std::size_t>(k)] +
                        d[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
        if (via < d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)])
          d[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] = via;
      }
    }
  }
  return d;
}

namespace {

constexpr double kMassEps = 1e-13;

struct TransportTableau {
  std::vector<int> supp0, supp1;
  std::vector<std::vector<double>> plan;             // n0 x n1
  std::vector<std::vector<long long>> cost;          // hop distances
};

TransportTableau northwest_corner(const DistanceTable& dist, const Measure& f0,
                                  const Measure& f1) {
  TransportTableau t;
  t.supp0 = f0.support();
  t.supp1 = f1.support();
  const int n0 = static_cast<int>(t.supp0.size());
  const int n1 = static_cast<int>(t.supp1.size());
  if (n0 == 0 || n1 == 0) throw std::runtime_error("transport oracle: empty support");
  t.plan.assign(static_cast<std::size_t>(n0), std::vector<double>(static_cast<std::size_t>(n1), 0.0));
  t.cost.assign(static_cast<std::size_t>(n0), std::vector<long long>(static_cast<std::size_t>(n1), 0));
  for (int i = 0; i < n0; ++i)
    for (int j = 0; j < n1; ++j)
      t.cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] =
          dist[static_cast<std::size_t>(t.supp0[static_cast<std::size_t>(i)])]
              [static_cast<std::size_t>(t.supp1[static_cast<std::size_t>(j)])];

  std::vector<double> row(static_cast<std::size_t>(n0)), col(static_cast<std::size_t>(n1));
  for (int i = 0; i < n0; ++i) row[static_cast<std::size_t>(i)] = f0.mass[static_cast<std::size_t>(t.supp0[static_cast<std::size_t>(i)])];
  for (int j = 0; j < n1; ++j) col[static_cast<std::size_t>(j)] = f1.mass[static_cast<std::size_t>(t.supp1[static_cast<std::size_t>(j)])];

  int i = 0, j = 0;
  while (i < n0 && j < n1) {
    const double moved = std::min(row[static_cast<std::size_t>(i)], col[static_cast<std::size_t>(j)]);
    t.plan[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] += moved;
    row[static_cast<std::size_t>(i)] -= moved;
    col[static_cast<std::size_t>(j)] -= moved;
    if (row[static_cast<std::size_t>(i)] <= kMassEps) ++i;
    else ++j;
  }
  double leftover = 0.0;
  for (int a = 0; a < n0; ++a) leftover = std::max(leftover, row[static_cast<std::size_t>(a)]);
  for (int b = 0; b < n1; ++b) leftover = std::max(leftover, col[static_cast<std::size_t>(b)]);
  if (leftover > 1e-9)
    throw std::runtime_error("transport oracle: marginals do not balance");
  return t;
}

/**
 * Exchange digraph on rows 0..n0-1 and columns n0..n0+n1-1: a forward arc
 * row -> col always exists (the cell can gain mass); a backward arc
 * col -> row exists while the cell carries mass. Arc weights are the integer
 * hop costs (negated on backward arcs), so negative-cycle detection is exact.
 */
struct ExchangeArc {
  int from, to;
  long long w;
  int i, j;       // the cell
  bool backward;  // true: cancels mass on (i, j)
};

std::vector<ExchangeArc> exchange_arcs(const TransportTableau& t) {
  const int n0 = static_cast<int>(t.supp0.size());
  const int n1 = static_cast<int>(t.supp1.size());
  std::vector<ExchangeArc> arcs;
  for (int i = 0; i < n0; ++i) {
    for (int j = 0; j < n1; ++j) {
      const long long c = t.cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)];
      arcs.push_back({i, n0 + j, c, i, j, false});
      if (t.plan[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)] > kMassEps)
        arcs.push_back({n0 + j, i, -c, i, j, true});
    }
  }
  return arcs;
}

/** One Bellman-Ford pass over all nodes; returns a node on a negative cycle
 * (via the parent chain) or -1 when none exists. */
int find_negative_cycle(int nodes, const std::vector<ExchangeArc>& arcs,
                        std::vector<int>& parent_arc) {
  std::vector<long long> pot(static_cast<std::size_t>(nodes), 0);
  parent_arc.assign(static_cast<std::size_t>(nodes), -1);
  int touched = -1;
  for (int round = 0; round < nodes; ++round) {
    touched = -1;
    for (std::size_t k = 0; k < arcs.size(); ++k) {
      const auto& a = arcs[k];
      if (pot[static_cast<std::size_t>(a.from)] + a.w < pot[static_cast<std::size_t>(a.to)]) {
        pot[static_cast<std::size_t>(a.to)] = pot[static_cast<std::size_t>(a.from)] + a.w;
        parent_arc[static_cast<std::size_t>(a.to)] = static_cast<int>(k);
        touched = a.to;
      }
    }
    if (touched < 0) return -1;
  }
  return touched;
}

}  // namespace

double w1_oracle(const DistanceTable& dist, const Measure& f0, const Measure& f1) {
  TransportTableau t = northwest_corner(dist, f0, f1);
  const int n0 = static_cast<int>(t.supp0.size());
  const int n1 = static_cast<int>(t.supp1.size());
  const int nodes = n0 + n1;

  for (int iter = 0; iter < 100000; ++iter) {
    const auto arcs = exchange_arcs(t);
    std::vector<int> parent_arc;
    int v = find_negative_cycle(nodes, arcs, parent_arc);
    if (v < 0) {
      // Certificate: Bellman-Ford converged, i.e. potentials p with
      // p(to) <= p(from) + w on every usable arc exist, so no improving
      // exchange remains and the plan is optimal.
      long double value = 0.0L;
      for (int i = 0; i < n0; ++i)
        for (int j = 0; j < n1; ++j)
          value += static_cast<long double>(t.plan[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]) *
                   static_cast<long double>(t.cost[static_cast<std::size_t>(i)][static_cast<std::size_t>(j)]);
      return static_cast<double>(value);
    }
    // Walk `nodes` parents to land inside the cycle, then extract it.
    for (int hop = 0; hop < nodes; ++hop)
      v = arcs[static_cast<std::size_t>(parent_arc[static_cast<std::size_t>(v)])].from;
    std::vector<int> cycle;
    for (int u = v;;) {
      const int k = parent_arc[static_cast<std::size_t>(u)];
      cycle.push_back(k);
      u = arcs[static_cast<std::size_t>(k)].from;
      if (u == v) break;
    }
    double delta = std::numeric_limits<double>::infinity();
    for (int k : cycle) {
      const auto& a = arcs[static_cast<std::size_t>(k)];
      if (a.backward)
        delta = std::min(delta, t.plan[static_cast<std::size_t>(a.i)][static_cast<std::size_t>(a.j)]);
    }
    if (!(delta > 0.0))
      throw std::runtime_error("transport oracle: degenerate canceling cycle");
    for (int k : cycle) {
      const auto& a = arcs[static_cast<std::size_t>(k)];
      t.plan[static_cast<std::size_t>(a.i)][static_cast<std::size_t>(a.j)] += a.backward ? -delta : delta;
    }
  }
  throw std::runtime_error("transport oracle: cycle canceling failed to terminate");
}

double golden_section(const std::function<double(double)>& fn, double lo,
                      double hi, double tol) {
  const double inv_phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double a = lo, b = hi;
  double x1 = b - inv_phi * (b - a);
  double x2 = a + inv_phi * (b - a);
  double f1 = fn(x1), f2 = fn(x2);
  while (b - a > tol) {
    if (f1 <= f2) {
      b = x2;
      x2 = x1;
      f2 = f1;
      x1 = b - inv_phi * (b - a);
      f1 = fn(x1);
    } else {
      a = x1;
      x1 = x2;
      f1 = f2;
      x2 = a + inv_phi * (b - a);
      f2 = fn(x2);
    }
  }
  return (a + b) / 2.0;
}

namespace {

/** Feasible coupling on the given cells with marginals (row_mass, col_mass),
 * found by augmenting-path max-flow; empty when none exists. */
std::vector<double> feasible_point(const std::vector<w1plus::CostCell>& cells,
                                   const std::vector<int>& supp0,
                                   const std::vector<int>& supp1,
                                   std::vector<double> row_mass,
                                   std::vector<double> col_mass) {
  const int n0 = static_cast<int>(supp0.size());
  const int n1 = static_cast<int>(supp1.size());
  std::vector<double> pi(cells.size(), 0.0);
  // Row/column positions of each cell.
  const auto pos = [](const std::vector<int>& supp, int v) {
    return static_cast<int>(std::lower_bound(supp.begin(), supp.end(), v) - supp.begin());
  };
  std::vector<std::vector<int>> row_cells(static_cast<std::size_t>(n0));
  std::vector<std::vector<int>> col_cells(static_cast<std::size_t>(n1));
  for (std::size_t k = 0; k < cells.size(); ++k) {
    row_cells[static_cast<std::size_t>(pos(supp0, cells[k].x))].push_back(static_cast<int>(k));
    col_cells[static_cast<std::size_t>(pos(supp1, cells[k].y))].push_back(static_cast<int>(k));
  }

  // Repeatedly push along augmenting paths row -> cell -> column in a
  // breadth-first search over the residual structure.
  for (int guard = 0; guard < 10000; ++guard) {
    int start = -1;
    for (int i = 0; i < n0; ++i) {
      if (row_mass[static_cast<std::size_t>(i)] > kMassEps) {
        start = i;
        break;
      }
    }
    if (start < 0) break;  // all supply placed

    // BFS over rows/columns; parent edges alternate forward cell (row->col,
    // can always gain) and backward cell (col->row, needs pi > 0).
    std::vector<int> col_parent(static_cast<std::size_t>(n1), -1);  // cell index
    std::vector<int> row_parent(static_cast<std::size_t>(n0), -1);
    std::vector<char> row_seen(static_cast<std::size_t>(n0), 0);
    std::vector<char> col_seen(static_cast<std::size_t>(n1), 0);
    std::vector<int> queue{start};
    row_seen[static_cast<std::size_t>(start)] = 1;
    int found_col = -1;
    for (std::size_t qi = 0; qi < queue.size() && found_col < 0; ++qi) {
      const int node = queue[qi];
      if (node < n0) {
        for (int k : row_cells[static_cast<std::size_t>(node)]) {
          const int j = pos(supp1, cells[static_cast<std::size_t>(k)].y);
          if (col_seen[static_cast<std::size_t>(j)]) continue;
          col_seen[static_cast<std::size_t>(j)] = 1;
          col_parent[static_cast<std::size_t>(j)] = k;
          if (col_mass[static_cast<std::size_t>(j)] > kMassEps) {
            found_col = j;
            break;
          }
          queue.push_back(n0 + j);
        }
      } else {
        const int j = node - n0;
        for (int k : col_cells[static_cast<std::size_t>(j)]) {
          if (pi[static_cast<std::size_t>(k)] <= kMassEps) continue;
          const int i = pos(supp0, cells[static_cast<std::size_t>(k)].x);
          if (row_seen[static_cast<std::size_t>(i)]) continue;
          row_seen[static_cast<std::size_t>(i)] = 1;
          row_parent[static_cast<std::size_t>(i)] = k;
          queue.push_back(i);
        }
      }
    }
    if (found_col < 0) return {};  // no augmenting path: infeasible

    // Trace back to compute the bottleneck, then apply it.
    std::vector<std::pair<int, int>> path;  // (cell, +1/-1)
    int j = found_col;
    double bottleneck = col_mass[static_cast<std::size_t>(j)];
    for (;;) {
      const int k = col_parent[static_cast<std::size_t>(j)];
      path.emplace_back(k, +1);
      const int i = pos(supp0, cells[static_cast<std::size_t>(k)].x);
      if (i == start && row_parent[static_cast<std::size_t>(i)] < 0) {
        bottleneck = std::min(bottleneck, row_mass[static_cast<std::size_t>(i)]);
        break;
      }
      const int back = row_parent[static_cast<std::size_t>(i)];
      path.emplace_back(back, -1);
      bottleneck = std::min(bottleneck, pi[static_cast<std::size_t>(back)]);
      j = pos(supp1, cells[static_cast<std::size_t>(back)].y);
    }
    row_mass[static_cast<std::size_t>(start)] -= bottleneck;
    col_mass[static_cast<std::size_t>(found_col)] -= bottleneck;
    for (const auto& [k, sign] : path) pi[static_cast<std::size_t>(k)] += sign * bottleneck;
  }

  for (double r : row_mass)
    if (r > 1e-9) return {};
  for (double c : col_mass)
    if (c > 1e-9) return {};
  return pi;
}

double j_of(const std::vector<w1plus::CostCell>& cells, const std::vector<double>& pi) {
  long double total = 0.0L;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const double p = pi[k];
    if (p <= 0.0) continue;
    total += static_cast<long double>(p) * std::log(p / cells[k].c) - p;
  }
  return static_cast<double>(total);
}

}  // namespace

std::optional<double> j_grid_oracle(const w1plus::CostKernel& cost,
                                    const w1plus::Measure& f0,
                                    const w1plus::Measure& f1) {
  const auto& cells = cost.cells;
  const int n0 = static_cast<int>(cost.supp0.size());
  const int n1 = static_cast<int>(cost.supp1.size());
  std::vector<double> row_mass, col_mass;
  for (int x : cost.supp0) row_mass.push_back(f0.mass[static_cast<std::size_t>(x)]);
  for (int y : cost.supp1) col_mass.push_back(f1.mass[static_cast<std::size_t>(y)]);

  std::vector<double> base = feasible_point(cells, cost.supp0, cost.supp1, row_mass, col_mass);
  if (base.empty()) return std::nullopt;

  // Cycle space of the bipartite cell graph: grow a spanning forest over
  // rows/columns with union-find; every non-tree cell closes one independent
  // cycle, traced through the tree and recorded as a signed cell list.
  const auto pos0 = [&](int x) {
    return static_cast<int>(std::lower_bound(cost.supp0.begin(), cost.supp0.end(), x) -
                            cost.supp0.begin());
  };
  const auto pos1 = [&](int y) {
    return static_cast<int>(std::lower_bound(cost.supp1.begin(), cost.supp1.end(), y) -
                            cost.supp1.begin());
  };
  std::vector<int> parent(static_cast<std::size_t>(n0 + n1));
  for (int v = 0; v < n0 + n1; ++v) parent[static_cast<std::size_t>(v)] = v;
  const std::function<int(int)> find = [&](int v) {
    while (parent[static_cast<std::size_t>(v)] != v) {
      parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
      v = parent[static_cast<std::size_t>(v)];
    }
    return v;
  };
  std::vector<std::vector<std::pair<int, int>>> tree_adj(  // (neighbor, cell)
      static_cast<std::size_t>(n0 + n1));
  std::vector<int> off_tree;
  for (std::size_t k = 0; k < cells.size(); ++k) {
    const int u = pos0(cells[k].x);
    const int v = n0 + pos1(cells[k].y);
    if (find(u) == find(v)) {
      off_tree.push_back(static_cast<int>(k));
    } else {
      parent[static_cast<std::size_t>(find(u))] = find(v);
      tree_adj[static_cast<std::size_t>(u)].emplace_back(v, static_cast<int>(k));
      tree_adj[static_cast<std::size_t>(v)].emplace_back(u, static_cast<int>(k));
    }
  }
  const int dim = static_cast<int>(off_tree.size());
  if (dim > 3) return std::nullopt;
  if (dim == 0) return j_of(cells, base);

  // Signed incidence of each basic cycle on the cells.
  std::vector<std::vector<std::pair<int, int>>> cycles;  // (cell, sign)
  for (int k : off_tree) {
    const int u = pos0(cells[static_cast<std::size_t>(k)].x);
    const int v = n0 + pos1(cells[static_cast<std::size_t>(k)].y);
    // BFS tree path v -> u.
    std::vector<int> from(static_cast<std::size_t>(n0 + n1), -1);
    std::vector<int> via(static_cast<std::size_t>(n0 + n1), -1);
    std::vector<int> queue{v};
    from[static_cast<std::size_t>(v)] = v;
    for (std::size_t qi = 0; qi < queue.size(); ++qi) {
      for (const auto& [w, cell] : tree_adj[static_cast<std::size_t>(queue[qi])]) {
        if (from[static_cast<std::size_t>(w)] >= 0) continue;
        from[static_cast<std::size_t>(w)] = queue[qi];
        via[static_cast<std::size_t>(w)] = cell;
        queue.push_back(w);
      }
    }
    std::vector<std::pair<int, int>> cyc{{k, +1}};
    int sign = -1;  // path alternates col->row (-1) / row->col (+1) cells
    for (int node = u; node != v; node = from[static_cast<std::size_t>(node)]) {
      cyc.emplace_back(via[static_cast<std::size_t>(node)], sign);
      sign = -sign;
    }
    cycles.push_back(std::move(cyc));
  }

  // Exhaustive grid search with shrinking refinement around the incumbent.
  const int kPoints = 41;
  std::vector<double> center(static_cast<std::size_t>(dim), 0.0);
  double radius = 1.0;
  std::vector<double> best_theta = center;
  double best = std::numeric_limits<double>::infinity();
  std::vector<double> pi(cells.size());

  const auto evaluate = [&](const std::vector<double>& theta) {
    pi = base;
    for (int d = 0; d < dim; ++d) {
      for (const auto& [cell, sign] : cycles[static_cast<std::size_t>(d)])
        pi[static_cast<std::size_t>(cell)] += sign * theta[static_cast<std::size_t>(d)];
    }
    for (double p : pi)
      if (p < 0.0) return std::numeric_limits<double>::infinity();
    return j_of(cells, pi);
  };

  for (int round = 0; round < 7; ++round) {
    std::vector<int> idx(static_cast<std::size_t>(dim), 0);
    std::vector<double> theta(static_cast<std::size_t>(dim));
    for (;;) {
      for (int d = 0; d < dim; ++d) {
        theta[static_cast<std::size_t>(d)] =
            center[static_cast<std::size_t>(d)] - radius +
            2.0 * radius * idx[static_cast<std::size_t>(d)] / (kPoints - 1);
      }
      const double val = evaluate(theta);
      if (val < best) {
        best = val;
        best_theta = theta;
      }
      int d = 0;
      while (d < dim && ++idx[static_cast<std::size_t>(d)] == kPoints) {
        idx[static_cast<std::size_t>(d)] = 0;
        ++d;
      }
      if (d == dim) break;
    }
    center = best_theta;
    radius = radius / 10.0 * 1.05;  // keep the previous best strictly interior
  }
  return best;
}

}  // namespace testsupport
