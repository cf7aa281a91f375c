#include "w1plus/scaling.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <queue>
#include <string>

#include "w1plus/errors.hpp"

namespace w1plus {

namespace {

std::vector<long double> factorial_table(int max_d) {
  std::vector<long double> f(static_cast<std::size_t>(max_d) + 1, 1.0L);
  for (int k = 1; k <= max_d; ++k)
    f[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k - 1)] * k;
  return f;
}

double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;
  long double acc = 0.0L;
  for (double x : v) acc += std::exp(static_cast<long double>(x - m));
  return m + static_cast<double>(std::log(acc));
}

}  // namespace

int CostKernel::cell_index(int x, int y) const {
  auto key = std::make_pair(x, y);
  auto it = std::lower_bound(cells.begin(), cells.end(), key,
                             [](const CostCell& c, const std::pair<int, int>& k) {
                               return std::make_pair(c.x, c.y) < k;
                             });
  if (it != cells.end() && it->x == x && it->y == y)
    return static_cast<int>(it - cells.begin());
  return -1;
}

CostKernel cost_kernel(const OrientedGraph& og, const PartialOrder& po,
                       const WeightSystem& m, const DistanceTable& dist,
                       const Measure& f0, const Measure& f1) {
  CostKernel ck;
  ck.supp0 = f0.support();
  ck.supp1 = f1.support();
  int max_d = 0;
  for (const auto& row : dist)
    for (int d : row) max_d = std::max(max_d, d);
  const auto fact = factorial_table(max_d);

  for (int x : ck.supp0) {
    const auto pw = pair_weights_from(og, m, x);
    for (int y : ck.supp1) {
      if (!po.leq(x, y)) continue;
      const double mxy = (x == y) ? m.vertex[static_cast<std::size_t>(x)]
                                  : pw[static_cast<std::size_t>(y)];
      if (!(mxy > 0.0))
        fail(Errc::invalid_argument,
             "comparable support pair carries a nonpositive pair weight");
      const int d = dist[static_cast<std::size_t>(x)][static_cast<std::size_t>(y)];
      ck.cells.push_back(
          {x, y, d, static_cast<double>(static_cast<long double>(mxy) / fact[static_cast<std::size_t>(d)])});
    }
  }
  if (ck.cells.empty())
    fail(Errc::empty_face, "no comparable support pair: the admissible set is empty");
  std::vector<char> row_hit(f0.mass.size(), 0), col_hit(f1.mass.size(), 0);
  for (const auto& c : ck.cells) {
    row_hit[static_cast<std::size_t>(c.x)] = 1;
    col_hit[static_cast<std::size_t>(c.y)] = 1;
  }
  for (int x : ck.supp0) {
    if (!row_hit[static_cast<std::size_t>(x)])
      fail(Errc::empty_face, "a support point of the initial measure has no admissible partner");
  }
  for (int y : ck.supp1) {
    if (!col_hit[static_cast<std::size_t>(y)])
      fail(Errc::empty_face, "a support point of the final measure has no admissible partner");
  }
  return ck;
}

ScalingResult minimize_J(const CostKernel& cost, const Measure& f0,
                         const Measure& f1, double tol, int max_iter) {
  const int n = static_cast<int>(f0.mass.size());
  const int R = static_cast<int>(cost.supp0.size());
  const int C = static_cast<int>(cost.supp1.size());
  std::vector<int> row_of(static_cast<std::size_t>(n), -1), col_of(static_cast<std::size_t>(n), -1);
  for (int r = 0; r < R; ++r) row_of[static_cast<std::size_t>(cost.supp0[static_cast<std::size_t>(r)])] = r;
  for (int c = 0; c < C; ++c) col_of[static_cast<std::size_t>(cost.supp1[static_cast<std::size_t>(c)])] = c;

  const std::size_t m = cost.cells.size();
  std::vector<int> cr(m), cc(m);
  std::vector<double> logc(m);
  std::vector<std::vector<int>> row_cells(static_cast<std::size_t>(R)), col_cells(static_cast<std::size_t>(C));
  for (std::size_t k = 0; k < m; ++k) {
    cr[k] = row_of[static_cast<std::size_t>(cost.cells[k].x)];
    cc[k] = col_of[static_cast<std::size_t>(cost.cells[k].y)];
    logc[k] = std::log(cost.cells[k].c);
    row_cells[static_cast<std::size_t>(cr[k])].push_back(static_cast<int>(k));
    col_cells[static_cast<std::size_t>(cc[k])].push_back(static_cast<int>(k));
  }

  // Forest detection on the bipartite cell graph: rows 0..R-1, cols R..R+C-1.
  int components = 0;
  {
    std::vector<int> parent(static_cast<std::size_t>(R + C));
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int v) {
      while (parent[static_cast<std::size_t>(v)] != v) {
        parent[static_cast<std::size_t>(v)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(v)])];
        v = parent[static_cast<std::size_t>(v)];
      }
      return v;
    };
    int merges = 0;
    for (std::size_t k = 0; k < m; ++k) {
      int a = find(cr[k]), b = find(R + cc[k]);
      if (a != b) {
        parent[static_cast<std::size_t>(a)] = b;
        ++merges;
      }
    }
    components = R + C - merges;
  }
  const bool forest = (m == static_cast<std::size_t>(R + C - components));

  ScalingResult out;
  std::vector<double> mass(m, 0.0);
  std::vector<double> la(static_cast<std::size_t>(R), 0.0), lb(static_cast<std::size_t>(C), 0.0);

  if (forest) {
    // The admissible face is the single point obtained by peeling leaves of
    // the cell forest; each leaf constraint pins its remaining cell.
    out.direct = true;
    std::vector<double> row_mass(static_cast<std::size_t>(R)), col_mass(static_cast<std::size_t>(C));
    for (int r = 0; r < R; ++r)
      row_mass[static_cast<std::size_t>(r)] = f0.mass[static_cast<std::size_t>(cost.supp0[static_cast<std::size_t>(r)])];
    for (int c = 0; c < C; ++c)
      col_mass[static_cast<std::size_t>(c)] = f1.mass[static_cast<std::size_t>(cost.supp1[static_cast<std::size_t>(c)])];
    std::vector<int> degree(static_cast<std::size_t>(R + C), 0);
    std::vector<char> cell_done(m, 0);
    for (std::size_t k = 0; k < m; ++k) {
      ++degree[static_cast<std::size_t>(cr[k])];
      ++degree[static_cast<std::size_t>(R + cc[k])];
    }
    std::queue<int> leaves;
    for (int v = 0; v < R + C; ++v)
      if (degree[static_cast<std::size_t>(v)] == 1) leaves.push(v);
    while (!leaves.empty()) {
      const int v = leaves.front();
      leaves.pop();
      if (degree[static_cast<std::size_t>(v)] != 1) continue;  // became isolated meanwhile
      const bool is_row = v < R;
      int k_last = -1;
      const auto& incident = is_row ? row_cells[static_cast<std::size_t>(v)]
                                    : col_cells[static_cast<std::size_t>(v - R)];
      for (int k : incident) {
        if (!cell_done[static_cast<std::size_t>(k)]) k_last = k;
      }
      if (k_last < 0) continue;
      const double amount = is_row ? row_mass[static_cast<std::size_t>(v)]
                                   : col_mass[static_cast<std::size_t>(v - R)];
      if (amount < -1e-12)
        fail(Errc::empty_face, "no nonnegative coupling exists on the admissible pairs");
      mass[static_cast<std::size_t>(k_last)] = std::max(amount, 0.0);
      row_mass[static_cast<std::size_t>(cr[static_cast<std::size_t>(k_last)])] -= mass[static_cast<std::size_t>(k_last)];
      col_mass[static_cast<std::size_t>(cc[static_cast<std::size_t>(k_last)])] -= mass[static_cast<std::size_t>(k_last)];
      cell_done[static_cast<std::size_t>(k_last)] = 1;
      for (int u : {cr[static_cast<std::size_t>(k_last)], R + cc[static_cast<std::size_t>(k_last)]}) {
        if (--degree[static_cast<std::size_t>(u)] == 1) leaves.push(u);
      }
    }
    for (std::size_t k = 0; k < m; ++k) {
      if (!cell_done[k])
        fail(Errc::empty_face, "leaf peeling left a cell unresolved");
      if (!(mass[k] > 0.0))
        fail(Errc::support_violation,
             "rigid admissible face carries zero mass on an admissible pair");
    }
    for (int r = 0; r < R; ++r) {
      if (std::abs(row_mass[static_cast<std::size_t>(r)]) > 1e-9)
        fail(Errc::empty_face, "admissible pairs cannot balance the marginals");
    }
    for (int c = 0; c < C; ++c) {
      if (std::abs(col_mass[static_cast<std::size_t>(c)]) > 1e-9)
        fail(Errc::empty_face, "admissible pairs cannot balance the marginals");
    }
    // Recover the product form pi = c a b by propagating logs over each tree.
    std::vector<char> row_set(static_cast<std::size_t>(R), 0), col_set(static_cast<std::size_t>(C), 0);
    for (int r0 = 0; r0 < R; ++r0) {
      if (row_set[static_cast<std::size_t>(r0)]) continue;
      la[static_cast<std::size_t>(r0)] = 0.0;
      row_set[static_cast<std::size_t>(r0)] = 1;
      std::queue<int> bfs;  // node encoding as above
      bfs.push(r0);
      while (!bfs.empty()) {
        const int v = bfs.front();
        bfs.pop();
        const bool is_row = v < R;
        const auto& incident = is_row ? row_cells[static_cast<std::size_t>(v)]
                                      : col_cells[static_cast<std::size_t>(v - R)];
        for (int k : incident) {
          const double l = std::log(mass[static_cast<std::size_t>(k)]) - logc[static_cast<std::size_t>(k)];
          const int r = cr[static_cast<std::size_t>(k)];
          const int c = cc[static_cast<std::size_t>(k)];
          if (is_row && !col_set[static_cast<std::size_t>(c)]) {
            lb[static_cast<std::size_t>(c)] = l - la[static_cast<std::size_t>(r)];
            col_set[static_cast<std::size_t>(c)] = 1;
            bfs.push(R + c);
          } else if (!is_row && !row_set[static_cast<std::size_t>(r)]) {
            la[static_cast<std::size_t>(r)] = l - lb[static_cast<std::size_t>(c)];
            row_set[static_cast<std::size_t>(r)] = 1;
            bfs.push(r);
          }
        }
      }
    }
  } else {
    // Alternating log-domain scaling towards the marginals.
    std::vector<double> lf0(static_cast<std::size_t>(R)), lf1(static_cast<std::size_t>(C));
    for (int r = 0; r < R; ++r)
      lf0[static_cast<std::size_t>(r)] =
          std::log(f0.mass[static_cast<std::size_t>(cost.supp0[static_cast<std::size_t>(r)])]);
    for (int c = 0; c < C; ++c)
      lf1[static_cast<std::size_t>(c)] =
          std::log(f1.mass[static_cast<std::size_t>(cost.supp1[static_cast<std::size_t>(c)])]);

    std::vector<double> terms;
    bool converged = false;
    for (int it = 0; it < max_iter && !converged; ++it) {
      for (int r = 0; r < R; ++r) {
        terms.clear();
        for (int k : row_cells[static_cast<std::size_t>(r)])
          terms.push_back(logc[static_cast<std::size_t>(k)] + lb[static_cast<std::size_t>(cc[static_cast<std::size_t>(k)])]);
        la[static_cast<std::size_t>(r)] = lf0[static_cast<std::size_t>(r)] - log_sum_exp(terms);
      }
      for (int c = 0; c < C; ++c) {
        terms.clear();
        for (int k : col_cells[static_cast<std::size_t>(c)])
          terms.push_back(logc[static_cast<std::size_t>(k)] + la[static_cast<std::size_t>(cr[static_cast<std::size_t>(k)])]);
        lb[static_cast<std::size_t>(c)] = lf1[static_cast<std::size_t>(c)] - log_sum_exp(terms);
      }
      // Marginal error and objective value of the current iterate.
      for (std::size_t k = 0; k < m; ++k)
        mass[k] = std::exp(logc[k] + la[static_cast<std::size_t>(cr[k])] + lb[static_cast<std::size_t>(cc[k])]);
      long double J = 0.0L;
      for (std::size_t k = 0; k < m; ++k)
        J += static_cast<long double>(mass[k]) *
                 (la[static_cast<std::size_t>(cr[k])] + lb[static_cast<std::size_t>(cc[k])]) -
             mass[k];
      out.j_trace.push_back(static_cast<double>(J));
      std::vector<long double> row_sum(static_cast<std::size_t>(R), 0.0L), col_sum(static_cast<std::size_t>(C), 0.0L);
      for (std::size_t k = 0; k < m; ++k) {
        row_sum[static_cast<std::size_t>(cr[k])] += mass[k];
        col_sum[static_cast<std::size_t>(cc[k])] += mass[k];
      }
      double err = 0.0;
      for (int r = 0; r < R; ++r)
        err = std::max(err, std::abs(static_cast<double>(row_sum[static_cast<std::size_t>(r)]) -
                                     f0.mass[static_cast<std::size_t>(cost.supp0[static_cast<std::size_t>(r)])]));
      for (int c = 0; c < C; ++c)
        err = std::max(err, std::abs(static_cast<double>(col_sum[static_cast<std::size_t>(c)]) -
                                     f1.mass[static_cast<std::size_t>(cost.supp1[static_cast<std::size_t>(c)])]));
      out.iterations = it + 1;
      converged = (err <= tol);
    }
    if (!converged)
      fail(Errc::no_convergence, "alternating scaling did not reach the marginal tolerance in " +
                                     std::to_string(max_iter) + " sweeps");
  }

  out.pi.entries.reserve(m);
  long double cost_acc = 0.0L;
  for (std::size_t k = 0; k < m; ++k) {
    out.pi.entries.push_back({cost.cells[k].x, cost.cells[k].y, mass[k]});
    cost_acc += static_cast<long double>(mass[k]) * cost.cells[k].distance;
  }
  out.pi.cost = static_cast<double>(cost_acc);
  out.a.assign(static_cast<std::size_t>(n), 0.0);
  out.b.assign(static_cast<std::size_t>(n), 0.0);
  for (int r = 0; r < R; ++r)
    out.a[static_cast<std::size_t>(cost.supp0[static_cast<std::size_t>(r)])] =
        std::exp(la[static_cast<std::size_t>(r)]);
  for (int c = 0; c < C; ++c)
    out.b[static_cast<std::size_t>(cost.supp1[static_cast<std::size_t>(c)])] =
        std::exp(lb[static_cast<std::size_t>(c)]);
  out.J = J_value(cost, out.pi);

  const auto row = out.pi.row_marginal(n);
  const auto col = out.pi.col_marginal(n);
  double err = 0.0;
  for (int v = 0; v < n; ++v) {
    err = std::max(err, std::abs(row[static_cast<std::size_t>(v)] - f0.mass[static_cast<std::size_t>(v)]));
    err = std::max(err, std::abs(col[static_cast<std::size_t>(v)] - f1.mass[static_cast<std::size_t>(v)]));
  }
  out.marginal_error = err;
  return out;
}

double J_value(const CostKernel& cost, const Coupling& pi) {
  long double acc = 0.0L;
  for (const auto& e : pi.entries) {
    const int k = cost.cell_index(e.x, e.y);
    if (k < 0)
      fail(Errc::support_violation, "coupling entry outside the admissible pairs");
    if (e.mass < -1e-12)
      fail(Errc::support_violation, "coupling entry with negative mass");
    if (e.mass <= 0.0) continue;  // the integrand vanishes at zero mass
    acc += static_cast<long double>(e.mass) *
               std::log(static_cast<long double>(e.mass) / cost.cells[static_cast<std::size_t>(k)].c) -
           e.mass;
  }
  return static_cast<double>(acc);
}

}  // namespace w1plus
