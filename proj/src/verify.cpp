#include "w1plus/verify.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <random>
#include <string>

#include "w1plus/errors.hpp"

namespace w1plus {

namespace {

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.3g", v);
  return buf;
}

std::vector<double> uniform_grid(int points, double lo = 0.0, double hi = 1.0) {
  std::vector<double> g(static_cast<std::size_t>(points));
  for (int i = 0; i < points; ++i)
    g[static_cast<std::size_t>(i)] = lo + (hi - lo) * i / (points - 1);
  return g;
}

/** Pascal triangle up to row `max_n`, exact in double at desk scale. */
std::vector<std::vector<double>> binomial_table(int max_n) {
  std::vector<std::vector<double>> b(static_cast<std::size_t>(max_n) + 1);
  for (int r = 0; r <= max_n; ++r) {
    b[static_cast<std::size_t>(r)].assign(static_cast<std::size_t>(r) + 1, 1.0);
    for (int k = 1; k < r; ++k)
      b[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] =
          b[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(k - 1)] +
          b[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(k)];
  }
  return b;
}

bool is_path_graph(const Graph& g) {
  if (g.vertex_count() == 1) return true;
  int ends = 0;
  for (int v = 0; v < g.vertex_count(); ++v) {
    const std::size_t deg = g.neighbors(v).size();
    if (deg == 1)
      ++ends;
    else if (deg != 2)
      return false;
  }
  return ends == 2;
}

int active_diameter(const OrientedGraph& og, const DistanceTable& dist) {
  int d = 0;
  for (int u : og.active)
    for (int v : og.active)
      d = std::max(d, dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(v)]);
  return d;
}

/** Longest oriented path starting at each vertex (arc count to a sink). */
std::vector<int> longest_from(const OrientedGraph& og) {
  std::vector<int> L(static_cast<std::size_t>(og.n), 0);
  for (auto it = og.topo.rbegin(); it != og.topo.rend(); ++it) {
    for (int k : og.out_arcs[static_cast<std::size_t>(*it)]) {
      const int head = og.arcs[static_cast<std::size_t>(k)].second;
      L[static_cast<std::size_t>(*it)] =
          std::max(L[static_cast<std::size_t>(*it)], L[static_cast<std::size_t>(head)] + 1);
    }
  }
  return L;
}

/** Longest oriented path ending at each vertex (arc count from a source). */
std::vector<int> longest_into(const OrientedGraph& og) {
  std::vector<int> L(static_cast<std::size_t>(og.n), 0);
  for (int v : og.topo) {
    for (int k : og.in_arcs[static_cast<std::size_t>(v)]) {
      const int tail = og.arcs[static_cast<std::size_t>(k)].first;
      L[static_cast<std::size_t>(v)] =
          std::max(L[static_cast<std::size_t>(v)], L[static_cast<std::size_t>(tail)] + 1);
    }
  }
  return L;
}

/** Up to `cap` maximal oriented paths (source to sink), DFS order. */
std::vector<std::vector<int>> extremal_paths(const OrientedGraph& og, std::size_t cap) {
  std::vector<std::vector<int>> paths;
  std::vector<int> current;
  auto dfs = [&](auto&& self, int v) -> void {
    if (paths.size() >= cap) return;
    current.push_back(v);
    if (og.out_arcs[static_cast<std::size_t>(v)].empty()) {
      paths.push_back(current);
    } else {
      for (int k : og.out_arcs[static_cast<std::size_t>(v)]) {
        self(self, og.arcs[static_cast<std::size_t>(k)].second);
        if (paths.size() >= cap) break;
      }
    }
    current.pop_back();
  };
  for (int s : og.sources) {
    if (og.out_arcs[static_cast<std::size_t>(s)].empty()) continue;  // fixed point
    dfs(dfs, s);
    if (paths.size() >= cap) break;
  }
  return paths;
}

/**
 * Interpolating polynomial through Chebyshev points of [0, 1], evaluated by
 * the barycentric formula (numerically stable for the degrees at hand).
 */
class ChebInterpolant {
 public:
  ChebInterpolant(int degree, const std::function<double(double)>& f) {
    constexpr double kPi = 3.14159265358979323846;
    const int n = degree;  // n + 1 nodes
    for (int j = 0; j <= n; ++j) {
      const double x = n == 0 ? 0.5 : 0.5 + 0.5 * std::cos(j * kPi / n);
      nodes_.push_back(x);
      values_.push_back(f(x));
      double w = (j % 2 == 0) ? 1.0 : -1.0;
      if (j == 0 || j == n) w *= 0.5;
      weights_.push_back(w);
    }
  }

  double operator()(double t) const {
    long double num = 0.0L, den = 0.0L;
    for (std::size_t j = 0; j < nodes_.size(); ++j) {
      const double d = t - nodes_[j];
      if (std::abs(d) < 1e-13) return values_[j];
      const long double q = weights_[j] / d;
      num += q * values_[j];
      den += q;
    }
    return static_cast<double>(num / den);
  }

 private:
  std::vector<double> nodes_, values_, weights_;
};

Measure measure_from_densities(std::vector<double> densities) {
  Measure m;
  m.mass = std::move(densities);
  return m;
}

/** Collects checks; a thrown Error inside a body becomes a failing entry. */
struct Checker {
  VerificationReport rep;

  void add(std::string name, bool applicable, bool pass, double residual,
           double tolerance, std::string detail) {
    rep.checks.push_back({std::move(name), applicable, pass, residual, tolerance,
                          std::move(detail)});
  }

  void residual_check(std::string name, double residual, double tolerance,
                      std::string detail = "", bool applicable = true) {
    add(std::move(name), applicable, residual <= tolerance, residual, tolerance,
        std::move(detail));
  }

  void flag_check(std::string name, bool ok, double residual,
                  std::string detail = "", bool applicable = true) {
    add(std::move(name), applicable, ok, residual, 0.0, std::move(detail));
  }

  void not_applicable(std::string name, std::string detail) {
    add(std::move(name), false, true, 0.0, 0.0, std::move(detail));
  }

  template <class Body>
  void guarded(const char* name, Body&& body) {
    try {
      body();
    } catch (const Error& e) {
      add(name, true, false, std::numeric_limits<double>::quiet_NaN(), 0.0,
          std::string("error: ") + e.what());
    }
  }
};

}  // namespace

const CheckResult* VerificationReport::find(const std::string& name) const {
  for (const auto& c : checks)
    if (c.name == name) return &c;
  return nullptr;
}

std::vector<double> thinning_reference(const Graph& g, const DistanceTable& dist,
                                       int dirac, const Measure& f1, double t) {
  const int n = g.vertex_count();
  // Positions counted from the Dirac end; on a path they are 0..n-1, each
  // taken exactly once.
  std::vector<int> at_pos(static_cast<std::size_t>(n), -1);
  for (int v = 0; v < n; ++v) {
    const int p = dist[static_cast<std::size_t>(dirac)][static_cast<std::size_t>(v)];
    if (p < 0 || p >= n || at_pos[static_cast<std::size_t>(p)] >= 0)
      fail(Errc::invalid_argument, "thinning reference requires a path with a Dirac end");
    at_pos[static_cast<std::size_t>(p)] = v;
  }
  const auto binom = binomial_table(n - 1);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k) {
    long double acc = 0.0L;
    for (int l = k; l < n; ++l) {
      const double mass = f1.mass[static_cast<std::size_t>(at_pos[static_cast<std::size_t>(l)])];
      if (mass <= 0.0) continue;
      acc += static_cast<long double>(mass) *
             binom[static_cast<std::size_t>(l)][static_cast<std::size_t>(k)] *
             std::pow(static_cast<long double>(t), k) *
             std::pow(static_cast<long double>(1.0 - t), l - k);
    }
    out[static_cast<std::size_t>(at_pos[static_cast<std::size_t>(k)])] =
        static_cast<double>(acc);
  }
  return out;
}

std::vector<double> contraction_reference(const Graph& g, const DistanceTable& dist,
                                          int o, const Measure& f1, double t) {
  const int n = g.vertex_count();
  int max_d = 0;
  for (int v = 0; v < n; ++v)
    max_d = std::max(max_d, dist[static_cast<std::size_t>(o)][static_cast<std::size_t>(v)]);
  const auto binom = binomial_table(max_d);
  std::vector<double> out(static_cast<std::size_t>(n), 0.0);
  for (int y = 0; y < n; ++y) {
    const double mass = f1.mass[static_cast<std::size_t>(y)];
    if (mass <= 0.0) continue;
    if (y == o) {
      out[static_cast<std::size_t>(o)] += mass;
      continue;
    }
    const auto geos = geodesics_between(g, dist, o, y, 20000);
    const double share = mass / static_cast<double>(geos.size());
    for (const auto& gamma : geos) {
      const int d = static_cast<int>(gamma.size()) - 1;
      for (int k = 0; k <= d; ++k) {
        out[static_cast<std::size_t>(gamma[static_cast<std::size_t>(k)])] +=
            share * static_cast<double>(
                        binom[static_cast<std::size_t>(d)][static_cast<std::size_t>(k)] *
                        std::pow(static_cast<long double>(t), k) *
                        std::pow(static_cast<long double>(1.0 - t), d - k));
      }
    }
  }
  return out;
}

VerificationReport verify(const PipelineResult& r, const Tolerances& tol) {
  Checker ck;
  const Graph& g = r.graph;
  const OrientedGraph& og = r.oriented;
  const GeodesicCurve& c = r.curve;
  const PartialOrder po = order(og);
  const auto grid11 = uniform_grid(11);

  // --- measure-level properties of the curve ---------------------------------
  ck.guarded("mass_normalization", [&] {
    double worst = 0.0;
    for (double t : grid11) {
      const auto f = c.densities(t);
      long double sum = 0.0L;
      double min_f = 0.0;
      for (double v : f) {
        sum += v;
        min_f = std::min(min_f, v);
      }
      worst = std::max(worst, std::abs(static_cast<double>(sum - 1.0L)));
      worst = std::max(worst, -min_f);
    }
    ck.residual_check("mass_normalization", worst, tol.mass,
                      "total mass and nonnegativity over an 11-point grid");
  });

  ck.guarded("boundary_initial", [&] {
    const auto f = c.densities(0.0);
    double worst = 0.0;
    for (int v = 0; v < g.vertex_count(); ++v)
      worst = std::max(worst, std::abs(f[static_cast<std::size_t>(v)] -
                                       r.f0.mass[static_cast<std::size_t>(v)]));
    ck.residual_check("boundary_initial", worst, tol.mass);
  });

  ck.guarded("boundary_final", [&] {
    const auto f = c.densities(1.0);
    double worst = 0.0;
    for (int v = 0; v < g.vertex_count(); ++v)
      worst = std::max(worst, std::abs(f[static_cast<std::size_t>(v)] -
                                       r.f1.mass[static_cast<std::size_t>(v)]));
    ck.residual_check("boundary_final", worst, tol.mass);
  });

  ck.guarded("flux_positive", [&] {
    if (og.arcs.empty()) {
      ck.flag_check("flux_positive", true, 0.0, "no oriented arcs (stationary curve)");
      return;
    }
    double min_g = std::numeric_limits<double>::infinity();
    for (double t : uniform_grid(19, 0.05, 0.95))
      for (std::size_t k = 0; k < og.arcs.size(); ++k)
        min_g = std::min(min_g, c.eval_g(static_cast<int>(k), t));
    ck.flag_check("flux_positive", min_g > 0.0, std::max(0.0, -min_g),
                  "min arc flux over interior grid = " + fmt(min_g));
  });

  ck.guarded("orientation_endpoints", [&] {
    ck.flag_check("orientation_endpoints", !og.sources.empty() && !og.sinks.empty(),
                  og.sources.empty() || og.sinks.empty() ? 1.0 : 0.0,
                  "source and sink sets are nonempty");
  });

  // --- polynomial identities --------------------------------------------------
  ck.guarded("continuity_vertex", [&] {
    const auto div_g = divergence_vertex(og, c.g);
    double worst = 0.0;
    for (int v : og.active) {
      Polynomial res = c.f[static_cast<std::size_t>(v)].derivative();
      res += div_g[static_cast<std::size_t>(v)];
      worst = std::max(worst, res.max_abs_coefficient());
    }
    ck.residual_check("continuity_vertex", worst, tol.coefficient,
                      "coefficients of df/dt + div g");
  });

  ck.guarded("continuity_arc", [&] {
    const auto div_h = divergence_arc(og, c.triples, c.h);
    double worst = 0.0;
    for (std::size_t k = 0; k < og.arcs.size(); ++k) {
      Polynomial res = c.g[k].derivative();
      res += div_h[k];
      worst = std::max(worst, res.max_abs_coefficient());
    }
    ck.residual_check("continuity_arc", worst, tol.coefficient,
                      "coefficients of dg/dt + div h");
  });

  ck.guarded("flux_exchange", [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < c.triples.triples.size(); ++i) {
      const auto [k1, k2] = c.triples.arc_pairs[i];
      const int x1 = c.triples.triples[i][1];
      Polynomial res = c.f[static_cast<std::size_t>(x1)] * c.h[i] -
                       c.g[static_cast<std::size_t>(k1)] * c.g[static_cast<std::size_t>(k2)];
      worst = std::max(worst, res.max_abs_coefficient());
    }
    ck.residual_check("flux_exchange", worst, tol.coefficient,
                      "coefficients of f(x1) h - g g over oriented triples");
  });

  ck.guarded("pq_ode", [&] {
    double worst = 0.0;
    std::vector<Polynomial> q_t(static_cast<std::size_t>(og.n));
    for (int v : og.active) q_t[static_cast<std::size_t>(v)] = c.pq.Q_in_t(v);
    for (int v : og.active) {
      Polynomial pres = c.pq.P[static_cast<std::size_t>(v)].derivative();
      for (int k : og.in_arcs[static_cast<std::size_t>(v)]) {
        const int tail = og.arcs[static_cast<std::size_t>(k)].first;
        pres -= c.pq.P[static_cast<std::size_t>(tail)] *
                (c.m.arc[static_cast<std::size_t>(k)] /
                 c.m.vertex[static_cast<std::size_t>(v)]);
      }
      worst = std::max(worst, pres.max_abs_coefficient());

      Polynomial qres = q_t[static_cast<std::size_t>(v)].derivative();
      for (int k : og.out_arcs[static_cast<std::size_t>(v)]) {
        const int head = og.arcs[static_cast<std::size_t>(k)].second;
        qres += q_t[static_cast<std::size_t>(head)] *
                (c.m.arc[static_cast<std::size_t>(k)] /
                 c.m.vertex[static_cast<std::size_t>(v)]);
      }
      worst = std::max(worst, qres.max_abs_coefficient());
    }
    ck.residual_check("pq_ode", worst, tol.coefficient,
                      "coefficients of dP/dt - KP and dQ/dt + K*Q");
  });

  ck.guarded("degree_bound", [&] {
    const int diam = active_diameter(og, r.dist);
    int worst = 0;
    for (int v : og.active)
      worst = std::max(worst, c.f[static_cast<std::size_t>(v)].degree());
    ck.flag_check("degree_bound", worst <= diam,
                  static_cast<double>(std::max(0, worst - diam)),
                  "max deg f = " + std::to_string(worst) + ", active diameter = " +
                      std::to_string(diam));
  });

  // --- conservation and geodesy ----------------------------------------------
  ck.guarded("edge_sum", [&] {
    double worst = 0.0;
    for (double t : grid11) {
      long double sum = 0.0L;
      for (std::size_t k = 0; k < og.arcs.size(); ++k)
        sum += c.eval_g(static_cast<int>(k), t);
      worst = std::max(worst, std::abs(static_cast<double>(sum) - r.transport.value));
    }
    ck.residual_check("edge_sum", worst, tol.edge_sum,
                      "sum of arc fluxes vs the transport value");
  });

  ck.guarded("intermediate_w1", [&] {
    const std::vector<std::pair<double, double>> spans{
        {0.1, 0.9}, {0.25, 0.5}, {0.4, 0.75}, {0.05, 0.35}, {0.65, 0.95}};
    double worst = 0.0;
    for (const auto& [s, t] : spans) {
      const Measure fs = measure_from_densities(c.densities(s));
      const Measure ft = measure_from_densities(c.densities(t));
      const double val = w1(g, r.dist, fs, ft).value;
      worst = std::max(worst, std::abs(val - (t - s) * r.transport.value));
    }
    ck.residual_check("intermediate_w1", worst, tol.intermediate_w1,
                      "|W1(f_s, f_t) - (t-s) W1| over 5 sampled spans");
  });

  // --- kernel algebra ----------------------------------------------------------
  const Kernels kern(og, c.m);

  ck.guarded("kernel_row_sums", [&] {
    double worst = 0.0;
    for (int v : og.active) {
      if (!og.is_source(v)) {
        // K row of a non-source sums to 1.
        long double s = 0.0L;
        for (int k : og.in_arcs[static_cast<std::size_t>(v)])
          s += c.m.arc[static_cast<std::size_t>(k)];
        worst = std::max(worst,
                         std::abs(static_cast<double>(
                             s / c.m.vertex[static_cast<std::size_t>(v)] - 1.0L)));
      }
      if (!og.is_sink(v)) {
        long double s = 0.0L;
        for (int k : og.out_arcs[static_cast<std::size_t>(v)])
          s += c.m.arc[static_cast<std::size_t>(k)];
        worst = std::max(worst,
                         std::abs(static_cast<double>(
                             s / c.m.vertex[static_cast<std::size_t>(v)] - 1.0L)));
      }
    }
    ck.residual_check("kernel_row_sums", worst, tol.mass,
                      "K rows sum to 1 off sources, K* rows off sinks");
  });

  ck.guarded("kernel_adjoint", [&] {
    std::mt19937_64 rng(101);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    double worst = 0.0;
    for (int trial = 0; trial < 5; ++trial) {
      std::vector<double> u(static_cast<std::size_t>(og.n), 0.0);
      std::vector<double> v(static_cast<std::size_t>(og.n), 0.0);
      for (int x : og.active) {
        u[static_cast<std::size_t>(x)] = unit(rng);
        v[static_cast<std::size_t>(x)] = unit(rng);
      }
      const double lhs = kern.inner(kern.apply_K(u), v);
      const double rhs = kern.inner(u, kern.apply_Kstar(v));
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, std::abs(lhs)));
    }
    ck.residual_check("kernel_adjoint", worst, tol.mass,
                      "<Ku, v> = <u, K*v> for 5 random pairs");
  });

  ck.guarded("kernel_iterated", [&] {
    double worst = 0.0;
    int sampled = 0;
    for (int u : og.active) {
      if (sampled >= 200) break;
      const auto pw = pair_weights_from(og, c.m, u);
      // Targets in increasing distance so one power run covers them all.
      std::vector<std::pair<int, int>> targets;  // (distance, w)
      for (int w : og.active) {
        if (w != u && pw[static_cast<std::size_t>(w)] > 0.0)
          targets.emplace_back(
              r.dist[static_cast<std::size_t>(u)][static_cast<std::size_t>(w)], w);
      }
      std::sort(targets.begin(), targets.end());
      std::vector<double> vec(static_cast<std::size_t>(og.n), 0.0);
      vec[static_cast<std::size_t>(u)] = 1.0;
      int applied = 0;
      for (const auto& [n, w] : targets) {
        if (sampled >= 200) break;
        while (applied < n) {
          vec = kern.apply_K(vec);
          ++applied;
        }
        // (K^n delta_u)(w) = m(u, w)/m(w) at distance n.
        const double expected = pw[static_cast<std::size_t>(w)] /
                                c.m.vertex[static_cast<std::size_t>(w)];
        worst = std::max(worst, std::abs(vec[static_cast<std::size_t>(w)] - expected) /
                                    std::max(1.0, expected));
        ++sampled;
      }
    }
    ck.residual_check("kernel_iterated", worst, tol.mass,
                      "K^n delta_u at distance-n targets, " +
                          std::to_string(sampled) + " pairs");
  });

  ck.guarded("kernel_nilpotent", [&] {
    const int diam = active_diameter(og, r.dist);
    std::vector<double> u(static_cast<std::size_t>(og.n), 0.0);
    for (int v : og.active) u[static_cast<std::size_t>(v)] = 1.0;
    std::vector<double> w = u;
    for (int i = 0; i <= diam; ++i) {
      u = kern.apply_K(u);
      w = kern.apply_Kstar(w);
    }
    double worst = 0.0;
    for (int v = 0; v < og.n; ++v)
      worst = std::max(worst, std::max(std::abs(u[static_cast<std::size_t>(v)]),
                                       std::abs(w[static_cast<std::size_t>(v)])));
    ck.flag_check("kernel_nilpotent", worst == 0.0, worst,
                  "K^(diam+1) and (K*)^(diam+1) vanish identically");
  });

  // --- weight system ------------------------------------------------------------
  ck.guarded("weights_conservation", [&] {
    double worst = 0.0;
    for (int v : og.active) {
      const double mv = c.m.vertex[static_cast<std::size_t>(v)];
      if (!og.is_sink(v)) {
        long double s = 0.0L;
        for (int k : og.out_arcs[static_cast<std::size_t>(v)])
          s += c.m.arc[static_cast<std::size_t>(k)];
        worst = std::max(worst, std::abs(static_cast<double>(s) - mv) / std::max(1.0, mv));
      }
      if (!og.is_source(v)) {
        long double s = 0.0L;
        for (int k : og.in_arcs[static_cast<std::size_t>(v)])
          s += c.m.arc[static_cast<std::size_t>(k)];
        worst = std::max(worst, std::abs(static_cast<double>(s) - mv) / std::max(1.0, mv));
      }
    }
    ck.residual_check("weights_conservation", worst, tol.mass,
                      "arc weights are divergence-free against vertex weights");
  });

  ck.guarded("weights_chain_consistency", [&] {
    // Pair weights cross-checked against explicit oriented-path enumeration,
    // and the chain formula m(x,z) m(z,y) / m(z) = m(x,z,y) on sampled triples.
    double worst = 0.0;
    int pairs_checked = 0, triples_checked = 0;
    for (int u : og.active) {
      if (pairs_checked >= 64) break;
      const auto pw = pair_weights_from(og, c.m, u);
      for (int w : og.active) {
        if (w == u || pw[static_cast<std::size_t>(w)] <= 0.0) continue;
        if (pairs_checked >= 64) break;
        // Enumerate oriented paths u -> w, capped.
        long double total = 0.0L;
        std::size_t count = 0;
        bool capped = false;
        // Iterative DFS carrying the path weight product.
        std::vector<std::pair<int, long double>> todo{{u, 1.0L}};
        while (!todo.empty()) {
          auto [v, acc] = todo.back();
          todo.pop_back();
          if (v == w) {
            total += acc;
            if (++count > 200) {
              capped = true;
              break;
            }
            continue;
          }
          for (int k : og.out_arcs[static_cast<std::size_t>(v)]) {
            const int head = og.arcs[static_cast<std::size_t>(k)].second;
            // Only follow arcs that can still reach w (distance filter).
            const int dvw = r.dist[static_cast<std::size_t>(v)][static_cast<std::size_t>(w)];
            const int dhw = r.dist[static_cast<std::size_t>(head)][static_cast<std::size_t>(w)];
            if (dhw != dvw - 1) continue;
            long double next = acc * c.m.arc[static_cast<std::size_t>(k)];
            if (head != w) next /= c.m.vertex[static_cast<std::size_t>(head)];
            todo.emplace_back(head, next);
          }
        }
        if (capped) continue;
        const double expected = pw[static_cast<std::size_t>(w)];
        worst = std::max(worst, std::abs(static_cast<double>(total) - expected) /
                                    std::max(1.0, expected));
        ++pairs_checked;
      }
    }
    for (std::size_t i = 0; i < c.triples.triples.size() && triples_checked < 64; ++i) {
      const auto [x0, x1, x2] = c.triples.triples[i];
      const auto pw0 = pair_weights_from(og, c.m, x0);
      const double lhs = pw0[static_cast<std::size_t>(x1)] *
                         pair_weights_from(og, c.m, x1)[static_cast<std::size_t>(x2)] /
                         c.m.vertex[static_cast<std::size_t>(x1)];
      const std::vector<int> chain{x0, x1, x2};
      const double rhs = tuple_weight(og, c.m, chain);
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(1.0, rhs));
      ++triples_checked;
    }
    ck.residual_check("weights_chain_consistency", worst, tol.mass,
                      std::to_string(pairs_checked) + " enumerated pairs, " +
                          std::to_string(triples_checked) + " chain triples");
  });

  // --- coupling and scaling -------------------------------------------------------
  ck.guarded("witness_marginals", [&] {
    const auto row = r.transport.witness.row_marginal(og.n);
    const auto col = r.transport.witness.col_marginal(og.n);
    double worst = 0.0;
    for (int v = 0; v < og.n; ++v) {
      worst = std::max(worst, std::abs(row[static_cast<std::size_t>(v)] -
                                       r.f0.mass[static_cast<std::size_t>(v)]));
      worst = std::max(worst, std::abs(col[static_cast<std::size_t>(v)] -
                                       r.f1.mass[static_cast<std::size_t>(v)]));
    }
    ck.residual_check("witness_marginals", worst, tol.marginals);
  });

  ck.guarded("coupling_marginals", [&] {
    const auto row = r.scaling.pi.row_marginal(og.n);
    const auto col = r.scaling.pi.col_marginal(og.n);
    double worst = 0.0;
    for (int v = 0; v < og.n; ++v) {
      worst = std::max(worst, std::abs(row[static_cast<std::size_t>(v)] -
                                       r.f0.mass[static_cast<std::size_t>(v)]));
      worst = std::max(worst, std::abs(col[static_cast<std::size_t>(v)] -
                                       r.f1.mass[static_cast<std::size_t>(v)]));
    }
    ck.residual_check("coupling_marginals", worst,
                      std::max(r.config.scaling_tol, 1e-14),
                      "marginals of the product-form coupling");
  });

  ck.guarded("coupling_support", [&] {
    double min_mass = 0.0;
    bool on_cells = r.scaling.pi.entries.size() == r.cost.cells.size();
    bool comparable = true;
    for (std::size_t i = 0; i < r.scaling.pi.entries.size(); ++i) {
      const auto& e = r.scaling.pi.entries[i];
      min_mass = std::min(min_mass, e.mass);
      if (on_cells &&
          (e.x != r.cost.cells[i].x || e.y != r.cost.cells[i].y))
        on_cells = false;
      if (!po.leq(e.x, e.y)) comparable = false;
      if (r.f0.mass[static_cast<std::size_t>(e.x)] <= 0.0 ||
          r.f1.mass[static_cast<std::size_t>(e.y)] <= 0.0)
        comparable = false;
    }
    ck.flag_check("coupling_support", on_cells && comparable && min_mass >= -1e-15,
                  std::max(0.0, -min_mass),
                  "entries live on admissible comparable support pairs");
  });

  ck.guarded("coupling_optimal", [&] {
    const double cost = coupling_cost(r.dist, r.scaling.pi);
    const double residual = std::abs(cost - r.transport.value);
    const bool ok = is_optimal(g, r.dist, r.f0, r.f1, r.scaling.pi, tol.coupling_cost);
    ck.add("coupling_optimal", true, ok && residual <= tol.coupling_cost, residual,
           tol.coupling_cost, "cost of the product coupling vs W1");
  });

  ck.guarded("product_form", [&] {
    double worst = 0.0;
    for (std::size_t i = 0; i < r.cost.cells.size(); ++i) {
      const auto& cell = r.cost.cells[i];
      const double prod = cell.c * r.scaling.a[static_cast<std::size_t>(cell.x)] *
                          r.scaling.b[static_cast<std::size_t>(cell.y)];
      const double pi = r.scaling.pi.entries[i].mass;
      if (prod <= 0.0) {
        worst = std::max(worst, std::abs(pi));
        continue;
      }
      worst = std::max(worst, std::abs(pi / prod - 1.0));
    }
    ck.residual_check("product_form", worst, tol.product_form,
                      "pi(x, y) = c(x, y) a(x) b(y) on every admissible pair");
  });

  ck.guarded("scaling_j_monotone", [&] {
    if (r.scaling.direct) {
      ck.not_applicable("scaling_j_monotone", "face is a single point (no iteration)");
      return;
    }
    double worst = 0.0;
    for (std::size_t i = 0; i + 1 < r.scaling.j_trace.size(); ++i)
      worst = std::max(worst, r.scaling.j_trace[i] - r.scaling.j_trace[i + 1]);
    ck.residual_check("scaling_j_monotone", std::max(0.0, worst), tol.j_descent,
                      "J trace ascends monotonically to the minimum value");
  });

  ck.guarded("j_minimality", [&] {
    const double j_opt = J_value(r.cost, r.scaling.pi);
    double best_alt = std::numeric_limits<double>::infinity();
    int alternatives = 0;

    // Blends with the optimal witness (also supported on admissible pairs).
    std::vector<double> witness_cells(r.cost.cells.size(), 0.0);
    bool witness_on_face = true;
    for (const auto& e : r.transport.witness.entries) {
      const int idx = r.cost.cell_index(e.x, e.y);
      if (idx < 0) {
        if (e.mass > 1e-12) witness_on_face = false;
        continue;
      }
      witness_cells[static_cast<std::size_t>(idx)] += e.mass;
    }
    if (witness_on_face) {
      for (double lambda : {0.25, 0.5, 1.0}) {
        Coupling alt;
        for (std::size_t i = 0; i < r.cost.cells.size(); ++i) {
          const double mass = (1.0 - lambda) * r.scaling.pi.entries[i].mass +
                              lambda * witness_cells[i];
          alt.entries.push_back({r.cost.cells[i].x, r.cost.cells[i].y, mass});
        }
        best_alt = std::min(best_alt, J_value(r.cost, alt));
        ++alternatives;
      }
    }

    // Rectangle perturbations: move mass around 2x2 minors of the cell set.
    std::mt19937_64 rng(202);
    const std::size_t cells = r.cost.cells.size();
    for (int trial = 0; trial < 40 && cells >= 2; ++trial) {
      const std::size_t i = rng() % cells;
      const std::size_t j = rng() % cells;
      const auto& ci = r.cost.cells[i];
      const auto& cj = r.cost.cells[j];
      if (ci.x == cj.x || ci.y == cj.y) continue;
      const int k_ij = r.cost.cell_index(ci.x, cj.y);
      const int k_ji = r.cost.cell_index(cj.x, ci.y);
      if (k_ij < 0 || k_ji < 0) continue;
      const double eps = 0.5 * std::min(r.scaling.pi.entries[i].mass,
                                        r.scaling.pi.entries[j].mass);
      if (eps <= 0.0) continue;
      Coupling alt;
      alt.entries = r.scaling.pi.entries;
      alt.entries[i].mass -= eps;
      alt.entries[j].mass -= eps;
      alt.entries[static_cast<std::size_t>(k_ij)].mass += eps;
      alt.entries[static_cast<std::size_t>(k_ji)].mass += eps;
      best_alt = std::min(best_alt, J_value(r.cost, alt));
      ++alternatives;
    }

    if (alternatives == 0) {
      ck.not_applicable("j_minimality", "no feasible alternative couplings");
      return;
    }
    ck.residual_check("j_minimality", std::max(0.0, j_opt - best_alt), tol.j_descent,
                      "J(pi) is minimal against " + std::to_string(alternatives) +
                          " feasible alternatives");
  });

  // --- alternate evaluations -------------------------------------------------------
  ck.guarded("mixture_match", [&] {
    double worst = 0.0;
    for (double t : grid11) {
      const auto poly = c.densities(t);
      const auto mix = binomial_mixture(og, c.m, r.dist, r.scaling.pi, t);
      for (int v = 0; v < og.n; ++v)
        worst = std::max(worst, std::abs(poly[static_cast<std::size_t>(v)] -
                                         mix[static_cast<std::size_t>(v)]));
    }
    ck.residual_check("mixture_match", worst, tol.mixture,
                      "polynomial evaluation vs binomial mixture");
  });

  const auto velocity_ode = [&](const char* name, bool minus) {
    if (og.arcs.empty()) {
      ck.flag_check(name, true, 0.0, "no oriented arcs");
      return;
    }
    const double delta = 1e-6;
    double worst = 0.0;
    for (double t : uniform_grid(11, 0.1, 0.9)) {
      const auto v0 = minus ? velocity_minus(c, t) : velocity_plus(c, t);
      const auto vp = minus ? velocity_minus(c, t + delta) : velocity_plus(c, t + delta);
      const auto vm = minus ? velocity_minus(c, t - delta) : velocity_plus(c, t - delta);
      const auto field = minus ? velocity_field_minus(c, t) : velocity_field_plus(c, t);
      for (std::size_t k = 0; k < og.arcs.size(); ++k) {
        const auto [tail, head] = og.arcs[k];
        const double dv = (vp[k] - vm[k]) / (2.0 * delta);
        const double res = dv + v0[k] * (field[static_cast<std::size_t>(head)] -
                                         field[static_cast<std::size_t>(tail)]);
        worst = std::max(worst, std::abs(res) / std::max(1.0, std::abs(v0[k])));
      }
    }
    ck.residual_check(name, worst, tol.velocity_ode,
                      "transport equation, central differences at step 1e-6");
  };
  ck.guarded("velocity_ode_plus", [&] { velocity_ode("velocity_ode_plus", false); });
  ck.guarded("velocity_ode_minus", [&] { velocity_ode("velocity_ode_minus", true); });

  // --- path observables --------------------------------------------------------------
  const auto paths = extremal_paths(og, 64);
  const auto grid21 = uniform_grid(21);

  ck.guarded("path_extremal_constant", [&] {
    if (paths.empty()) {
      ck.flag_check("path_extremal_constant", true, 0.0, "no extremal paths");
      return;
    }
    double worst = 0.0;
    for (const auto& gamma : paths) {
      double lo = std::numeric_limits<double>::infinity(), hi = -lo;
      for (double t : grid21) {
        const double v = path_observable(c, gamma, t);
        lo = std::min(lo, v);
        hi = std::max(hi, v);
      }
      worst = std::max(worst, hi - lo);
    }
    ck.residual_check("path_extremal_constant", worst, tol.path_constant,
                      "max-minus-min over " + std::to_string(paths.size()) +
                          " extremal paths, 21-point grid");
  });

  ck.guarded("path_semi_extremal_degree", [&] {
    const auto down = longest_from(og);
    const auto up = longest_into(og);
    std::vector<std::pair<std::vector<int>, int>> samples;  // (path, degree bound)
    for (const auto& gamma : paths) {
      if (samples.size() >= 32) break;
      if (gamma.size() < 3) continue;
      std::vector<int> prefix(gamma.begin(), gamma.end() - 1);
      samples.emplace_back(std::move(prefix),
                           down[static_cast<std::size_t>(gamma[gamma.size() - 2])]);
      std::vector<int> suffix(gamma.begin() + 1, gamma.end());
      samples.emplace_back(std::move(suffix), up[static_cast<std::size_t>(gamma[1])]);
    }
    if (samples.empty()) {
      ck.not_applicable("path_semi_extremal_degree",
                        "no semi-extremal paths of length >= 2");
      return;
    }
    double worst = 0.0;
    for (const auto& [gamma, bound] : samples) {
      const ChebInterpolant fit(bound, [&](double t) {
        return path_observable(c, gamma, t);
      });
      double local_scale = 1.0, local_worst = 0.0;
      for (double t : grid21) {
        const double actual = path_observable(c, gamma, t);
        local_scale = std::max(local_scale, std::abs(actual));
        local_worst = std::max(local_worst, std::abs(fit(t) - actual));
      }
      worst = std::max(worst, local_worst / local_scale);
    }
    ck.residual_check("path_semi_extremal_degree", worst, tol.path_degree_fit,
                      std::to_string(samples.size()) +
                          " semi-extremal paths fit at their degree bound");
  });

  ck.guarded("path_product_quotient", [&] {
    // f(x) = C_gamma C_gamma~ / C_(gamma cup gamma~) for semi-extremal pairs
    // joined at x.
    int checked = 0;
    double worst = 0.0;
    for (int x : og.active) {
      if (checked >= 16) break;
      if (og.in_arcs[static_cast<std::size_t>(x)].empty() ||
          og.out_arcs[static_cast<std::size_t>(x)].empty())
        continue;
      std::vector<int> into{x};
      while (!og.in_arcs[static_cast<std::size_t>(into.front())].empty()) {
        const int k = og.in_arcs[static_cast<std::size_t>(into.front())].front();
        into.insert(into.begin(), og.arcs[static_cast<std::size_t>(k)].first);
      }
      std::vector<int> from{x};
      while (!og.out_arcs[static_cast<std::size_t>(from.back())].empty()) {
        const int k = og.out_arcs[static_cast<std::size_t>(from.back())].front();
        from.push_back(og.arcs[static_cast<std::size_t>(k)].second);
      }
      std::vector<int> whole(into);
      whole.insert(whole.end(), from.begin() + 1, from.end());
      for (double t : uniform_grid(11, 0.05, 0.95)) {
        const double lhs = path_observable(c, into, t) * path_observable(c, from, t) /
                           path_observable(c, whole, t);
        const double fx = c.eval_f(x, t);
        worst = std::max(worst, std::abs(lhs - fx) / std::max(1.0, fx));
      }
      ++checked;
    }
    if (checked == 0) {
      ck.not_applicable("path_product_quotient", "no interior active vertices");
      return;
    }
    ck.residual_check("path_product_quotient", worst, tol.path_constant,
                      std::to_string(checked) + " interior vertices");
  });

  // --- spanning forest flux -------------------------------------------------------------
  ck.guarded("tree_flux_consistency", [&] {
    const auto tree = default_spanning_forest(og, g);
    double worst = 0.0;
    for (double t : {0.25, 0.5, 0.75}) {
      std::vector<double> dfdt(static_cast<std::size_t>(og.n), 0.0);
      for (int v : og.active)
        dfdt[static_cast<std::size_t>(v)] =
            c.f[static_cast<std::size_t>(v)].derivative()(t);
      const auto flux = tree_flux(og, tree, dfdt);
      const auto div = divergence_vertex(og, flux);
      for (int v = 0; v < og.n; ++v)
        worst = std::max(worst, std::abs(div[static_cast<std::size_t>(v)] +
                                         dfdt[static_cast<std::size_t>(v)]));
    }
    ck.residual_check("tree_flux_consistency", worst, tol.tree_flux,
                      "div(tree flux) + df/dt on the default spanning forest");
  });

  // --- restriction and gluing ---------------------------------------------------------------
  ck.guarded("restriction_stability", [&] {
    const std::vector<std::pair<double, double>> spans{
        {0.2, 0.8}, {0.1, 0.45}, {0.35, 0.65}};
    int missing_arcs = 0, incomparable = 0;
    for (const auto& [s, t] : spans) {
      const Measure fs = measure_from_densities(c.densities(s));
      const Measure ft = measure_from_densities(c.densities(t));
      const SupportUnion sub = support_union(g, r.dist, fs, ft);
      const OrientedGraph sub_og = orient(g, r.dist, sub);
      for (const auto& [tail, head] : sub_og.arcs) {
        if (og.arc_index(tail, head) < 0) ++missing_arcs;
      }
      for (const auto& [x, y] : sub.pairs) {
        if (!po.leq(x, y)) ++incomparable;
      }
    }
    ck.flag_check("restriction_stability", missing_arcs == 0,
                  static_cast<double>(missing_arcs),
                  "orientation of (f_s, f_t) is a sub-orientation, 3 spans");
    ck.flag_check("gluing_comparable", incomparable == 0,
                  static_cast<double>(incomparable),
                  "support pairs of (f_s, f_t) are order-comparable");
  });

  ck.guarded("support_cyclic_monotonicity", [&] {
    const auto& pairs = r.support.pairs;
    if (pairs.size() < 2) {
      ck.flag_check("support_cyclic_monotonicity", true, 0.0,
                    "fewer than two support pairs");
      return;
    }
    std::mt19937_64 rng(303);
    int worst = 0;
    for (int trial = 0; trial < 50; ++trial) {
      const std::size_t len = 2 + rng() % std::min<std::size_t>(3, pairs.size());
      std::vector<std::pair<int, int>> cyc;
      for (std::size_t i = 0; i < len; ++i) cyc.push_back(pairs[rng() % pairs.size()]);
      long long lhs = 0, rhs = 0;
      for (std::size_t i = 0; i < len; ++i)
        lhs += r.dist[static_cast<std::size_t>(cyc[i].first)]
                     [static_cast<std::size_t>(cyc[i].second)];
      rhs += r.dist[static_cast<std::size_t>(cyc[0].first)]
                   [static_cast<std::size_t>(cyc[len - 1].second)];
      for (std::size_t i = 0; i + 1 < len; ++i)
        rhs += r.dist[static_cast<std::size_t>(cyc[i + 1].first)]
                     [static_cast<std::size_t>(cyc[i].second)];
      worst = std::max(worst, static_cast<int>(lhs - rhs));
    }
    ck.flag_check("support_cyclic_monotonicity", worst <= 0,
                  static_cast<double>(std::max(0, worst)),
                  "50 sampled cycles of support pairs");
  });

  // --- entropy and action ----------------------------------------------------------------------
  ck.guarded("entropy_convex", [&] {
    if (!is_path_graph(g)) {
      ck.not_applicable("entropy_convex", "graph is not a path");
      return;
    }
    const auto profile = entropy_profile(c, 101);
    double worst = 0.0;
    for (std::size_t i = 1; i + 1 < profile.size(); ++i) {
      const double d2 = profile[i - 1].second - 2.0 * profile[i].second +
                        profile[i + 1].second;
      worst = std::max(worst, -d2);
    }
    ck.residual_check("entropy_convex", std::max(0.0, worst), tol.entropy_convexity,
                      "second differences of H on a 101-point grid");
  });

  const auto criticality = [&](const char* name, bool minus) {
    if (og.arcs.empty()) {
      ck.flag_check(name, true, 0.0, "no oriented arcs");
      return;
    }
    const CriticalityReport rep = criticality_test(c, minus);
    ck.add(name, true, rep.pass, rep.slope, rep.tolerance,
           "worst fitted first-order coefficient over 5 directions, action = " +
               fmt(rep.action));
  };
  ck.guarded("criticality_plus", [&] { criticality("criticality_plus", false); });
  ck.guarded("criticality_minus", [&] { criticality("criticality_minus", true); });

  // --- independent references -------------------------------------------------------------------
  ck.guarded("thinning_match", [&] {
    const auto supp0 = r.f0.support();
    const bool applies = is_path_graph(g) && supp0.size() == 1 &&
                         g.neighbors(supp0[0]).size() <= 1;
    if (!applies) {
      ck.not_applicable("thinning_match",
                        "needs a path graph with the initial mass at one end");
      return;
    }
    double worst = 0.0;
    for (double t : grid11) {
      const auto ref = thinning_reference(g, r.dist, supp0[0], r.f1, t);
      const auto f = c.densities(t);
      for (int v = 0; v < og.n; ++v)
        worst = std::max(worst, std::abs(f[static_cast<std::size_t>(v)] -
                                         ref[static_cast<std::size_t>(v)]));
    }
    ck.residual_check("thinning_match", worst, tol.oracle,
                      "curve vs binomial thinning of the target measure");
  });

  ck.guarded("contraction_match", [&] {
    const auto supp0 = r.f0.support();
    if (supp0.size() != 1) {
      ck.not_applicable("contraction_match", "initial measure is not a Dirac");
      return;
    }
    const int o = supp0[0];
    bool feasible = true;
    for (int y : r.f1.support()) {
      bool overflow = false;
      if (geodesic_count(g, r.dist, o, y, &overflow) > 20000.0 || overflow)
        feasible = false;
    }
    if (!feasible) {
      ck.not_applicable("contraction_match", "too many geodesics to enumerate");
      return;
    }
    double worst = 0.0;
    for (double t : grid11) {
      const auto ref = contraction_reference(g, r.dist, o, r.f1, t);
      const auto f = c.densities(t);
      for (int v = 0; v < og.n; ++v)
        worst = std::max(worst, std::abs(f[static_cast<std::size_t>(v)] -
                                         ref[static_cast<std::size_t>(v)]));
    }
    ck.residual_check("contraction_match", worst, tol.oracle,
                      "curve vs explicit geodesic contraction of the target");
  });

  ck.rep.all_pass = true;
  for (const auto& chk : ck.rep.checks) {
    if (chk.applicable && !chk.pass) ck.rep.all_pass = false;
  }
  return ck.rep;
}

}  // namespace w1plus
