#include "w1plus/curve.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <string>
#include <unordered_map>

#include "w1plus/errors.hpp"

namespace w1plus {

namespace {

constexpr double kDensityFloor = 1e-300;

std::vector<long double> factorial_table(int max_d) {
  std::vector<long double> f(static_cast<std::size_t>(max_d) + 1, 1.0L);
  for (int k = 1; k <= max_d; ++k)
    f[static_cast<std::size_t>(k)] = f[static_cast<std::size_t>(k - 1)] * k;
  return f;
}

int max_distance(const DistanceTable& dist) {
  int m = 0;
  for (const auto& row : dist)
    for (int d : row) m = std::max(m, d);
  return m;
}

Polynomial from_long_double(std::vector<long double> acc) {
  std::vector<double> out(acc.size());
  for (std::size_t k = 0; k < acc.size(); ++k) out[k] = static_cast<double>(acc[k]);
  return Polynomial(std::move(out));
}

}  // namespace

Polynomial PQSystem::Q_in_t(int v) const {
  return Polynomial::from_one_minus_t(Q_s[static_cast<std::size_t>(v)].coefficients());
}

PQSystem build_pq(const OrientedGraph& og, const WeightSystem& m,
                  const DistanceTable& dist, const ScalingResult& scaling) {
  const auto fact = factorial_table(max_distance(dist));
  PQSystem pq;
  std::vector<std::vector<long double>> pc(static_cast<std::size_t>(og.n));
  std::vector<std::vector<long double>> qc(static_cast<std::size_t>(og.n));

  for (int x = 0; x < og.n; ++x) {
    const double ax = scaling.a[static_cast<std::size_t>(x)];
    if (ax <= 0.0) continue;
    const auto pw = pair_weights_from(og, m, x);
    for (int z : og.active) {
      const double w = pw[static_cast<std::size_t>(z)];
      if (w <= 0.0) continue;
      const int d = dist[static_cast<std::size_t>(x)][static_cast<std::size_t>(z)];
      auto& coeffs = pc[static_cast<std::size_t>(z)];
      if (coeffs.size() < static_cast<std::size_t>(d) + 1) coeffs.resize(static_cast<std::size_t>(d) + 1, 0.0L);
      coeffs[static_cast<std::size_t>(d)] +=
          static_cast<long double>(w) * ax /
          (static_cast<long double>(m.vertex[static_cast<std::size_t>(z)]) * fact[static_cast<std::size_t>(d)]);
    }
  }
  for (int y = 0; y < og.n; ++y) {
    const double by = scaling.b[static_cast<std::size_t>(y)];
    if (by <= 0.0) continue;
    const auto pw = pair_weights_into(og, m, y);
    for (int z : og.active) {
      const double w = pw[static_cast<std::size_t>(z)];
      if (w <= 0.0) continue;
      const int d = dist[static_cast<std::size_t>(z)][static_cast<std::size_t>(y)];
      auto& coeffs = qc[static_cast<std::size_t>(z)];
      if (coeffs.size() < static_cast<std::size_t>(d) + 1) coeffs.resize(static_cast<std::size_t>(d) + 1, 0.0L);
      coeffs[static_cast<std::size_t>(d)] +=
          static_cast<long double>(w) * by /
          (static_cast<long double>(m.vertex[static_cast<std::size_t>(z)]) * fact[static_cast<std::size_t>(d)]);
    }
  }
  pq.P.resize(static_cast<std::size_t>(og.n));
  pq.Q_s.resize(static_cast<std::size_t>(og.n));
  for (int v = 0; v < og.n; ++v) {
    pq.P[static_cast<std::size_t>(v)] = from_long_double(std::move(pc[static_cast<std::size_t>(v)]));
    pq.Q_s[static_cast<std::size_t>(v)] = from_long_double(std::move(qc[static_cast<std::size_t>(v)]));
  }
  return pq;
}

double GeodesicCurve::eval_f(int v, double t) const {
  return m.vertex[static_cast<std::size_t>(v)] * pq.eval_P(v, t) * pq.eval_Q(v, t);
}

double GeodesicCurve::eval_g(int arc, double t) const {
  const auto [tail, head] = og.arcs[static_cast<std::size_t>(arc)];
  return m.arc[static_cast<std::size_t>(arc)] * pq.eval_P(tail, t) * pq.eval_Q(head, t);
}

double GeodesicCurve::eval_h(int triple, double t) const {
  const auto [k1, k2] = triples.arc_pairs[static_cast<std::size_t>(triple)];
  const auto [x0, x1, x2] = triples.triples[static_cast<std::size_t>(triple)];
  const double mt = m.arc[static_cast<std::size_t>(k1)] * m.arc[static_cast<std::size_t>(k2)] /
                    m.vertex[static_cast<std::size_t>(x1)];
  return mt * pq.eval_P(x0, t) * pq.eval_Q(x2, t);
}

std::vector<double> GeodesicCurve::densities(double t) const {
  std::vector<double> out(static_cast<std::size_t>(og.n), 0.0);
  for (int v : og.active) out[static_cast<std::size_t>(v)] = eval_f(v, t);
  return out;
}

int GeodesicCurve::max_degree() const {
  int d = 0;
  for (const auto& p : f) d = std::max(d, p.degree());
  return d;
}

GeodesicCurve build_curve(const OrientedGraph& og, const WeightSystem& m,
                          const DistanceTable& dist,
                          const ScalingResult& scaling, double w1_value) {
  GeodesicCurve c;
  c.og = og;
  c.m = m;
  c.scaling = scaling;
  c.w1_value = w1_value;
  c.pq = build_pq(og, m, dist, scaling);
  c.triples = oriented_triples(og);

  c.f.resize(static_cast<std::size_t>(og.n));
  for (int v : og.active) {
    Polynomial qt = c.pq.Q_in_t(v);
    c.f[static_cast<std::size_t>(v)] =
        (c.pq.P[static_cast<std::size_t>(v)] * qt) * m.vertex[static_cast<std::size_t>(v)];
  }
  c.g.resize(og.arcs.size());
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    const auto [tail, head] = og.arcs[k];
    c.g[k] = (c.pq.P[static_cast<std::size_t>(tail)] * c.pq.Q_in_t(head)) * m.arc[k];
  }
  c.h.resize(c.triples.triples.size());
  for (std::size_t i = 0; i < c.triples.triples.size(); ++i) {
    const auto [k1, k2] = c.triples.arc_pairs[i];
    const int x0 = c.triples.triples[i][0];
    const int x1 = c.triples.triples[i][1];
    const int x2 = c.triples.triples[i][2];
    const double mt = m.arc[static_cast<std::size_t>(k1)] * m.arc[static_cast<std::size_t>(k2)] /
                      m.vertex[static_cast<std::size_t>(x1)];
    c.h[i] = (c.pq.P[static_cast<std::size_t>(x0)] * c.pq.Q_in_t(x2)) * mt;
  }
  return c;
}

std::vector<double> binomial_mixture(const OrientedGraph& og, const WeightSystem& m,
                                     const DistanceTable& dist, const Coupling& pi,
                                     double t) {
  std::vector<double> out(static_cast<std::size_t>(og.n), 0.0);
  std::unordered_map<int, std::vector<double>> from_cache, into_cache;
  const int max_d = max_distance(dist);
  // Binomial coefficients C(n, k), exact in long double at this scale.
  std::vector<std::vector<long double>> binom(static_cast<std::size_t>(max_d) + 1);
  for (int r = 0; r <= max_d; ++r) {
    binom[static_cast<std::size_t>(r)].assign(static_cast<std::size_t>(r) + 1, 1.0L);
    for (int k = 1; k < r; ++k)
      binom[static_cast<std::size_t>(r)][static_cast<std::size_t>(k)] =
          binom[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(k - 1)] +
          binom[static_cast<std::size_t>(r - 1)][static_cast<std::size_t>(k)];
  }

  for (const auto& e : pi.entries) {
    if (e.mass <= 0.0) continue;
    if (e.x == e.y) {
      out[static_cast<std::size_t>(e.x)] += e.mass;
      continue;
    }
    auto fit = from_cache.find(e.x);
    if (fit == from_cache.end())
      fit = from_cache.emplace(e.x, pair_weights_from(og, m, e.x)).first;
    auto iit = into_cache.find(e.y);
    if (iit == into_cache.end())
      iit = into_cache.emplace(e.y, pair_weights_into(og, m, e.y)).first;
    const auto& pwx = fit->second;
    const auto& pwy = iit->second;
    const int dxy = dist[static_cast<std::size_t>(e.x)][static_cast<std::size_t>(e.y)];
    const double mxy = pwx[static_cast<std::size_t>(e.y)];
    for (int z : og.active) {
      const double wx = pwx[static_cast<std::size_t>(z)];
      const double wy = pwy[static_cast<std::size_t>(z)];
      if (wx <= 0.0 || wy <= 0.0) continue;
      const int d1 = dist[static_cast<std::size_t>(e.x)][static_cast<std::size_t>(z)];
      const int d2 = dist[static_cast<std::size_t>(z)][static_cast<std::size_t>(e.y)];
      if (d1 + d2 != dxy) continue;
      const long double mxzy = static_cast<long double>(wx) * wy /
                               m.vertex[static_cast<std::size_t>(z)];
      const long double weight =
          static_cast<long double>(e.mass) * (mxzy / mxy) *
          binom[static_cast<std::size_t>(dxy)][static_cast<std::size_t>(d1)] *
          std::pow(static_cast<long double>(t), d1) *
          std::pow(static_cast<long double>(1.0 - t), d2);
      out[static_cast<std::size_t>(z)] += static_cast<double>(weight);
    }
  }
  return out;
}

std::vector<double> velocity_plus(const GeodesicCurve& c, double t) {
  std::vector<double> v(c.og.arcs.size(), 0.0);
  for (std::size_t k = 0; k < c.og.arcs.size(); ++k) {
    const auto [tail, head] = c.og.arcs[k];
    if (c.eval_f(tail, t) <= kDensityFloor)
      fail(Errc::zero_density, "tail density vanishes at t = " + std::to_string(t));
    v[k] = c.m.arc[k] * c.pq.eval_Q(head, t) /
           (c.m.vertex[static_cast<std::size_t>(tail)] * c.pq.eval_Q(tail, t));
  }
  return v;
}

std::vector<double> velocity_minus(const GeodesicCurve& c, double t) {
  std::vector<double> v(c.og.arcs.size(), 0.0);
  for (std::size_t k = 0; k < c.og.arcs.size(); ++k) {
    const auto [tail, head] = c.og.arcs[k];
    if (c.eval_f(head, t) <= kDensityFloor)
      fail(Errc::zero_density, "head density vanishes at t = " + std::to_string(t));
    v[k] = c.m.arc[k] * c.pq.eval_P(tail, t) /
           (c.m.vertex[static_cast<std::size_t>(head)] * c.pq.eval_P(head, t));
  }
  return v;
}

std::vector<double> velocity_field_plus(const GeodesicCurve& c, double t) {
  std::vector<double> V(static_cast<std::size_t>(c.og.n), 0.0);
  for (int x : c.og.active) {
    const double qx = c.pq.eval_Q(x, t);
    if (qx <= kDensityFloor) continue;
    long double acc = 0.0L;
    for (int k : c.og.out_arcs[static_cast<std::size_t>(x)]) {
      acc += static_cast<long double>(c.m.arc[static_cast<std::size_t>(k)]) *
             c.pq.eval_Q(c.og.arcs[static_cast<std::size_t>(k)].second, t);
    }
    V[static_cast<std::size_t>(x)] =
        static_cast<double>(acc) / (c.m.vertex[static_cast<std::size_t>(x)] * qx);
  }
  return V;
}

std::vector<double> velocity_field_minus(const GeodesicCurve& c, double t) {
  std::vector<double> V(static_cast<std::size_t>(c.og.n), 0.0);
  for (int x : c.og.active) {
    const double px = c.pq.eval_P(x, t);
    if (px <= kDensityFloor) continue;
    long double acc = 0.0L;
    for (int k : c.og.in_arcs[static_cast<std::size_t>(x)]) {
      acc += static_cast<long double>(c.m.arc[static_cast<std::size_t>(k)]) *
             c.pq.eval_P(c.og.arcs[static_cast<std::size_t>(k)].first, t);
    }
    V[static_cast<std::size_t>(x)] =
        static_cast<double>(acc) / (c.m.vertex[static_cast<std::size_t>(x)] * px);
  }
  return V;
}

double path_observable(const GeodesicCurve& c, std::span<const int> gamma, double t) {
  if (gamma.empty()) fail(Errc::invalid_argument, "empty path");
  for (int v : gamma) {
    if (v < 0 || v >= c.og.n) fail(Errc::unknown_vertex, "path vertex out of range");
  }
  if (gamma.size() == 1) {
    if (!c.og.is_active[static_cast<std::size_t>(gamma[0])])
      fail(Errc::not_comparable, "path vertex is not active");
    return c.eval_f(gamma[0], t);
  }
  std::vector<int> arcs;
  for (std::size_t i = 0; i + 1 < gamma.size(); ++i) {
    const int k = c.og.arc_index(gamma[i], gamma[i + 1]);
    if (k < 0)
      fail(Errc::not_comparable, "consecutive path vertices are not joined by an arc");
    arcs.push_back(k);
  }
  if (arcs.size() == 1) return c.eval_g(arcs[0], t);

  bool interior_positive = true;
  for (std::size_t i = 1; i + 1 < gamma.size(); ++i) {
    if (c.eval_f(gamma[i], t) <= kDensityFloor) {
      interior_positive = false;
      break;
    }
  }
  if (interior_positive) {
    long double acc = 1.0L;
    for (int k : arcs) acc *= c.eval_g(k, t);
    for (std::size_t i = 1; i + 1 < gamma.size(); ++i) acc /= c.eval_f(gamma[i], t);
    return static_cast<double>(acc);
  }
  // Interior density vanishes (t at the boundary): the quotient extends by
  // cancellation to m(gamma) P(start) Q(end).
  long double mg = 1.0L;
  for (int k : arcs) mg *= c.m.arc[static_cast<std::size_t>(k)];
  for (std::size_t i = 1; i + 1 < gamma.size(); ++i)
    mg /= c.m.vertex[static_cast<std::size_t>(gamma[i])];
  return static_cast<double>(mg) * c.pq.eval_P(gamma[0], t) *
         c.pq.eval_Q(gamma[gamma.size() - 1], t);
}

std::vector<std::pair<double, double>> entropy_profile(const GeodesicCurve& c,
                                                       int grid_points) {
  if (grid_points < 2) fail(Errc::invalid_argument, "entropy grid needs at least 2 points");
  std::vector<std::pair<double, double>> out;
  out.reserve(static_cast<std::size_t>(grid_points));
  for (int i = 0; i < grid_points; ++i) {
    const double t = static_cast<double>(i) / (grid_points - 1);
    long double H = 0.0L;
    for (int v : c.og.active) {
      const double fv = c.eval_f(v, t);
      if (fv > 0.0) H += static_cast<long double>(fv) * std::log(fv);
    }
    out.emplace_back(t, static_cast<double>(H));
  }
  return out;
}

namespace {

/**
 * Composite midpoint rule for the action integrands. `psi`/`dpsi` describe
 * the perturbation direction (empty for the unperturbed action), `phi_exp`
 * the vanishing order of the time profile [4t(1-t)]^{phi_exp}.
 */
double action_midpoint(const GeodesicCurve& c, bool minus, int panels, double eta,
                       const std::vector<double>& psi, const std::vector<double>& dpsi,
                       int phi_exp) {
  long double total = 0.0L;
  const bool perturbed = !psi.empty();
  for (int i = 0; i < panels; ++i) {
    const double t = (i + 0.5) / panels;
    double phi = 0.0, dphi = 0.0;
    if (perturbed) {
      const double base = 4.0 * t * (1.0 - t);
      phi = std::pow(base, phi_exp);
      dphi = phi_exp * (4.0 - 8.0 * t) * std::pow(base, phi_exp - 1);
    }
    long double node = 0.0L;
    for (std::size_t k = 0; k < c.og.arcs.size(); ++k) {
      const auto [tail, head] = c.og.arcs[k];
      double gv = c.eval_g(static_cast<int>(k), t);
      double fv = c.eval_f(minus ? head : tail, t);
      if (perturbed) {
        gv -= eta * dphi * psi[k];
        fv += eta * phi * dpsi[static_cast<std::size_t>(minus ? head : tail)];
      }
      if (gv <= kDensityFloor) continue;
      if (fv <= kDensityFloor)
        fail(Errc::perturbation_infeasible, "perturbed density is not positive");
      node += static_cast<long double>(gv) * std::log(static_cast<long double>(gv) / fv);
    }
    total += node;
  }
  return static_cast<double>(total / panels);
}

}  // namespace

double action_plus(const GeodesicCurve& c, int panels) {
  return action_midpoint(c, false, panels, 0.0, {}, {}, 0);
}

double action_minus(const GeodesicCurve& c, int panels) {
  return action_midpoint(c, true, panels, 0.0, {}, {}, 0);
}

CriticalityReport criticality_test(const GeodesicCurve& c, bool minus, int directions,
                                   int panels, std::uint64_t seed) {
  CriticalityReport rep;
  rep.action = action_midpoint(c, minus, panels, 0.0, {}, {}, 0);
  rep.tolerance = 1e-3 * std::max(1.0, std::abs(rep.action));
  const int phi_exp = c.og.longest_path + 1;
  const std::vector<double> etas{1e-2, 1e-3, 1e-4};

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);

  for (int dir = 0; dir < directions; ++dir) {
    std::vector<double> psi(c.og.arcs.size());
    for (double& p : psi) p = unit(rng);

    std::vector<double> dpsi(static_cast<std::size_t>(c.og.n), 0.0);
    for (std::size_t k = 0; k < c.og.arcs.size(); ++k) {
      dpsi[static_cast<std::size_t>(c.og.arcs[k].first)] += psi[k];
      dpsi[static_cast<std::size_t>(c.og.arcs[k].second)] -= psi[k];
    }

    // Scale the direction so the largest eta keeps g - eta du/dt > 0 and
    // f + eta div u >= 0 with a factor-10 margin at the quadrature nodes.
    // The generous margin keeps the expansion of delta(eta) perturbative at
    // eta = 1e-2, so the cubic-and-beyond terms stay small.
    const double eta_max = etas.front();
    double scale = std::numeric_limits<double>::infinity();
    for (int i = 0; i < panels; ++i) {
      const double t = (i + 0.5) / panels;
      const double base = 4.0 * t * (1.0 - t);
      const double phi = std::pow(base, phi_exp);
      const double dphi = phi_exp * (4.0 - 8.0 * t) * std::pow(base, phi_exp - 1);
      for (std::size_t k = 0; k < c.og.arcs.size(); ++k) {
        const double denom = eta_max * std::abs(dphi * psi[k]);
        if (denom > 0.0)
          scale = std::min(scale, c.eval_g(static_cast<int>(k), t) / denom);
      }
      for (int v : c.og.active) {
        const double denom = eta_max * std::abs(phi * dpsi[static_cast<std::size_t>(v)]);
        if (denom > 0.0)
          scale = std::min(scale, c.eval_f(v, t) / denom);
      }
    }
    if (!(scale > 0.0))
      fail(Errc::perturbation_infeasible,
           "no positive amplitude keeps the perturbed pair admissible");
    const double amp = 0.1 * std::min(scale, 1.0);
    for (double& p : psi) p *= amp;
    for (double& p : dpsi) p *= amp;

    std::vector<double> deltas;
    for (double eta : etas)
      deltas.push_back(action_midpoint(c, minus, panels, eta, psi, dpsi, phi_exp) -
                       rep.action);

    // Fit delta(eta) = s eta + q eta^2 + c eta^3 exactly through the three
    // samples; equivalently extrapolate delta/eta to eta = 0 with a quadratic
    // Lagrange interpolant. Carrying the cubic term keeps higher-order
    // contributions from leaking into the fitted first-order coefficient.
    long double slope = 0.0L;
    for (std::size_t j = 0; j < etas.size(); ++j) {
      long double weight = static_cast<long double>(deltas[j]) / etas[j];
      for (std::size_t k = 0; k < etas.size(); ++k) {
        if (k == j) continue;
        weight *= -etas[k] / (etas[j] - etas[k]);
      }
      slope += weight;
    }
    rep.slopes.push_back(static_cast<double>(slope));
  }

  double worst = 0.0;
  for (double s : rep.slopes) worst = std::max(worst, std::abs(s));
  rep.slope = worst;
  rep.pass = worst <= rep.tolerance;
  return rep;
}

}  // namespace w1plus
