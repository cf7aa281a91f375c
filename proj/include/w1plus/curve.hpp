#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "w1plus/orientation.hpp"
#include "w1plus/polynomial.hpp"
#include "w1plus/scaling.hpp"
#include "w1plus/weights.hpp"

namespace w1plus {

/**
 * The two one-sided heat-type solutions generating the interpolation:
 *   P_t(z) = (1/m(z)) sum_{x <= z} m(x, z) a(x) t^{d(x,z)} / d(x,z)!
 *   Q_t(z) = (1/m(z)) sum_{y >= z} m(z, y) b(y) (1-t)^{d(z,y)} / d(z,y)!
 * P is stored in the monomial basis of t and Q in the monomial basis of
 * s = 1 - t; both have nonnegative coefficients, so evaluation is
 * cancellation-free at every t in [0, 1]. They solve dP/dt = K P and
 * dQ/dt = -K* Q with P_0 = a, Q_1 = b.
 */
struct PQSystem {
  std::vector<Polynomial> P;    // per vertex, variable t
  std::vector<Polynomial> Q_s;  // per vertex, variable s = 1 - t

  double eval_P(int v, double t) const { return P[static_cast<std::size_t>(v)](t); }
  double eval_Q(int v, double t) const { return Q_s[static_cast<std::size_t>(v)](1.0 - t); }
  /** Q at vertex v rewritten in the variable t (introduces cancellation;
   * used only for coefficient-level identity checks). */
  Polynomial Q_in_t(int v) const;
};

PQSystem build_pq(const OrientedGraph& og, const WeightSystem& m,
                  const DistanceTable& dist, const ScalingResult& scaling);

/**
 * The interpolating curve and its flux hierarchy:
 *   f_t(x)         = m(x) P_t(x) Q_t(x)            (vertex densities)
 *   g_t(x0 -> x1)  = m(x0, x1) P_t(x0) Q_t(x1)     (arc flux)
 *   h_t(x0,x1,x2)  = m(x0,x1,x2) P_t(x0) Q_t(x2)   (triple flux)
 * satisfying  df/dt = -div g,  dg/dt = -div h,  f(x1) h = g g  identically.
 *
 * The polynomial members hold the products in the monomial basis of t (for
 * coefficient-level residuals); the eval_* members evaluate through the
 * positive P/Q factorisations, which is the numerically robust route.
 */
struct GeodesicCurve {
  OrientedGraph og;
  WeightSystem m;
  PQSystem pq;
  ScalingResult scaling;
  TripleSet triples;
  double w1_value = 0.0;

  std::vector<Polynomial> f;  // per vertex
  std::vector<Polynomial> g;  // per arc
  std::vector<Polynomial> h;  // per triple

  double eval_f(int v, double t) const;
  double eval_g(int arc, double t) const;
  double eval_h(int triple, double t) const;
  /** All vertex densities at time t (a probability measure). */
  std::vector<double> densities(double t) const;
  int max_degree() const;
};

GeodesicCurve build_curve(const OrientedGraph& og, const WeightSystem& m,
                          const DistanceTable& dist,
                          const ScalingResult& scaling, double w1_value);

/**
 * Mixture-of-binomials evaluation of the same interpolation:
 *   f_t(z) = sum over cells (x, y) of
 *            pi(x, y) * m(x,z,y)/m(x,y) * C(d(x,y), d(x,z))
 *            * t^{d(x,z)} (1-t)^{d(z,y)},
 * summing over z on geodesics from x to y. Agrees with densities(t).
 */
std::vector<double> binomial_mixture(const OrientedGraph& og,
                                     const WeightSystem& m,
                                     const DistanceTable& dist,
                                     const Coupling& pi, double t);

/**
 * Arc velocities at interior time t:
 *   v_plus  = g / f(tail),  v_minus = g / f(head),
 * computed in the cancellation-free forms m(x0,x1) Q(x1) / (m(x0) Q(x0))
 * and m(x0,x1) P(x0) / (m(x1) P(x1)). Throws zero_density if the relevant
 * density falls below 1e-300.
 */
std::vector<double> velocity_plus(const GeodesicCurve& c, double t);
std::vector<double> velocity_minus(const GeodesicCurve& c, double t);

/** Vertex fields V_plus = (K* Q)/Q and V_minus = (K P)/P entering the
 * velocity transport equations dv/dt + v (V(head) - V(tail)) = 0. */
std::vector<double> velocity_field_plus(const GeodesicCurve& c, double t);
std::vector<double> velocity_field_minus(const GeodesicCurve& c, double t);

/**
 * Path observable C_gamma(t) along an oriented path gamma (vertex list):
 *   one vertex:  f(gamma0);  one arc:  g(gamma0 -> gamma1);
 *   longer:      product of g over arcs / product of f over interior
 *                vertices.
 * Evaluated from f and g directly; at times where an interior density
 * vanishes (the boundary t = 0, 1) the removable-singularity limit
 * m(gamma) P(gamma_0) Q(gamma_end) is used. Throws not_comparable if
 * consecutive vertices are not joined by an arc.
 */
double path_observable(const GeodesicCurve& c, std::span<const int> gamma,
                       double t);

/** Entropy profile H(t) = sum f log f on a uniform grid of [0, 1]. */
std::vector<std::pair<double, double>> entropy_profile(const GeodesicCurve& c,
                                                       int grid_points);

/**
 * Action integrals over [0, 1] by the composite midpoint rule on `panels`
 * uniform panels (the integrands have integrable log singularities at the
 * endpoints, so closed rules are unusable):
 *   action_plus  = integral of sum_arcs g log(g / f(tail)),
 *   action_minus = integral of sum_arcs g log(g / f(head)).
 */
double action_plus(const GeodesicCurve& c, int panels = 20000);
double action_minus(const GeodesicCurve& c, int panels = 20000);

/** Report of a first-variation probe around the curve. */
struct CriticalityReport {
  double action = 0.0;          // unperturbed action
  double slope = 0.0;           // worst |linear coefficient| over directions
  double tolerance = 0.0;       // pass threshold used: 1e-3 * max(1, |action|)
  bool pass = false;
  std::vector<double> slopes;   // per perturbation direction
};

/**
 * First-variation test of the action: perturbs (f, g) along
 * (f + eta div u, g - eta du/dt) with u(arc; t) = psi(arc) [4t(1-t)]^{L+1}
 * for random psi (scaled to keep g - eta du/dt > 0 and f + eta div u >= 0;
 * throws perturbation_infeasible if no positive scale works), fits
 * delta(eta) = s eta + q eta^2 over eta in {1e-2, 1e-3, 1e-4} and requires
 * the worst |s| <= 1e-3 * max(1, |action|). `minus` selects the
 * head-weighted action.
 */
CriticalityReport criticality_test(const GeodesicCurve& c, bool minus,
                                   int directions = 5, int panels = 2000,
                                   std::uint64_t seed = 20260815);

}  // namespace w1plus
