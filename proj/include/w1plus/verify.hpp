#pragma once

#include <string>
#include <vector>

#include "w1plus/pipeline.hpp"

namespace w1plus {

/** Absolute tolerances used by the structural verification, pinned in one
 * place. Residuals are maxima over the documented grids. */
struct Tolerances {
  double mass = 1e-10;            // normalisation and boundary conditions
  double coefficient = 1e-10;     // polynomial identity residuals
  double edge_sum = 1e-9;         // arc flux sum vs W1
  double intermediate_w1 = 1e-7;  // W1(f_s, f_t) vs (t - s) W1
  double marginals = 1e-10;       // coupling marginals
  double coupling_cost = 1e-8;    // coupling cost vs W1
  double product_form = 1e-9;     // pi vs c a b
  double j_descent = 1e-12;       // one-sided slack for the J trace
  double mixture = 1e-10;         // polynomial vs binomial mixture
  double velocity_ode = 1e-4;     // finite-difference transport residual
  double path_constant = 1e-9;    // extremal path observables
  double path_degree_fit = 1e-8;  // semi-extremal degree fit residual
  double tree_flux = 1e-12;       // forest flux divergence
  double entropy_convexity = 1e-8;
  double criticality = 1e-3;      // scaled by max(1, |action|)
  double oracle = 1e-9;           // pointwise agreement with references
  double exact = 1e-12;           // checks that are exact up to rounding
};

/** One named verification check. */
struct CheckResult {
  std::string name;
  bool applicable = true;  // false when the hypothesis does not hold
  bool pass = false;
  double residual = 0.0;
  double tolerance = 0.0;
  std::string detail;
};

struct VerificationReport {
  std::vector<CheckResult> checks;
  bool all_pass = false;  // over applicable checks

  const CheckResult* find(const std::string& name) const;
};

/**
 * Runs the full structural verification of a pipeline result: boundary and
 * normalisation, continuity and flux-exchange identities at coefficient
 * level, conservation of the arc flux sum, geodesy of intermediate
 * measures, kernel algebra, coupling optimality and product form, the
 * J-minimisation diagnostics, mixture agreement, velocity transport
 * equations, path observables, spanning-forest flux, restriction stability
 * of the orientation, action criticality, and (on path graphs) entropy
 * convexity.
 */
VerificationReport verify(const PipelineResult& r, const Tolerances& tol = {});

/**
 * Independent reference for path graphs with f0 concentrated at an end:
 * the binomial thinning of f1, T_t f1(k) = sum_{l >= k} C(l, k) t^k
 * (1-t)^{l-k} f1(l), with positions counted from the Dirac end.
 */
std::vector<double> thinning_reference(const Graph& g,
                                       const DistanceTable& dist, int dirac,
                                       const Measure& f1, double t);

/**
 * Independent reference for a Dirac initial measure on any graph: moves
 * mass f1(y) along every geodesic from o to y (uniformly over geodesics),
 * placing binomial t-marginals on each; built from explicit geodesic
 * enumeration.
 */
std::vector<double> contraction_reference(const Graph& g,
                                          const DistanceTable& dist, int o,
                                          const Measure& f1, double t);

}  // namespace w1plus
