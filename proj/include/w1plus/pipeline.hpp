#pragma once

#include <string>
#include <tuple>
#include <vector>

#include "w1plus/curve.hpp"
#include "w1plus/graph.hpp"
#include "w1plus/orientation.hpp"
#include "w1plus/scaling.hpp"
#include "w1plus/transport.hpp"
#include "w1plus/weights.hpp"

namespace w1plus {

/** Knobs for the end-to-end construction. */
struct RunConfig {
  double scaling_tol = 1e-12;
  int scaling_max_iter = 100000;
  int action_panels = 20000;
  /** Optional arc weights (tail name, head name, weight). Empty selects the
   * geodesic-counting default. Every oriented arc must be covered; vertex
   * weights are derived from the conservation identities and validated. */
  std::vector<std::tuple<std::string, std::string, double>> custom_arc_weights;
};

/** Everything the construction produces, kept together so that downstream
 * verification can replay any stage. */
struct PipelineResult {
  Graph graph;
  DistanceTable dist;
  Measure f0;
  Measure f1;
  W1Result transport;
  SupportUnion support;
  OrientedGraph oriented;
  WeightSystem weights;
  CostKernel cost;
  ScalingResult scaling;
  GeodesicCurve curve;
  RunConfig config;

  PipelineResult(Graph g) : graph(std::move(g)) {}
};

/**
 * Runs the full construction: W1 and witness coupling, support union,
 * orientation, geodesic-counting weights, reference kernel, J-minimising
 * coupling, and the interpolating curve. Deterministic: identical inputs
 * give bit-identical results.
 */
PipelineResult run_pipeline(const Graph& g, const Measure& f0,
                            const Measure& f1, const RunConfig& cfg = {});

}  // namespace w1plus
