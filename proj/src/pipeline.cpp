#include "w1plus/pipeline.hpp"

#include "w1plus/errors.hpp"

namespace w1plus {

PipelineResult run_pipeline(const Graph& g, const Measure& f0, const Measure& f1,
                            const RunConfig& cfg) {
  validate_measure(g, f0);
  validate_measure(g, f1);

  PipelineResult r(g);
  r.f0 = f0;
  r.f1 = f1;
  r.config = cfg;
  r.dist = all_pairs_distances(g);
  r.transport = w1(g, r.dist, f0, f1);
  r.support = support_union(g, r.dist, f0, f1);
  r.oriented = orient(g, r.dist, r.support);
  r.weights = cfg.custom_arc_weights.empty()
                  ? default_weights(r.oriented)
                  : weights_from_arc_table(g, r.oriented, cfg.custom_arc_weights);
  const PartialOrder po = order(r.oriented);
  r.cost = cost_kernel(r.oriented, po, r.weights, r.dist, f0, f1);
  r.scaling = minimize_J(r.cost, f0, f1, cfg.scaling_tol, cfg.scaling_max_iter);
  r.curve = build_curve(r.oriented, r.weights, r.dist, r.scaling, r.transport.value);
  return r;
}

}  // namespace w1plus
