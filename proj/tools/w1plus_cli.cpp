// Command-line front end for the w1plus library: builds mass-conserving
// interpolating curves between two probability measures on a finite connected
// graph and exposes each pipeline stage (transport value, orientation,
// weights, coupling, curve, sampling, entropy, verification) as a subcommand.
//
// Exit codes: 0 success, 1 validation or input error, 2 convergence failure,
// 3 verification failure. Failures print a JSON object {"code", "message"}
// on standard error.

#include <cstdio>
#include <functional>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "w1plus/errors.hpp"
#include "w1plus/graph.hpp"
#include "w1plus/io.hpp"
#include "w1plus/orientation.hpp"
#include "w1plus/pipeline.hpp"
#include "w1plus/scaling.hpp"
#include "w1plus/transport.hpp"
#include "w1plus/verify.hpp"
#include "w1plus/weights.hpp"

namespace {

using nlohmann::json;

struct Options {
  std::string graph_path;
  std::string f0_path;
  std::string f1_path;
  std::string weights_path;  // optional custom arc weights
  std::string curve_path;    // optional stored curve document
  std::string out_path;      // optional output file
  std::vector<double> times;
  int grid = 101;
  w1plus::RunConfig config;
};

struct Inputs {
  w1plus::Graph graph;
  w1plus::Measure f0;
  w1plus::Measure f1;
};

Inputs load_inputs(const Options& o) {
  if (o.graph_path.empty() || o.f0_path.empty() || o.f1_path.empty())
    w1plus::fail(w1plus::Errc::invalid_argument,
                 "--graph, --f0 and --f1 are required");
  w1plus::Graph g = w1plus::graph_from_json(w1plus::read_json_file(o.graph_path));
  w1plus::Measure f0 = w1plus::measure_from_json(w1plus::read_json_file(o.f0_path), g);
  w1plus::Measure f1 = w1plus::measure_from_json(w1plus::read_json_file(o.f1_path), g);
  return {std::move(g), std::move(f0), std::move(f1)};
}

w1plus::RunConfig make_config(const Options& o) {
  w1plus::RunConfig cfg = o.config;
  if (!o.weights_path.empty())
    cfg.custom_arc_weights =
        w1plus::arc_weights_from_json(w1plus::read_json_file(o.weights_path));
  return cfg;
}

/** Full pipeline result, either rebuilt from a stored curve document
 * (--curve) or computed from the raw inputs. */
w1plus::PipelineResult full_result(const Options& o) {
  if (!o.curve_path.empty()) {
    if (!o.graph_path.empty() || !o.f0_path.empty() || !o.f1_path.empty() ||
        !o.weights_path.empty())
      w1plus::fail(w1plus::Errc::invalid_argument,
                   "--curve replaces --graph/--f0/--f1/--weights");
    return w1plus::pipeline_from_json(w1plus::read_json_file(o.curve_path));
  }
  const Inputs in = load_inputs(o);
  return w1plus::run_pipeline(in.graph, in.f0, in.f1, make_config(o));
}

/** Prints `text` on stdout and mirrors it into `path` when non-empty. */
void deliver(const std::string& text, const std::string& path) {
  std::string out = text;
  if (out.empty() || out.back() != '\n') out.push_back('\n');
  std::fputs(out.c_str(), stdout);
  if (!path.empty()) w1plus::write_text_file(path, out);
}

json active_vertex_map(const w1plus::Graph& g, const std::vector<double>& v) {
  json j = json::object();
  for (int i = 0; i < g.vertex_count(); ++i) {
    if (v[static_cast<std::size_t>(i)] != 0.0) j[g.name(i)] = v[static_cast<std::size_t>(i)];
  }
  return j;
}

int cmd_w1(const Options& o) {
  const Inputs in = load_inputs(o);
  const auto dist = w1plus::all_pairs_distances(in.graph);
  const auto res = w1plus::w1(in.graph, dist, in.f0, in.f1);
  std::printf("%s\n", w1plus::format_double(res.value).c_str());
  const std::string out = o.out_path.empty() ? "witness.json" : o.out_path;
  w1plus::write_text_file(out,
                          w1plus::coupling_to_json(in.graph, res.witness).dump(2) + "\n");
  return 0;
}

int cmd_orient(const Options& o) {
  const Inputs in = load_inputs(o);
  const auto dist = w1plus::all_pairs_distances(in.graph);
  const auto support = w1plus::support_union(in.graph, dist, in.f0, in.f1);
  const auto og = w1plus::orient(in.graph, dist, support);

  json arcs = json::array();
  for (const auto& [tail, head] : og.arcs)
    arcs.push_back(json::array({in.graph.name(tail), in.graph.name(head)}));
  json sources = json::array(), sinks = json::array(), fixed = json::array();
  for (int v : og.sources) sources.push_back(in.graph.name(v));
  for (int v : og.sinks) sinks.push_back(in.graph.name(v));
  for (int v : og.active) {
    if (og.in_arcs[static_cast<std::size_t>(v)].empty() &&
        og.out_arcs[static_cast<std::size_t>(v)].empty())
      fixed.push_back(in.graph.name(v));
  }
  const json j{{"arcs", arcs},
               {"sources", sources},
               {"sinks", sinks},
               {"fixed_points", fixed}};
  deliver(j.dump(2), o.out_path);
  return 0;
}

int cmd_weights(const Options& o) {
  const Inputs in = load_inputs(o);
  const auto dist = w1plus::all_pairs_distances(in.graph);
  const auto support = w1plus::support_union(in.graph, dist, in.f0, in.f1);
  const auto og = w1plus::orient(in.graph, dist, support);
  const w1plus::WeightSystem m =
      o.weights_path.empty()
          ? w1plus::default_weights(og)
          : w1plus::weights_from_arc_table(
                in.graph, og,
                w1plus::arc_weights_from_json(w1plus::read_json_file(o.weights_path)));

  json arcs = json::array();
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    arcs.push_back(json{{"tail", in.graph.name(og.arcs[k].first)},
                        {"head", in.graph.name(og.arcs[k].second)},
                        {"weight", m.arc[k]}});
  }
  const json j{{"vertex", active_vertex_map(in.graph, m.vertex)},
               {"arc", arcs},
               {"overflow", m.overflow}};
  deliver(j.dump(2), o.out_path);
  return 0;
}

int cmd_couple(const Options& o) {
  const Inputs in = load_inputs(o);
  const auto dist = w1plus::all_pairs_distances(in.graph);
  const auto support = w1plus::support_union(in.graph, dist, in.f0, in.f1);
  const auto og = w1plus::orient(in.graph, dist, support);
  const w1plus::RunConfig cfg = make_config(o);
  const w1plus::WeightSystem m =
      cfg.custom_arc_weights.empty()
          ? w1plus::default_weights(og)
          : w1plus::weights_from_arc_table(in.graph, og, cfg.custom_arc_weights);
  const auto po = w1plus::order(og);
  const auto cost = w1plus::cost_kernel(og, po, m, dist, in.f0, in.f1);
  const auto sc =
      w1plus::minimize_J(cost, in.f0, in.f1, cfg.scaling_tol, cfg.scaling_max_iter);

  const json j{{"a", active_vertex_map(in.graph, sc.a)},
               {"b", active_vertex_map(in.graph, sc.b)},
               {"pi", w1plus::coupling_to_json(in.graph, sc.pi)},
               {"J", sc.J},
               {"iterations", sc.iterations},
               {"marginal_error", sc.marginal_error}};
  const std::string out = o.out_path.empty() ? "coupling.json" : o.out_path;
  deliver(j.dump(2), out);
  return 0;
}

int cmd_geodesic(const Options& o) {
  const Inputs in = load_inputs(o);
  const auto r = w1plus::run_pipeline(in.graph, in.f0, in.f1, make_config(o));
  deliver(w1plus::pipeline_to_json(r).dump(2), o.out_path);
  return 0;
}

int cmd_sample(const Options& o) {
  const auto r = full_result(o);
  deliver(w1plus::sample_csv(r, o.times), o.out_path);
  return 0;
}

int cmd_entropy(const Options& o) {
  const auto r = full_result(o);
  deliver(w1plus::entropy_csv(r, o.grid), o.out_path);
  return 0;
}

int cmd_verify(const Options& o) {
  const auto r = full_result(o);
  const auto rep = w1plus::verify(r);

  std::size_t width = 0;
  for (const auto& c : rep.checks) width = std::max(width, c.name.size());
  int passed = 0, applicable = 0, skipped = 0;
  for (const auto& c : rep.checks) {
    if (!c.applicable) {
      ++skipped;
      std::printf("skip  %-*s  (%s)\n", static_cast<int>(width), c.name.c_str(),
                  c.detail.c_str());
      continue;
    }
    ++applicable;
    if (c.pass) ++passed;
    char nums[64];
    std::snprintf(nums, sizeof nums, "residual %-9.3g tol %-9.3g", c.residual,
                  c.tolerance);
    std::printf("%s  %-*s  %s %s\n", c.pass ? "PASS" : "FAIL",
                static_cast<int>(width), c.name.c_str(), nums, c.detail.c_str());
  }
  std::printf("%d/%d applicable checks passed, %d skipped\n", passed, applicable,
              skipped);

  const std::string out = o.out_path.empty() ? "verify_report.json" : o.out_path;
  w1plus::write_text_file(out, w1plus::report_to_json(rep).dump(2) + "\n");
  return rep.all_pass ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "Constructs interpolating curves between two probability measures on a "
      "finite connected graph and inspects every stage of the construction."};
  app.require_subcommand(1);

  Options o;

  const auto add_inputs = [&](CLI::App* cmd, bool required) {
    auto* pg = cmd->add_option("--graph", o.graph_path,
                               "graph JSON: {\"vertices\": [...], \"edges\": [[a,b], ...]}");
    auto* p0 = cmd->add_option("--f0", o.f0_path,
                               "initial measure JSON: {\"vertex\": mass, ...}");
    auto* p1 = cmd->add_option("--f1", o.f1_path, "final measure JSON");
    if (required) {
      pg->required();
      p0->required();
      p1->required();
    }
  };
  const auto add_weights = [&](CLI::App* cmd) {
    cmd->add_option("--weights", o.weights_path,
                    "custom arc weights JSON: [{\"tail\", \"head\", \"weight\"}, ...]");
  };
  const auto add_tuning = [&](CLI::App* cmd) {
    cmd->add_option("--tol", o.config.scaling_tol,
                    "marginal tolerance for the coupling solver")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--max-iter", o.config.scaling_max_iter,
                    "iteration cap for the coupling solver")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--panels", o.config.action_panels,
                    "integration panels for action values")
        ->check(CLI::PositiveNumber);
  };
  const auto add_curve = [&](CLI::App* cmd) {
    cmd->add_option("--curve", o.curve_path,
                    "stored curve document (replaces --graph/--f0/--f1)");
  };
  const auto add_out = [&](CLI::App* cmd, const char* help) {
    cmd->add_option("--out", o.out_path, help);
  };

  auto* w1c = app.add_subcommand("w1", "print the transport value, write a witness coupling");
  add_inputs(w1c, true);
  add_out(w1c, "witness output file (default witness.json)");

  auto* orientc = app.add_subcommand("orient", "emit the transport orientation as JSON");
  add_inputs(orientc, true);
  add_out(orientc, "also write the JSON here");

  auto* weightsc = app.add_subcommand("weights", "emit vertex and arc weights as JSON");
  add_inputs(weightsc, true);
  add_weights(weightsc);
  add_out(weightsc, "also write the JSON here");

  auto* couplec =
      app.add_subcommand("couple", "solve for the product-form coupling, write it as JSON");
  add_inputs(couplec, true);
  add_weights(couplec);
  add_tuning(couplec);
  add_out(couplec, "coupling output file (default coupling.json)");

  auto* geoc = app.add_subcommand(
      "geodesic", "build the full interpolating curve, emit the curve document");
  add_inputs(geoc, true);
  add_weights(geoc);
  add_tuning(geoc);
  add_out(geoc, "also write the curve document here");

  auto* samplec = app.add_subcommand("sample", "emit curve densities as CSV (t,vertex,mass)");
  add_inputs(samplec, false);
  add_weights(samplec);
  add_tuning(samplec);
  add_curve(samplec);
  samplec->add_option("--times", o.times, "comma-separated times in [0,1]")
      ->delimiter(',')
      ->required();
  add_out(samplec, "also write the CSV here");

  auto* entropyc = app.add_subcommand("entropy", "emit the entropy profile as CSV (t,entropy)");
  add_inputs(entropyc, false);
  add_weights(entropyc);
  add_tuning(entropyc);
  add_curve(entropyc);
  entropyc->add_option("--grid", o.grid, "number of grid points (default 101)")
      ->check(CLI::Range(2, 10000000));
  add_out(entropyc, "also write the CSV here");

  auto* verifyc = app.add_subcommand(
      "verify", "run every structural check, print a table, write the JSON report");
  add_inputs(verifyc, false);
  add_weights(verifyc);
  add_tuning(verifyc);
  add_curve(verifyc);
  add_out(verifyc, "report output file (default verify_report.json)");

  const std::map<std::string, std::function<int(const Options&)>> handlers{
      {"w1", cmd_w1},         {"orient", cmd_orient},   {"weights", cmd_weights},
      {"couple", cmd_couple}, {"geodesic", cmd_geodesic}, {"sample", cmd_sample},
      {"entropy", cmd_entropy}, {"verify", cmd_verify}};

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    if (e.get_exit_code() == 0) return app.exit(e);  // --help and friends
    const json err{{"code", "invalid_argument"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }

  try {
    return handlers.at(app.get_subcommands().front()->get_name())(o);
  } catch (const w1plus::Error& e) {
    const json err{{"code", w1plus::errc_name(e.code())}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return e.code() == w1plus::Errc::no_convergence ? 2 : 1;
  } catch (const std::exception& e) {
    const json err{{"code", "invalid_argument"}, {"message", e.what()}};
    std::fprintf(stderr, "%s\n", err.dump().c_str());
    return 1;
  }
}
