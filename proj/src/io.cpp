#include "w1plus/io.hpp"

#include <algorithm>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <utility>

#include "w1plus/errors.hpp"

namespace w1plus {

namespace {

using nlohmann::json;

/** Vertex identifiers may be strings or integers; canonicalise to string. */
std::string id_to_name(const json& j) {
  if (j.is_string()) return j.get<std::string>();
  if (j.is_number_integer()) return std::to_string(j.get<long long>());
  fail(Errc::io_error, "vertex identifiers must be strings or integers");
}

const json& field(const json& j, const char* key) {
  const auto it = j.find(key);
  if (it == j.end())
    fail(Errc::io_error, std::string("missing field \"") + key + "\"");
  return *it;
}

double number_at(const json& j, const char* what) {
  if (!j.is_number()) fail(Errc::io_error, std::string(what) + " must be a number");
  return j.get<double>();
}

std::vector<double> coefficients_at(const json& j, const char* what) {
  if (!j.is_array()) fail(Errc::io_error, std::string(what) + " must be an array");
  std::vector<double> c;
  c.reserve(j.size());
  for (const auto& v : j) c.push_back(number_at(v, what));
  return c;
}

json coefficients_json(const Polynomial& p) {
  return json(p.coefficients());
}

/** Dense per-vertex vector as {name: value}, zero entries omitted. */
json vertex_map_json(const Graph& g, const std::vector<double>& v) {
  json out = json::object();
  for (int x = 0; x < g.vertex_count(); ++x) {
    if (v[static_cast<std::size_t>(x)] != 0.0) out[g.name(x)] = v[static_cast<std::size_t>(x)];
  }
  return out;
}

std::vector<double> vertex_map_from_json(const json& j, const Graph& g, const char* what) {
  if (!j.is_object()) fail(Errc::io_error, std::string(what) + " must be an object");
  std::vector<double> out(static_cast<std::size_t>(g.vertex_count()), 0.0);
  for (const auto& [name, value] : j.items())
    out[static_cast<std::size_t>(g.index_of(name))] = number_at(value, what);
  return out;
}

}  // namespace

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

Graph graph_from_json(const json& j) {
  if (!j.is_object()) fail(Errc::io_error, "graph document must be a JSON object");
  const json& jv = field(j, "vertices");
  const json& je = field(j, "edges");
  if (!jv.is_array()) fail(Errc::io_error, "\"vertices\" must be an array");
  if (!je.is_array()) fail(Errc::io_error, "\"edges\" must be an array");
  std::vector<std::string> names;
  names.reserve(jv.size());
  for (const auto& v : jv) names.push_back(id_to_name(v));
  std::vector<std::pair<std::string, std::string>> edges;
  edges.reserve(je.size());
  for (const auto& e : je) {
    if (!e.is_array() || e.size() != 2)
      fail(Errc::io_error, "each edge must be a 2-element array");
    edges.emplace_back(id_to_name(e[0]), id_to_name(e[1]));
  }
  return Graph(std::move(names), edges);
}

json graph_to_json(const Graph& g) {
  json edges = json::array();
  for (const auto& [a, b] : g.edges()) edges.push_back({g.name(a), g.name(b)});
  return json{{"vertices", g.names()}, {"edges", std::move(edges)}};
}

Measure measure_from_json(const json& j, const Graph& g) {
  if (!j.is_object()) fail(Errc::io_error, "measure document must be a JSON object");
  Measure m;
  m.mass.assign(static_cast<std::size_t>(g.vertex_count()), 0.0);
  for (const auto& [name, value] : j.items())
    m.mass[static_cast<std::size_t>(g.index_of(name))] = number_at(value, "mass");
  validate_measure(g, m);
  return m;
}

json measure_to_json(const Graph& g, const Measure& f) {
  return vertex_map_json(g, f.mass);
}

Coupling coupling_from_json(const json& j, const Graph& g) {
  if (!j.is_array()) fail(Errc::io_error, "coupling document must be a JSON array");
  Coupling c;
  for (const auto& e : j) {
    if (!e.is_object()) fail(Errc::io_error, "each coupling entry must be an object");
    c.entries.push_back({g.index_of(id_to_name(field(e, "x"))),
                         g.index_of(id_to_name(field(e, "y"))),
                         number_at(field(e, "mass"), "mass")});
  }
  std::sort(c.entries.begin(), c.entries.end(), [](const auto& l, const auto& r) {
    return std::pair(l.x, l.y) < std::pair(r.x, r.y);
  });
  return c;
}

json coupling_to_json(const Graph& g, const Coupling& c) {
  json out = json::array();
  for (const auto& e : c.entries)
    out.push_back({{"x", g.name(e.x)}, {"y", g.name(e.y)}, {"mass", e.mass}});
  return out;
}

json pipeline_to_json(const PipelineResult& r) {
  const Graph& g = r.graph;
  json j;
  j["format"] = "w1plus-curve/1";
  j["graph"] = graph_to_json(g);
  j["f0"] = measure_to_json(g, r.f0);
  j["f1"] = measure_to_json(g, r.f1);

  json cfg{{"scaling_tol", r.config.scaling_tol},
           {"scaling_max_iter", r.config.scaling_max_iter},
           {"action_panels", r.config.action_panels}};
  if (!r.config.custom_arc_weights.empty()) {
    json cw = json::array();
    for (const auto& [tail, head, w] : r.config.custom_arc_weights)
      cw.push_back({{"tail", tail}, {"head", head}, {"weight", w}});
    cfg["custom_arc_weights"] = std::move(cw);
  }
  j["config"] = std::move(cfg);

  j["w1"] = {{"value", r.transport.value},
             {"witness", coupling_to_json(g, r.transport.witness)}};

  json pairs = json::array();
  for (const auto& [x, y] : r.support.pairs) pairs.push_back({g.name(x), g.name(y)});
  j["support_union"] = std::move(pairs);

  const OrientedGraph& og = r.oriented;
  json arcs = json::array();
  for (const auto& [tail, head] : og.arcs) arcs.push_back({g.name(tail), g.name(head)});
  json sources = json::array(), sinks = json::array(), fixed = json::array();
  for (int v : og.sources) sources.push_back(g.name(v));
  for (int v : og.sinks) sinks.push_back(g.name(v));
  for (int v : og.active) {
    if (og.in_arcs[static_cast<std::size_t>(v)].empty() &&
        og.out_arcs[static_cast<std::size_t>(v)].empty())
      fixed.push_back(g.name(v));
  }
  j["orientation"] = {{"arcs", std::move(arcs)},
                      {"sources", std::move(sources)},
                      {"sinks", std::move(sinks)},
                      {"fixed_points", std::move(fixed)}};

  json warc = json::array();
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    warc.push_back({{"tail", g.name(og.arcs[k].first)},
                    {"head", g.name(og.arcs[k].second)},
                    {"weight", r.weights.arc[k]}});
  }
  j["weights"] = {{"vertex", vertex_map_json(g, r.weights.vertex)},
                  {"arc", std::move(warc)},
                  {"overflow", r.weights.overflow}};

  const ScalingResult& sc = r.scaling;
  j["scaling"] = {{"a", vertex_map_json(g, sc.a)},
                  {"b", vertex_map_json(g, sc.b)},
                  {"pi", coupling_to_json(g, sc.pi)},
                  {"J", sc.J},
                  {"marginal_error", sc.marginal_error},
                  {"iterations", sc.iterations},
                  {"direct", sc.direct},
                  {"j_trace", sc.j_trace}};

  const GeodesicCurve& c = r.curve;
  json P = json::object(), Q = json::object(), F = json::object();
  for (int v : og.active) {
    P[g.name(v)] = coefficients_json(c.pq.P[static_cast<std::size_t>(v)]);
    Q[g.name(v)] = coefficients_json(c.pq.Q_s[static_cast<std::size_t>(v)]);
    F[g.name(v)] = coefficients_json(c.f[static_cast<std::size_t>(v)]);
  }
  json G = json::array();
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    G.push_back({{"tail", g.name(og.arcs[k].first)},
                 {"head", g.name(og.arcs[k].second)},
                 {"coefficients", coefficients_json(c.g[k])}});
  }
  json H = json::array();
  for (std::size_t i = 0; i < c.triples.triples.size(); ++i) {
    const auto& tr = c.triples.triples[i];
    H.push_back({{"x0", g.name(tr[0])},
                 {"x1", g.name(tr[1])},
                 {"x2", g.name(tr[2])},
                 {"coefficients", coefficients_json(c.h[i])}});
  }
  j["curve"] = {{"w1", c.w1_value}, {"P", std::move(P)},  {"Q_s", std::move(Q)},
                {"f", std::move(F)}, {"g", std::move(G)}, {"h", std::move(H)}};
  return j;
}

PipelineResult pipeline_from_json(const json& j) {
  if (!j.is_object()) fail(Errc::io_error, "curve document must be a JSON object");
  PipelineResult r(graph_from_json(field(j, "graph")));
  const Graph& g = r.graph;
  r.dist = all_pairs_distances(g);
  r.f0 = measure_from_json(field(j, "f0"), g);
  r.f1 = measure_from_json(field(j, "f1"), g);

  if (j.contains("config")) {
    const json& cfg = j["config"];
    if (cfg.contains("scaling_tol"))
      r.config.scaling_tol = number_at(cfg["scaling_tol"], "scaling_tol");
    if (cfg.contains("scaling_max_iter"))
      r.config.scaling_max_iter = cfg["scaling_max_iter"].get<int>();
    if (cfg.contains("action_panels"))
      r.config.action_panels = cfg["action_panels"].get<int>();
    if (cfg.contains("custom_arc_weights"))
      r.config.custom_arc_weights = arc_weights_from_json(cfg["custom_arc_weights"]);
  }

  const json& jw = field(j, "w1");
  r.transport.value = number_at(field(jw, "value"), "w1 value");
  r.transport.witness = coupling_from_json(field(jw, "witness"), g);
  r.transport.witness.cost = coupling_cost(r.dist, r.transport.witness);

  const json& jp = field(j, "support_union");
  if (!jp.is_array()) fail(Errc::io_error, "\"support_union\" must be an array");
  for (const auto& p : jp) {
    if (!p.is_array() || p.size() != 2)
      fail(Errc::io_error, "each support pair must be a 2-element array");
    r.support.pairs.emplace_back(g.index_of(id_to_name(p[0])),
                                 g.index_of(id_to_name(p[1])));
  }
  std::sort(r.support.pairs.begin(), r.support.pairs.end());
  r.support.w1_value = r.transport.value;

  // The orientation is a deterministic function of the support union; rebuild
  // it and insist the stored arc list agrees, so a document cannot smuggle in
  // an inconsistent orientation.
  r.oriented = orient(g, r.dist, r.support);
  {
    const json& jo = field(j, "orientation");
    const json& ja = field(jo, "arcs");
    if (!ja.is_array() || ja.size() != r.oriented.arcs.size())
      fail(Errc::io_error, "stored orientation does not match the support union");
    for (const auto& a : ja) {
      if (!a.is_array() || a.size() != 2)
        fail(Errc::io_error, "each oriented arc must be a 2-element array");
      if (r.oriented.arc_index(g.index_of(id_to_name(a[0])),
                               g.index_of(id_to_name(a[1]))) < 0)
        fail(Errc::io_error, "stored orientation does not match the support union");
    }
  }

  const json& jm = field(j, "weights");
  r.weights.vertex = vertex_map_from_json(field(jm, "vertex"), g, "vertex weight");
  r.weights.arc.assign(r.oriented.arcs.size(), 0.0);
  const json& jarc = field(jm, "arc");
  if (!jarc.is_array()) fail(Errc::io_error, "\"arc\" weights must be an array");
  for (const auto& e : jarc) {
    const int k = r.oriented.arc_index(g.index_of(id_to_name(field(e, "tail"))),
                                       g.index_of(id_to_name(field(e, "head"))));
    if (k < 0) fail(Errc::io_error, "arc weight for a non-oriented arc");
    r.weights.arc[static_cast<std::size_t>(k)] = number_at(field(e, "weight"), "arc weight");
  }
  r.weights.overflow = jm.contains("overflow") && jm["overflow"].get<bool>();
  validate_weights(r.oriented, r.weights);

  const PartialOrder po = order(r.oriented);
  r.cost = cost_kernel(r.oriented, po, r.weights, r.dist, r.f0, r.f1);

  const json& js = field(j, "scaling");
  r.scaling.a = vertex_map_from_json(field(js, "a"), g, "scaling a");
  r.scaling.b = vertex_map_from_json(field(js, "b"), g, "scaling b");
  r.scaling.pi = coupling_from_json(field(js, "pi"), g);
  if (r.scaling.pi.entries.size() != r.cost.cells.size())
    fail(Errc::io_error, "coupling entries do not match the admissible pairs");
  for (std::size_t i = 0; i < r.cost.cells.size(); ++i) {
    if (r.scaling.pi.entries[i].x != r.cost.cells[i].x ||
        r.scaling.pi.entries[i].y != r.cost.cells[i].y)
      fail(Errc::io_error, "coupling entries do not match the admissible pairs");
  }
  r.scaling.pi.cost = coupling_cost(r.dist, r.scaling.pi);
  r.scaling.J = number_at(field(js, "J"), "J");
  r.scaling.marginal_error = number_at(field(js, "marginal_error"), "marginal_error");
  r.scaling.iterations = field(js, "iterations").get<int>();
  r.scaling.direct = field(js, "direct").get<bool>();
  if (js.contains("j_trace"))
    r.scaling.j_trace = coefficients_at(js["j_trace"], "j_trace");

  // Polynomial blocks are deterministic functions of the data above; rebuild
  // them (bit-exact on the same build) rather than trusting the stored copy,
  // keeping the document's derived views purely informational.
  r.curve = build_curve(r.oriented, r.weights, r.dist, r.scaling, r.transport.value);
  if (j.contains("curve")) {
    const json& jc = j["curve"];
    if (jc.contains("g") && jc["g"].size() != r.curve.g.size())
      fail(Errc::io_error, "stored arc polynomials do not match the orientation");
    if (jc.contains("h") && jc["h"].size() != r.curve.h.size())
      fail(Errc::io_error, "stored triple polynomials do not match the orientation");
  }
  return r;
}

json report_to_json(const VerificationReport& rep) {
  json checks = json::array();
  for (const auto& c : rep.checks) {
    checks.push_back({{"name", c.name},
                      {"applicable", c.applicable},
                      {"pass", c.pass},
                      {"residual", c.residual},
                      {"tolerance", c.tolerance},
                      {"detail", c.detail}});
  }
  return json{{"all_pass", rep.all_pass}, {"checks", std::move(checks)}};
}

json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(Errc::io_error, "cannot open \"" + path + "\"");
  json j = json::parse(in, nullptr, false);
  if (j.is_discarded()) fail(Errc::io_error, "\"" + path + "\" is not valid JSON");
  return j;
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) fail(Errc::io_error, "cannot open \"" + path + "\" for writing");
  out << text;
  if (!out) fail(Errc::io_error, "write to \"" + path + "\" failed");
}

std::string sample_csv(const PipelineResult& r, const std::vector<double>& times) {
  for (double t : times) {
    if (!(t >= 0.0 && t <= 1.0))
      fail(Errc::invalid_argument, "sample times must lie in [0, 1]");
  }
  std::ostringstream out;
  out << "t,vertex,mass\n";
  for (double t : times) {
    const auto f = r.curve.densities(t);
    for (int v = 0; v < r.graph.vertex_count(); ++v) {
      out << format_double(t) << ',' << r.graph.name(v) << ','
          << format_double(f[static_cast<std::size_t>(v)]) << '\n';
    }
  }
  return out.str();
}

std::string entropy_csv(const PipelineResult& r, int grid_points) {
  std::ostringstream out;
  out << "t,entropy\n";
  for (const auto& [t, H] : entropy_profile(r.curve, grid_points))
    out << format_double(t) << ',' << format_double(H) << '\n';
  return out.str();
}

std::vector<std::tuple<std::string, std::string, double>> arc_weights_from_json(
    const json& j) {
  if (!j.is_array()) fail(Errc::io_error, "arc weights must be a JSON array");
  std::vector<std::tuple<std::string, std::string, double>> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_object()) fail(Errc::io_error, "each arc weight must be an object");
    out.emplace_back(id_to_name(field(e, "tail")), id_to_name(field(e, "head")),
                     number_at(field(e, "weight"), "weight"));
  }
  return out;
}

}  // namespace w1plus
