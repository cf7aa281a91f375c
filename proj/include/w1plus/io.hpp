#pragma once

#include <string>

#include <json.hpp>

#include "w1plus/pipeline.hpp"
#include "w1plus/verify.hpp"

namespace w1plus {

/** Formats a double with enough digits to round-trip exactly (%.17g). */
std::string format_double(double v);

/** Parses {"vertices": [...], "edges": [[a, b], ...]}; vertex identifiers
 * may be strings or integers (integers are canonicalised to their decimal
 * string). Throws io_error on malformed documents. */
Graph graph_from_json(const nlohmann::json& j);
nlohmann::json graph_to_json(const Graph& g);

/** Parses {"vertex": mass, ...}; missing vertices get mass 0. Validates
 * nonnegativity and total mass 1 within 1e-12. */
Measure measure_from_json(const nlohmann::json& j, const Graph& g);
nlohmann::json measure_to_json(const Graph& g, const Measure& f);

/** Couplings serialise as [{"x":..., "y":..., "mass":...}, ...]. */
Coupling coupling_from_json(const nlohmann::json& j, const Graph& g);
nlohmann::json coupling_to_json(const Graph& g, const Coupling& c);

/**
 * Full curve document: embeds the graph, both marginals, the orientation,
 * weights, scaling data and all polynomial coefficients, so a saved curve
 * can be re-evaluated and re-verified standalone. Loading reconstructs the
 * pipeline result bit-exactly (distances are recomputed; they are
 * deterministic).
 */
nlohmann::json pipeline_to_json(const PipelineResult& r);
PipelineResult pipeline_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const VerificationReport& rep);

/** File helpers (throw io_error on failure). */
nlohmann::json read_json_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& text);

/** Long-format density table: header "t,vertex,mass", one row per (time,
 * vertex) pair, floats formatted with format_double. */
std::string sample_csv(const PipelineResult& r, const std::vector<double>& times);

/** Entropy table: header "t,entropy", one row per grid point. */
std::string entropy_csv(const PipelineResult& r, int grid_points);

/** Custom arc weights: [{"tail":..., "head":..., "weight":...}, ...]. */
std::vector<std::tuple<std::string, std::string, double>> arc_weights_from_json(
    const nlohmann::json& j);

}  // namespace w1plus
