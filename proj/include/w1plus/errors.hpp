#pragma once

#include <stdexcept>
#include <string>

namespace w1plus {

/**
 * Machine-readable failure categories.
 *
 * Every throwing operation in the library raises w1plus::Error carrying one
 * of these codes; the CLI maps them onto process exit codes (validation -> 1,
 * no_convergence -> 2) and a JSON error object on stderr.
 */
enum class Errc {
  // graph / measure loading
  duplicate_vertex,
  dangling_edge_endpoint,
  disconnected_graph,
  self_loop,
  unknown_vertex,
  unnormalized_measure,
  negative_mass,
  // transport
  unbalanced_marginals,
  // orientation
  orientation_conflict,
  not_spanning,
  // weights
  divergence_violation,
  not_comparable,
  // scaling
  empty_face,
  no_convergence,
  support_violation,
  // curve evaluation
  zero_density,
  perturbation_infeasible,
  too_many_geodesics,
  // generic
  invalid_argument,
  io_error,
};

/** Stable identifier string for an error code (used in CLI error JSON). */
const char* errc_name(Errc code) noexcept;

/** Exception type carrying an Errc plus a human-readable message. */
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& message)
      : std::runtime_error(message), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/** Throw Error(code, message). Out-of-line to keep call sites small. */
[[noreturn]] void fail(Errc code, const std::string& message);

}  // namespace w1plus
