#include "w1plus/weights.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "w1plus/errors.hpp"

namespace w1plus {

namespace {
constexpr double kExactCountLimit = 9007199254740992.0;  // 2^53
}

WeightSystem default_weights(const OrientedGraph& og) {
  // up(x): oriented paths from a source to x; down(x): from x to a sink.
  // Both are exact in double while below 2^53.
  std::vector<double> up(static_cast<std::size_t>(og.n), 0.0);
  std::vector<double> down(static_cast<std::size_t>(og.n), 0.0);
  for (int v : og.topo) {
    double u = og.in_arcs[static_cast<std::size_t>(v)].empty() ? 1.0 : 0.0;
    for (int k : og.in_arcs[static_cast<std::size_t>(v)])
      u += up[static_cast<std::size_t>(og.arcs[static_cast<std::size_t>(k)].first)];
    up[static_cast<std::size_t>(v)] = u;
  }
  for (auto it = og.topo.rbegin(); it != og.topo.rend(); ++it) {
    const int v = *it;
    double d = og.out_arcs[static_cast<std::size_t>(v)].empty() ? 1.0 : 0.0;
    for (int k : og.out_arcs[static_cast<std::size_t>(v)])
      d += down[static_cast<std::size_t>(og.arcs[static_cast<std::size_t>(k)].second)];
    down[static_cast<std::size_t>(v)] = d;
  }

  WeightSystem m;
  m.vertex.assign(static_cast<std::size_t>(og.n), 0.0);
  m.arc.assign(og.arcs.size(), 0.0);
  for (int v : og.active) {
    const double prod = up[static_cast<std::size_t>(v)] * down[static_cast<std::size_t>(v)];
    m.vertex[static_cast<std::size_t>(v)] = prod;
    if (up[static_cast<std::size_t>(v)] > kExactCountLimit ||
        down[static_cast<std::size_t>(v)] > kExactCountLimit || prod > kExactCountLimit)
      m.overflow = true;
  }
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    const double prod = up[static_cast<std::size_t>(og.arcs[k].first)] *
                        down[static_cast<std::size_t>(og.arcs[k].second)];
    m.arc[k] = prod;
    if (prod > kExactCountLimit) m.overflow = true;
  }
  return m;
}

WeightSystem weights_from_arc_table(
    const Graph& g, const OrientedGraph& og,
    const std::vector<std::tuple<std::string, std::string, double>>& table) {
  WeightSystem m;
  m.vertex.assign(static_cast<std::size_t>(og.n), 0.0);
  m.arc.assign(og.arcs.size(), 0.0);
  std::vector<char> covered(og.arcs.size(), 0);
  for (const auto& [tail, head, w] : table) {
    const int k = og.arc_index(g.index_of(tail), g.index_of(head));
    if (k < 0)
      fail(Errc::invalid_argument,
           "'" + tail + "' -> '" + head + "' is not an oriented arc of this instance");
    if (covered[static_cast<std::size_t>(k)])
      fail(Errc::invalid_argument,
           "duplicate weight for arc '" + tail + "' -> '" + head + "'");
    if (!(w > 0.0)) fail(Errc::invalid_argument, "arc weights must be positive");
    covered[static_cast<std::size_t>(k)] = 1;
    m.arc[static_cast<std::size_t>(k)] = w;
  }
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    if (!covered[k])
      fail(Errc::invalid_argument, "custom weights do not cover every oriented arc");
  }
  for (int v : og.active) {
    const auto& out = og.out_arcs[static_cast<std::size_t>(v)];
    const auto& in = og.in_arcs[static_cast<std::size_t>(v)];
    double sum = 0.0;
    for (int k : out.empty() ? in : out) sum += m.arc[static_cast<std::size_t>(k)];
    m.vertex[static_cast<std::size_t>(v)] = out.empty() && in.empty() ? 1.0 : sum;
  }
  validate_weights(og, m);
  return m;
}

void validate_weights(const OrientedGraph& og, const WeightSystem& m, double tol) {
  if (m.vertex.size() != static_cast<std::size_t>(og.n) || m.arc.size() != og.arcs.size())
    fail(Errc::invalid_argument, "weight system shape does not match the oriented graph");
  for (int v : og.active) {
    if (!(m.vertex[static_cast<std::size_t>(v)] > 0.0))
      fail(Errc::invalid_argument, "vertex weight must be positive on the active set");
  }
  for (std::size_t k = 0; k < og.arcs.size(); ++k) {
    if (!(m.arc[k] > 0.0))
      fail(Errc::invalid_argument, "arc weight must be positive");
  }
  for (int v : og.active) {
    const double mv = m.vertex[static_cast<std::size_t>(v)];
    if (!og.out_arcs[static_cast<std::size_t>(v)].empty()) {
      long double out_sum = 0.0L;
      for (int k : og.out_arcs[static_cast<std::size_t>(v)]) out_sum += m.arc[static_cast<std::size_t>(k)];
      if (std::abs(static_cast<double>(out_sum) - mv) > tol * std::max(1.0, mv))
        fail(Errc::divergence_violation,
             "outgoing arc weights do not sum to the vertex weight");
    }
    if (!og.in_arcs[static_cast<std::size_t>(v)].empty()) {
      long double in_sum = 0.0L;
      for (int k : og.in_arcs[static_cast<std::size_t>(v)]) in_sum += m.arc[static_cast<std::size_t>(k)];
      if (std::abs(static_cast<double>(in_sum) - mv) > tol * std::max(1.0, mv))
        fail(Errc::divergence_violation,
             "incoming arc weights do not sum to the vertex weight");
    }
  }
}

std::vector<double> pair_weights_from(const OrientedGraph& og, const WeightSystem& m,
                                      int x) {
  std::vector<double> w(static_cast<std::size_t>(og.n), 0.0);
  if (x < 0 || x >= og.n || !og.is_active[static_cast<std::size_t>(x)]) return w;
  w[static_cast<std::size_t>(x)] = m.vertex[static_cast<std::size_t>(x)];
  bool started = false;
  for (int v : og.topo) {
    if (v == x) started = true;
    if (!started || w[static_cast<std::size_t>(v)] == 0.0) continue;
    const double scaled = w[static_cast<std::size_t>(v)] / m.vertex[static_cast<std::size_t>(v)];
    for (int k : og.out_arcs[static_cast<std::size_t>(v)]) {
      w[static_cast<std::size_t>(og.arcs[static_cast<std::size_t>(k)].second)] +=
          scaled * m.arc[static_cast<std::size_t>(k)];
    }
  }
  return w;
}

std::vector<double> pair_weights_into(const OrientedGraph& og, const WeightSystem& m,
                                      int y) {
  std::vector<double> w(static_cast<std::size_t>(og.n), 0.0);
  if (y < 0 || y >= og.n || !og.is_active[static_cast<std::size_t>(y)]) return w;
  w[static_cast<std::size_t>(y)] = m.vertex[static_cast<std::size_t>(y)];
  bool started = false;
  for (auto it = og.topo.rbegin(); it != og.topo.rend(); ++it) {
    const int v = *it;
    if (v == y) started = true;
    if (!started || w[static_cast<std::size_t>(v)] == 0.0) continue;
    const double scaled = w[static_cast<std::size_t>(v)] / m.vertex[static_cast<std::size_t>(v)];
    for (int k : og.in_arcs[static_cast<std::size_t>(v)]) {
      w[static_cast<std::size_t>(og.arcs[static_cast<std::size_t>(k)].first)] +=
          scaled * m.arc[static_cast<std::size_t>(k)];
    }
  }
  return w;
}

double tuple_weight(const OrientedGraph& og, const WeightSystem& m,
                    std::span<const int> chain) {
  if (chain.empty()) fail(Errc::invalid_argument, "empty chain");
  for (int v : chain) {
    if (v < 0 || v >= og.n || !og.is_active[static_cast<std::size_t>(v)])
      fail(Errc::not_comparable, "chain leaves the active set");
  }
  if (chain.size() == 1) return m.vertex[static_cast<std::size_t>(chain[0])];

  long double acc = 1.0L;
  for (std::size_t i = 0; i + 1 < chain.size(); ++i) {
    double pw;
    if (chain[i] == chain[i + 1]) {
      pw = m.vertex[static_cast<std::size_t>(chain[i])];
    } else {
      pw = pair_weights_from(og, m, chain[i])[static_cast<std::size_t>(chain[i + 1])];
    }
    if (pw == 0.0)
      fail(Errc::not_comparable, "consecutive chain entries are not comparable");
    acc *= pw;
  }
  for (std::size_t i = 1; i + 1 < chain.size(); ++i)
    acc /= m.vertex[static_cast<std::size_t>(chain[i])];
  return static_cast<double>(acc);
}

Kernels::Kernels(const OrientedGraph& og, const WeightSystem& m)
    : n_(og.n), arcs_(og.arcs), mass_(m.vertex) {
  ratio_in_.resize(arcs_.size());
  ratio_out_.resize(arcs_.size());
  for (std::size_t k = 0; k < arcs_.size(); ++k) {
    ratio_in_[k] = m.arc[k] / m.vertex[static_cast<std::size_t>(arcs_[k].second)];
    ratio_out_[k] = m.arc[k] / m.vertex[static_cast<std::size_t>(arcs_[k].first)];
  }
}

std::vector<double> Kernels::apply_K(const std::vector<double>& u) const {
  std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
  for (std::size_t k = 0; k < arcs_.size(); ++k)
    out[static_cast<std::size_t>(arcs_[k].second)] +=
        ratio_in_[k] * u[static_cast<std::size_t>(arcs_[k].first)];
  return out;
}

std::vector<double> Kernels::apply_Kstar(const std::vector<double>& u) const {
  std::vector<double> out(static_cast<std::size_t>(n_), 0.0);
  for (std::size_t k = 0; k < arcs_.size(); ++k)
    out[static_cast<std::size_t>(arcs_[k].first)] +=
        ratio_out_[k] * u[static_cast<std::size_t>(arcs_[k].second)];
  return out;
}

double Kernels::inner(const std::vector<double>& u, const std::vector<double>& v) const {
  long double acc = 0.0L;
  for (int x = 0; x < n_; ++x)
    acc += static_cast<long double>(mass_[static_cast<std::size_t>(x)]) *
           u[static_cast<std::size_t>(x)] * v[static_cast<std::size_t>(x)];
  return static_cast<double>(acc);
}

}  // namespace w1plus
