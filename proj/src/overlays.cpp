#include "mapreg/overlays.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numeric>

#include "mapreg/error.hpp"

namespace mapreg {

namespace {

// Dense accumulator with a touched list, reused across rows of one thread.
class RowAccumulator {
 public:
  explicit RowAccumulator(std::size_t n) : values_(n, 0.0), seen_(n, 0) {}

  void add(NodeId v, double w) {
    if (!seen_[v]) {
      seen_[v] = 1;
      touched_.push_back(v);
    }
    values_[v] += w;
  }

  // Emits (u, v, value) sorted by v, skipping the diagonal and zeros, and resets.
  void flush(NodeId u, std::vector<Arc>& out) {
    std::sort(touched_.begin(), touched_.end());
    for (NodeId v : touched_) {
      if (v != u && values_[v] > 0.0) out.push_back({u, v, values_[v]});
      values_[v] = 0.0;
      seen_[v] = 0;
    }
    touched_.clear();
  }

 private:
  std::vector<double> values_;
  std::vector<char> seen_;
  std::vector<NodeId> touched_;
};

std::vector<std::vector<NodeId>> undirected_neighborhoods(const Network& net) {
  std::vector<std::vector<NodeId>> nbrs(net.node_count());
  for (NodeId u = 0; u < net.node_count(); ++u) {
    auto& list = nbrs[u];
    for (const Arc& a : net.out_arcs(u)) list.push_back(a.target);
    for (const Arc& a : net.in_arcs(u)) list.push_back(a.source);
    std::sort(list.begin(), list.end());
    list.erase(std::unique(list.begin(), list.end()), list.end());
  }
  return nbrs;
}

// Common-neighbor counts of u with every node two hops away, turned into
// Jaccard weights.
void cn_row(const std::vector<std::vector<NodeId>>& nbrs, NodeId u, RowAccumulator& acc, std::vector<Arc>& out) {
  for (NodeId a : nbrs[u]) {
    for (NodeId v : nbrs[a]) {
      if (v != u) acc.add(v, 1.0);
    }
  }
  std::vector<Arc> row;
  acc.flush(u, row);
  for (Arc& arc : row) {
    const double common = arc.weight;
    const double uni = static_cast<double>(nbrs[u].size() + nbrs[arc.target].size()) - common;
    arc.weight = common / uni;
    out.push_back(arc);
  }
}

void mmt_row(const Network& net, NodeId u, double beta, RowAccumulator& acc, std::vector<Arc>& out) {
  const double su = net.degrees(u).s_out;
  if (su <= 0.0) return;
  for (const Arc& a : net.out_arcs(u)) {
    const double t_uv = a.weight / su;
    acc.add(a.target, beta * t_uv);
    const double sv = net.degrees(a.target).s_out;
    if (sv <= 0.0) continue;
    for (const Arc& b : net.out_arcs(a.target)) acc.add(b.target, (1.0 - beta) * t_uv * b.weight / sv);
  }
  acc.flush(u, out);
}

double entropy_bits(std::span<const double> weights) {
  double total = 0.0;
  for (double w : weights) total += w;
  double h = 0.0;
  for (double w : weights) {
    if (w > 0.0) {
      const double q = w / total;
      h -= q * std::log2(q);
    }
  }
  return h;
}

class VmtWalker {
 public:
  VmtWalker(const Network& net, double delta, RowAccumulator& acc)
      : net_(net), delta_(delta), acc_(acc), on_path_(net.node_count(), 0) {}

  // Stopping distribution of walks from u, accumulated into acc_.
  void run(NodeId u, double budget) {
    auto first = net_.out_arcs(u);
    if (first.empty()) return;
    const double remaining = budget - vmt_step_cost(net_, first);
    const double su = net_.degrees(u).s_out;
    on_path_[u] = 1;
    for (const Arc& a : first) walk(a.target, a.weight / su, remaining);
    on_path_[u] = 0;
  }

 private:
  static constexpr double kBudgetSlack = 1e-12;

  void walk(NodeId x, double mass, double remaining) {
    on_path_[x] = 1;
    std::vector<Arc> candidates;
    for (const Arc& a : net_.out_arcs(x)) {
      if (!on_path_[a.target]) candidates.push_back(a);
    }
    const double cost = candidates.empty() ? 0.0 : vmt_step_cost(net_, candidates);
    if (candidates.empty() || cost > remaining + kBudgetSlack) {
      acc_.add(x, mass);
    } else {
      acc_.add(x, mass * delta_);
      const double go = mass * (1.0 - delta_);
      double total = 0.0;
      for (const Arc& a : candidates) total += a.weight;
      for (const Arc& a : candidates) walk(a.target, go * a.weight / total, remaining - cost);
    }
    on_path_[x] = 0;
  }

  const Network& net_;
  double delta_;
  RowAccumulator& acc_;
  std::vector<char> on_path_;
};

double depositing_flow(const Network& net, std::span<const double> p) {
  double total = 0.0;
  for (NodeId u = 0; u < net.node_count(); ++u) {
    if (net.degrees(u).k_out > 0) total += p[u];
  }
  return total;
}

void vmt_row(NodeId u, double budget, double scale, std::span<const double> p, VmtWalker& walker,
             RowAccumulator& acc, std::vector<Arc>& out) {
  walker.run(u, budget);
  std::vector<Arc> row;
  acc.flush(u, row);
  for (Arc& a : row) {
    a.weight *= p[u] * scale;
    if (a.weight > 0.0) out.push_back(a);
  }
}

void check_vmt_inputs(const Network& net, std::span<const double> p, double delta) {
  if (p.size() != net.node_count()) throw Error("visit-rate vector does not match the network");
  if (!(delta > 0.0 && delta < 1.0)) throw Error("absorption probability must lie in (0, 1)");
}

WeightOverlay concat_rows(std::size_t n, std::vector<std::vector<Arc>>& rows) {
  WeightOverlay overlay{n, {}};
  std::size_t total = 0;
  for (const auto& r : rows) total += r.size();
  overlay.arcs.reserve(total);
  for (auto& r : rows) overlay.arcs.insert(overlay.arcs.end(), r.begin(), r.end());
  return overlay;
}

}  // namespace

WeightOverlay common_neighbors_overlay(const Network& net) {
  const std::size_t n = net.node_count();
  const auto nbrs = undirected_neighborhoods(net);
  std::vector<std::vector<Arc>> rows(n);
#pragma omp parallel
  {
    RowAccumulator acc(n);
#pragma omp for schedule(dynamic, 16)
    for (std::size_t u = 0; u < n; ++u) cn_row(nbrs, static_cast<NodeId>(u), acc, rows[u]);
  }
  return concat_rows(n, rows);
}

WeightOverlay mmt_overlay(const Network& net, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error("beta must lie in [0, 1]");
  const std::size_t n = net.node_count();
  std::vector<std::vector<Arc>> rows(n);
#pragma omp parallel
  {
    RowAccumulator acc(n);
#pragma omp for schedule(dynamic, 16)
    for (std::size_t u = 0; u < n; ++u) mmt_row(net, static_cast<NodeId>(u), beta, acc, rows[u]);
  }
  return concat_rows(n, rows);
}

double vmt_budget(const Network& net) {
  const auto k_max = net.max_out_degree();
  return k_max > 0 ? std::log2(static_cast<double>(k_max)) : 0.0;
}

double vmt_step_cost(const Network& net, std::span<const Arc> candidates) {
  if (candidates.empty()) return 0.0;
  if (!net.weighted()) return std::log2(static_cast<double>(candidates.size()));
  std::vector<double> w;
  w.reserve(candidates.size());
  for (const Arc& a : candidates) w.push_back(a.weight);
  return entropy_bits(w);
}

WeightOverlay vmt_overlay(const Network& net, std::span<const double> visit_rates, double delta) {
  check_vmt_inputs(net, visit_rates, delta);
  const std::size_t n = net.node_count();
  const double flow = depositing_flow(net, visit_rates);
  if (flow <= 0.0) return WeightOverlay{n, {}};
  const double scale = net.total_weight() / flow;
  const double budget = vmt_budget(net);
  std::vector<std::vector<Arc>> rows(n);
#pragma omp parallel
  {
    RowAccumulator acc(n);
    VmtWalker walker(net, delta, acc);
#pragma omp for schedule(dynamic, 4)
    for (std::size_t u = 0; u < n; ++u) {
      vmt_row(static_cast<NodeId>(u), budget, scale, visit_rates, walker, acc, rows[u]);
    }
  }
  return concat_rows(n, rows);
}

namespace serial {

WeightOverlay common_neighbors_overlay(const Network& net) {
  const std::size_t n = net.node_count();
  const auto nbrs = undirected_neighborhoods(net);
  RowAccumulator acc(n);
  WeightOverlay overlay{n, {}};
  for (NodeId u = 0; u < n; ++u) cn_row(nbrs, u, acc, overlay.arcs);
  return overlay;
}

WeightOverlay mmt_overlay(const Network& net, double beta) {
  if (!(beta >= 0.0 && beta <= 1.0)) throw Error("beta must lie in [0, 1]");
  const std::size_t n = net.node_count();
  RowAccumulator acc(n);
  WeightOverlay overlay{n, {}};
  for (NodeId u = 0; u < n; ++u) mmt_row(net, u, beta, acc, overlay.arcs);
  return overlay;
}

WeightOverlay vmt_overlay(const Network& net, std::span<const double> visit_rates, double delta) {
  check_vmt_inputs(net, visit_rates, delta);
  const std::size_t n = net.node_count();
  const double flow = depositing_flow(net, visit_rates);
  if (flow <= 0.0) return WeightOverlay{n, {}};
  const double scale = net.total_weight() / flow;
  const double budget = vmt_budget(net);
  RowAccumulator acc(n);
  VmtWalker walker(net, delta, acc);
  WeightOverlay overlay{n, {}};
  for (NodeId u = 0; u < n; ++u) vmt_row(u, budget, scale, visit_rates, walker, acc, overlay.arcs);
  return overlay;
}

}  // namespace serial

namespace {
constexpr std::array<std::pair<Method, std::string_view>, 8> kMethodTags{{
    {Method::standard, "standard"},
    {Method::global, "global"},
    {Method::cn, "cn"},
    {Method::mmt, "mmt"},
    {Method::vmt, "vmt"},
    {Method::global_cn, "global+cn"},
    {Method::global_mmt, "global+mmt"},
    {Method::global_vmt, "global+vmt"},
}};
}  // namespace

std::string_view method_tag(Method m) {
  for (const auto& [method, tag] : kMethodTags) {
    if (method == m) return tag;
  }
  return "unknown";
}

Method parse_method(std::string_view tag) {
  if (tag == "none") return Method::standard;
  for (const auto& [method, name] : kMethodTags) {
    if (name == tag) return method;
  }
  throw Error("unknown method tag '" + std::string(tag) + "'");
}

bool uses_prior(Method m) {
  return m == Method::global || m == Method::global_cn || m == Method::global_mmt || m == Method::global_vmt;
}

FlowModel build_flow_model(const Network& net, Method method, const MethodParams& params) {
  WeightOverlay local{net.node_count(), {}};
  switch (method) {
    case Method::cn:
    case Method::global_cn:
      local = common_neighbors_overlay(net);
      break;
    case Method::mmt:
    case Method::global_mmt:
      local = mmt_overlay(net, params.beta);
      break;
    case Method::vmt:
    case Method::global_vmt: {
      const auto p = visit_rates(empirical_transitions(net));
      local = vmt_overlay(net, p, params.delta);
      break;
    }
    case Method::standard:
    case Method::global:
      break;
  }
  const auto global = uses_prior(method) ? GlobalRegularization::prior(params.correction) : GlobalRegularization::none();
  FlowModel fm = combine_overlays(net, global, local, params.combine);
  compute_visit_rates(fm);
  return fm;
}

}  // namespace mapreg
