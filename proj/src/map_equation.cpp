#include "mapreg/map_equation.hpp"

#include <algorithm>
#include <cmath>
#include <unordered_map>

#include "mapreg/error.hpp"

namespace mapreg {

double one_level_codelength(std::span<const double> p) {
  double total = 0.0;
  double h = 0.0;
  for (double x : p) {
    if (x < 0.0) throw Error("visit rates must be non-negative");
    total += x;
    h -= plogp(x);
  }
  if (std::abs(total - 1.0) > 1e-9) throw Error("visit rates must sum to 1");
  return h;
}

FlowGraph::FlowGraph(std::vector<NodeFlow> nodes, std::vector<Arc> arc_flows) : nodes_(std::move(nodes)) {
  const std::size_t n = nodes_.size();
  std::sort(arc_flows.begin(), arc_flows.end(), [](const Arc& a, const Arc& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  std::vector<Arc> merged;
  merged.reserve(arc_flows.size());
  for (const Arc& a : arc_flows) {
    if (a.source == a.target || a.weight == 0.0) continue;
    if (a.source >= n || a.target >= n) throw Error("flow arc endpoint out of range");
    if (!merged.empty() && merged.back().source == a.source && merged.back().target == a.target) {
      merged.back().weight += a.weight;
    } else {
      merged.push_back(a);
    }
  }

  out_offsets_.assign(n + 1, 0);
  in_offsets_.assign(n + 1, 0);
  for (const Arc& a : merged) {
    ++out_offsets_[a.source + 1];
    ++in_offsets_[a.target + 1];
  }
  for (std::size_t i = 0; i < n; ++i) {
    out_offsets_[i + 1] += out_offsets_[i];
    in_offsets_[i + 1] += in_offsets_[i];
  }
  out_.resize(merged.size());
  in_.resize(merged.size());
  {
    std::vector<std::size_t> oc(out_offsets_.begin(), out_offsets_.end() - 1);
    std::vector<std::size_t> ic(in_offsets_.begin(), in_offsets_.end() - 1);
    for (const Arc& a : merged) {
      out_[oc[a.source]++] = {a.target, a.weight};
      in_[ic[a.target]++] = {a.source, a.weight};
    }
  }

  for (const auto& nf : nodes_) {
    total_out_prior_ += nf.out_prior;
    total_out_restart_ += nf.out_restart;
    total_node_entropy_ += nf.node_entropy;
  }
  out_flow_.assign(n, 0.0);
  in_flow_.assign(n, 0.0);
  for (std::size_t u = 0; u < n; ++u) {
    const auto& nf = nodes_[u];
    double out = 0.0;
    for (const auto& l : out_links(static_cast<NodeId>(u))) out += l.flow;
    double in = 0.0;
    for (const auto& l : in_links(static_cast<NodeId>(u))) in += l.flow;
    out += nf.out_prior * (1.0 - nf.in_prior) + nf.out_restart * (1.0 - nf.in_restart);
    in += (total_out_prior_ - nf.out_prior) * nf.in_prior + (total_out_restart_ - nf.out_restart) * nf.in_restart;
    out_flow_[u] = out;
    in_flow_[u] = in;
  }
}

FlowGraph make_flow_graph(const FlowModel& fm) {
  if (!fm.has_visit_rates()) throw Error("flow model has no visit rates");
  const std::size_t n = fm.node_count();
  const auto p = fm.visit_rates();
  const auto prior = fm.prior_distribution();
  const auto restart = fm.dangling_distribution();
  std::vector<FlowGraph::NodeFlow> nodes(n);
  std::vector<Arc> arcs;
  for (NodeId u = 0; u < n; ++u) {
    auto& nf = nodes[u];
    nf.flow = p[u];
    nf.node_entropy = plogp(p[u]);
    nf.in_prior = prior.empty() ? 0.0 : prior[u];
    nf.in_restart = restart[u];
    if (fm.dangling(u)) {
      nf.out_restart = p[u];
      continue;
    }
    if (!prior.empty()) nf.out_prior = p[u] * fm.alpha(u);
    if (fm.row_sum(u) > 0.0) {
      const double scale = p[u] * (1.0 - fm.alpha(u)) / fm.row_sum(u);
      for (const auto& e : fm.row(u)) arcs.push_back({u, e.target, scale * e.weight});
    }
  }
  return FlowGraph(std::move(nodes), std::move(arcs));
}

namespace {

void add_teleport_terms(std::vector<ModuleFlow>& modules, double total_prior, double total_restart) {
  for (auto& m : modules) {
    m.exit += m.out_prior * (1.0 - m.in_prior) + m.out_restart * (1.0 - m.in_restart);
    m.enter += (total_prior - m.out_prior) * m.in_prior + (total_restart - m.out_restart) * m.in_restart;
  }
}

}  // namespace

std::vector<ModuleFlow> module_flows(const FlowGraph& g, std::span<const ModuleId> assignment) {
  if (assignment.size() != g.node_count()) throw Error("assignment does not cover all nodes");
  ModuleId count = 0;
  for (ModuleId m : assignment) count = std::max(count, m + 1);
  std::vector<ModuleFlow> modules(count);
  for (NodeId u = 0; u < g.node_count(); ++u) {
    auto& m = modules[assignment[u]];
    const auto& nf = g.node(u);
    m.flow += nf.flow;
    m.node_entropy += nf.node_entropy;
    m.out_prior += nf.out_prior;
    m.in_prior += nf.in_prior;
    m.out_restart += nf.out_restart;
    m.in_restart += nf.in_restart;
    ++m.size;
    for (const auto& l : g.out_links(u)) {
      if (assignment[l.node] != assignment[u]) {
        m.exit += l.flow;
        modules[assignment[l.node]].enter += l.flow;
      }
    }
  }
  add_teleport_terms(modules, g.total_out_prior(), g.total_out_restart());
  return modules;
}

std::vector<ModuleFlow> module_flows(const FlowModel& fm, std::span<const ModuleId> assignment) {
  return module_flows(make_flow_graph(fm), assignment);
}

double codelength_from_modules(std::span<const ModuleFlow> modules) {
  double enter = 0.0;
  double terms = 0.0;
  for (const auto& m : modules) {
    if (m.size == 0) continue;
    enter += m.enter;
    terms += -plogp(m.enter) - plogp(m.exit) + plogp(m.codebook()) - m.node_entropy;
  }
  return plogp(enter) + terms;
}

double two_level_codelength(const FlowGraph& g, std::span<const ModuleId> assignment) {
  return codelength_from_modules(module_flows(g, assignment));
}

double two_level_codelength(const FlowModel& fm, std::span<const ModuleId> assignment) {
  return two_level_codelength(make_flow_graph(fm), assignment);
}

std::vector<ModuleId> compact_assignment(std::span<const ModuleId> assignment) {
  std::unordered_map<ModuleId, ModuleId> ids;
  std::vector<ModuleId> out;
  out.reserve(assignment.size());
  for (ModuleId m : assignment) {
    auto [it, inserted] = ids.try_emplace(m, static_cast<ModuleId>(ids.size()));
    out.push_back(it->second);
  }
  return out;
}

Partition::Partition(const FlowGraph& g) : graph_(&g) {
  const std::size_t n = g.node_count();
  assignment_.resize(n);
  for (std::size_t u = 0; u < n; ++u) assignment_[u] = static_cast<ModuleId>(u);
  refresh();
}

Partition::Partition(const FlowGraph& g, std::span<const ModuleId> assignment)
    : graph_(&g), assignment_(assignment.begin(), assignment.end()) {
  if (assignment_.size() != g.node_count()) throw Error("assignment does not cover all nodes");
  for (ModuleId m : assignment_) {
    if (m >= g.node_count()) throw Error("module id out of range");
  }
  refresh();
}

void Partition::refresh() {
  const std::size_t n = graph_->node_count();
  modules_ = module_flows(*graph_, assignment_);
  modules_.resize(n);
  empty_.clear();
  module_count_ = 0;
  for (std::size_t m = n; m-- > 0;) {
    if (modules_[m].size == 0) {
      modules_[m] = ModuleFlow{};
      empty_.push_back(static_cast<ModuleId>(m));
    } else {
      ++module_count_;
    }
  }
  sum_enter_ = sum_plogp_enter_ = sum_plogp_exit_ = sum_plogp_codebook_ = 0.0;
  for (const auto& m : modules_) {
    if (m.size > 0) add_terms(m, 1.0);
  }
}

void Partition::add_terms(const ModuleFlow& m, double sign) noexcept {
  sum_enter_ += sign * m.enter;
  sum_plogp_enter_ += sign * plogp(m.enter);
  sum_plogp_exit_ += sign * plogp(m.exit);
  sum_plogp_codebook_ += sign * plogp(m.codebook());
}

ModuleId Partition::fresh_module(NodeId u) const noexcept {
  const ModuleId own = assignment_[u];
  if (modules_[own].size == 1 || empty_.empty()) return own;
  return empty_.back();
}

double Partition::codelength() const noexcept {
  return plogp(sum_enter_) - sum_plogp_enter_ - sum_plogp_exit_ + sum_plogp_codebook_ - graph_->total_node_entropy();
}

double Partition::recompute_codelength() const { return two_level_codelength(*graph_, assignment_); }

Partition::LinkSums Partition::link_sums(NodeId u, ModuleId m) const {
  LinkSums sums;
  for (const auto& l : graph_->out_links(u)) {
    if (l.node != u && assignment_[l.node] == m) sums.out_to += l.flow;
  }
  for (const auto& l : graph_->in_links(u)) {
    if (l.node != u && assignment_[l.node] == m) sums.in_from += l.flow;
  }
  return sums;
}

Partition::MoveResult Partition::moved_flows(NodeId u, ModuleId target, const LinkSums& current,
                                             const LinkSums& to) const {
  const auto& g = *graph_;
  const auto& nu = g.node(u);
  const ModuleFlow& a = modules_[assignment_[u]];
  const ModuleFlow& b = modules_[target];
  const double out_total = g.out_flow(u);
  const double in_total = g.in_flow(u);

  // Flow between u and the rest of its current module, and between u and the target.
  const double u_to_a = current.out_to + nu.out_prior * (a.in_prior - nu.in_prior) +
                        nu.out_restart * (a.in_restart - nu.in_restart);
  const double a_to_u = current.in_from + (a.out_prior - nu.out_prior) * nu.in_prior +
                        (a.out_restart - nu.out_restart) * nu.in_restart;
  const double u_to_b = to.out_to + nu.out_prior * b.in_prior + nu.out_restart * b.in_restart;
  const double b_to_u = to.in_from + b.out_prior * nu.in_prior + b.out_restart * nu.in_restart;

  MoveResult r{a, b};
  ModuleFlow& old_m = r.old_module;
  old_m.size -= 1;
  if (old_m.size == 0) {
    old_m = ModuleFlow{};
  } else {
    old_m.exit = a.exit - (out_total - u_to_a) + a_to_u;
    old_m.enter = a.enter - (in_total - a_to_u) + u_to_a;
    old_m.flow -= nu.flow;
    old_m.node_entropy -= nu.node_entropy;
    old_m.out_prior -= nu.out_prior;
    old_m.in_prior -= nu.in_prior;
    old_m.out_restart -= nu.out_restart;
    old_m.in_restart -= nu.in_restart;
  }

  ModuleFlow& new_m = r.new_module;
  new_m.exit = b.exit - b_to_u + out_total - u_to_b;
  new_m.enter = b.enter - u_to_b + in_total - b_to_u;
  new_m.flow += nu.flow;
  new_m.node_entropy += nu.node_entropy;
  new_m.out_prior += nu.out_prior;
  new_m.in_prior += nu.in_prior;
  new_m.out_restart += nu.out_restart;
  new_m.in_restart += nu.in_restart;
  new_m.size += 1;
  return r;
}

double Partition::delta_move(NodeId u, ModuleId target) const {
  if (target == assignment_[u]) return 0.0;
  return delta_move(u, target, link_sums(u, assignment_[u]), link_sums(u, target));
}

double Partition::delta_move(NodeId u, ModuleId target, const LinkSums& current, const LinkSums& to) const {
  const ModuleId source = assignment_[u];
  if (target == source) return 0.0;
  const ModuleFlow& a = modules_[source];
  const ModuleFlow& b = modules_[target];
  const auto [a2, b2] = moved_flows(u, target, current, to);

  const double enter_after = sum_enter_ - a.enter - b.enter + a2.enter + b2.enter;
  double delta = plogp(enter_after) - plogp(sum_enter_);
  delta -= plogp(a2.enter) + plogp(b2.enter) - plogp(a.enter) - plogp(b.enter);
  delta -= plogp(a2.exit) + plogp(b2.exit) - plogp(a.exit) - plogp(b.exit);
  delta += plogp(a2.codebook()) + plogp(b2.codebook()) - plogp(a.codebook()) - plogp(b.codebook());
  return delta;
}

void Partition::move(NodeId u, ModuleId target) {
  const ModuleId source = assignment_[u];
  if (target == source) return;
  if (target >= modules_.size()) throw Error("module id out of range");
  const auto [a2, b2] = moved_flows(u, target, link_sums(u, source), link_sums(u, target));

  const bool target_was_empty = modules_[target].size == 0;
  add_terms(modules_[source], -1.0);
  if (!target_was_empty) add_terms(modules_[target], -1.0);
  modules_[source] = a2;
  modules_[target] = b2;
  if (a2.size > 0) add_terms(a2, 1.0);
  add_terms(b2, 1.0);
  assignment_[u] = target;

  if (target_was_empty) {
    auto it = std::find(empty_.rbegin(), empty_.rend(), target);
    empty_.erase(std::next(it).base());
    ++module_count_;
  }
  if (a2.size == 0) {
    empty_.push_back(source);
    --module_count_;
  }
}

}  // namespace mapreg
