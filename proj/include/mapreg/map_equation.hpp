#pragma once

#include <cmath>
#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mapreg/flow_model.hpp"

namespace mapreg {

using ModuleId = std::uint32_t;

/// x * log2(x) with 0 log 0 := 0; tiny negative round-off counts as 0.
inline double plogp(double x) noexcept { return x > 0.0 ? x * std::log2(x) : 0.0; }

/// Shannon entropy of visit rates. Throws when sum(p) deviates from 1 by more than 1e-9.
double one_level_codelength(std::span<const double> p);

/// Per-node flow data with arc flows and two teleportation channels: the
/// prior (walker at u jumps with flow out_prior[u] to v with probability
/// in_prior[v]) and the dangling restart (out_restart / in_restart). Nodes of
/// an aggregated graph carry the summed data of their members, and
/// node_entropy keeps the members' sum of p log p so that codelengths are
/// preserved under aggregation.
class FlowGraph {
 public:
  struct Link {
    NodeId node;
    double flow;
  };

  struct NodeFlow {
    double flow = 0.0;
    double node_entropy = 0.0;
    double out_prior = 0.0;
    double in_prior = 0.0;
    double out_restart = 0.0;
    double in_restart = 0.0;
  };

  FlowGraph() = default;

  /// Builds the graph from node data and arcs (u, v, flow) with u != v;
  /// duplicate arcs are merged.
  FlowGraph(std::vector<NodeFlow> nodes, std::vector<Arc> arc_flows);

  std::size_t node_count() const noexcept { return nodes_.size(); }
  const NodeFlow& node(NodeId u) const noexcept { return nodes_[u]; }
  std::span<const NodeFlow> nodes() const noexcept { return nodes_; }

  std::span<const Link> out_links(NodeId u) const noexcept {
    return std::span<const Link>(out_).subspan(out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]);
  }
  std::span<const Link> in_links(NodeId u) const noexcept {
    return std::span<const Link>(in_).subspan(in_offsets_[u], in_offsets_[u + 1] - in_offsets_[u]);
  }

  /// Flow leaving u toward other nodes (arcs + teleportation not landing on u).
  double out_flow(NodeId u) const noexcept { return out_flow_[u]; }
  /// Flow entering u from other nodes.
  double in_flow(NodeId u) const noexcept { return in_flow_[u]; }

  double total_out_prior() const noexcept { return total_out_prior_; }
  double total_out_restart() const noexcept { return total_out_restart_; }
  double total_node_entropy() const noexcept { return total_node_entropy_; }

 private:
  std::vector<NodeFlow> nodes_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Link> out_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<Link> in_;
  std::vector<double> out_flow_;
  std::vector<double> in_flow_;
  double total_out_prior_ = 0.0;
  double total_out_restart_ = 0.0;
  double total_node_entropy_ = 0.0;
};

/// Flow graph of a model with visit rates: arc flow p_u (1 - alpha_u) w_uv / S_u,
/// prior flow p_u alpha_u, restart flow p_u for dangling nodes.
FlowGraph make_flow_graph(const FlowModel& fm);

struct ModuleFlow {
  double enter = 0.0;  // q_m
  double exit = 0.0;   // m_exit
  double flow = 0.0;   // sum of member visit rates
  double node_entropy = 0.0;
  double out_prior = 0.0;
  double in_prior = 0.0;
  double out_restart = 0.0;
  double in_restart = 0.0;
  std::size_t size = 0;

  /// Codebook use rate p_m = m_exit + sum of member visit rates.
  double codebook() const noexcept { return exit + flow; }
};

/// Entry, exit and flow per module, O(arcs + n + modules). `assignment`
/// holds module ids in [0, module_count); empty modules get zero flows.
std::vector<ModuleFlow> module_flows(const FlowGraph& g, std::span<const ModuleId> assignment);
std::vector<ModuleFlow> module_flows(const FlowModel& fm, std::span<const ModuleId> assignment);

/// L(M) = q H(Q) + sum_m p_m H(P_m), in bits.
double two_level_codelength(const FlowGraph& g, std::span<const ModuleId> assignment);
double two_level_codelength(const FlowModel& fm, std::span<const ModuleId> assignment);

/// Codelength from precomputed module flows.
double codelength_from_modules(std::span<const ModuleFlow> modules);

/// Renumbers module ids to 0..k-1 in order of first appearance.
std::vector<ModuleId> compact_assignment(std::span<const ModuleId> assignment);

/// Mutable two-level partition of a flow graph with incrementally maintained
/// module flows. Module ids live in [0, node_count); empty ids are reused.
class Partition {
 public:
  /// All nodes in their own module.
  explicit Partition(const FlowGraph& g);
  Partition(const FlowGraph& g, std::span<const ModuleId> assignment);

  const FlowGraph& graph() const noexcept { return *graph_; }
  ModuleId module_of(NodeId u) const noexcept { return assignment_[u]; }
  std::span<const ModuleId> assignment() const noexcept { return assignment_; }
  const ModuleFlow& module(ModuleId m) const noexcept { return modules_[m]; }
  std::size_t module_count() const noexcept { return module_count_; }

  /// An id with no members, or the node's own module if it is alone.
  ModuleId fresh_module(NodeId u) const noexcept;

  /// Codelength from the maintained module terms.
  double codelength() const noexcept;
  /// Codelength recomputed from scratch.
  double recompute_codelength() const;

  /// L(after) - L(before) for moving u to `target`. Arc flows between u and
  /// its current and target modules are gathered from u's links.
  double delta_move(NodeId u, ModuleId target) const;

  struct LinkSums {
    double out_to = 0.0;   // arc flow u -> module (excluding u)
    double in_from = 0.0;  // arc flow module -> u (excluding u)
  };
  /// Same as delta_move with the arc-flow sums supplied by the caller.
  double delta_move(NodeId u, ModuleId target, const LinkSums& current, const LinkSums& to) const;

  void move(NodeId u, ModuleId target);

  /// Rebuilds module flows and terms from the assignment to drop drift.
  void refresh();

 private:
  struct MoveResult {
    ModuleFlow old_module;
    ModuleFlow new_module;
  };
  MoveResult moved_flows(NodeId u, ModuleId target, const LinkSums& current, const LinkSums& to) const;
  LinkSums link_sums(NodeId u, ModuleId m) const;
  void add_terms(const ModuleFlow& m, double sign) noexcept;

  const FlowGraph* graph_;
  std::vector<ModuleId> assignment_;
  std::vector<ModuleFlow> modules_;
  std::vector<ModuleId> empty_;
  std::size_t module_count_ = 0;
  double sum_enter_ = 0.0;
  double sum_plogp_enter_ = 0.0;
  double sum_plogp_exit_ = 0.0;
  double sum_plogp_codebook_ = 0.0;
};

}  // namespace mapreg
