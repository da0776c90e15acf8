#include "mapreg/optimizer.hpp"

#include <algorithm>
#include <memory>
#include <numeric>

#include "mapreg/error.hpp"

namespace mapreg {

void SearchConfig::validate() const {
  if (trials < 1) throw Error("trials must be >= 1");
  if (!(improvement_epsilon > 0.0)) throw Error("improvement epsilon must be > 0");
  if (max_sweeps < 1) throw Error("max_sweeps must be >= 1");
}

namespace {

// Gains smaller than this are treated as zero so round-off cannot trigger moves.
constexpr double kMinMoveGain = 1e-14;

class ModuleSums {
 public:
  explicit ModuleSums(std::size_t n) : sums_(n), seen_(n, 0) {}

  void add_out(ModuleId m, double f) { touch(m).out_to += f; }
  void add_in(ModuleId m, double f) { touch(m).in_from += f; }

  Partition::LinkSums get(ModuleId m) const { return seen_[m] ? sums_[m] : Partition::LinkSums{}; }
  std::vector<ModuleId>& touched() { return touched_; }

  void clear() {
    for (ModuleId m : touched_) {
      sums_[m] = {};
      seen_[m] = 0;
    }
    touched_.clear();
  }

 private:
  Partition::LinkSums& touch(ModuleId m) {
    if (!seen_[m]) {
      seen_[m] = 1;
      touched_.push_back(m);
    }
    return sums_[m];
  }

  std::vector<Partition::LinkSums> sums_;
  std::vector<char> seen_;
  std::vector<ModuleId> touched_;
};

}  // namespace

std::vector<ModuleId> attach_zero_flow_nodes(const FlowGraph& g, std::span<const ModuleId> assignment) {
  std::vector<double> flow;
  for (NodeId u = 0; u < assignment.size(); ++u) {
    if (assignment[u] >= flow.size()) flow.resize(assignment[u] + 1, 0.0);
    flow[assignment[u]] += g.node(u).flow;
  }
  std::vector<ModuleId> out(assignment.begin(), assignment.end());
  if (flow.empty()) return out;
  const auto heaviest = static_cast<ModuleId>(std::max_element(flow.begin(), flow.end()) - flow.begin());
  for (NodeId u = 0; u < out.size(); ++u) {
    if (g.node(u).flow <= 0.0) out[u] = heaviest;
  }
  return compact_assignment(out);
}

MovePassResult local_move_pass(Partition& partition, Rng& rng, const SearchConfig& config) {
  const FlowGraph& g = partition.graph();
  const std::size_t n = g.node_count();
  MovePassResult result;
  if (n == 0) return result;

  std::vector<NodeId> order(n);
  std::iota(order.begin(), order.end(), NodeId{0});
  rng.shuffle(std::span<NodeId>(order));

  const double before = partition.codelength();
  ModuleSums sums(n);
  std::vector<ModuleId> candidates;
  for (NodeId u : order) {
    const ModuleId current = partition.module_of(u);
    for (const auto& l : g.out_links(u)) sums.add_out(partition.module_of(l.node), l.flow);
    for (const auto& l : g.in_links(u)) sums.add_in(partition.module_of(l.node), l.flow);

    candidates.clear();
    for (ModuleId m : sums.touched()) {
      if (m != current) candidates.push_back(m);
    }
    const ModuleId fresh = partition.fresh_module(u);
    if (fresh != current) candidates.push_back(fresh);
    std::sort(candidates.begin(), candidates.end());

    const auto current_sums = sums.get(current);
    ModuleId best = current;
    double best_delta = -kMinMoveGain;
    for (ModuleId m : candidates) {
      const double d = partition.delta_move(u, m, current_sums, sums.get(m));
      if (d < best_delta) {
        best_delta = d;
        best = m;
      }
    }
    sums.clear();
    if (best != current) {
      partition.move(u, best);
      ++result.moves;
    }
  }
  partition.refresh();
  result.improvement = std::max(0.0, before - partition.codelength());
  result.improved = result.improvement > config.improvement_epsilon;
  return result;
}

double local_moves(Partition& partition, Rng& rng, const SearchConfig& config) {
  double total = 0.0;
  for (std::size_t sweep = 0; sweep < config.max_sweeps; ++sweep) {
    const auto r = local_move_pass(partition, rng, config);
    total += r.improvement;
    if (!r.improved) break;
  }
  return total;
}

FlowGraph aggregate(const FlowGraph& g, std::span<const ModuleId> assignment) {
  if (assignment.size() != g.node_count()) throw Error("assignment does not cover all nodes");
  const auto compact = compact_assignment(assignment);
  const std::size_t k = compact.empty() ? 0 : *std::max_element(compact.begin(), compact.end()) + 1;
  if (k < 2) throw Error("cannot aggregate a single-module partition");

  std::vector<FlowGraph::NodeFlow> nodes(k);
  std::vector<Arc> arcs;
  for (NodeId u = 0; u < g.node_count(); ++u) {
    auto& target = nodes[compact[u]];
    const auto& nf = g.node(u);
    target.flow += nf.flow;
    target.node_entropy += nf.node_entropy;
    target.out_prior += nf.out_prior;
    target.in_prior += nf.in_prior;
    target.out_restart += nf.out_restart;
    target.in_restart += nf.in_restart;
    for (const auto& l : g.out_links(u)) {
      if (compact[l.node] != compact[u]) arcs.push_back({compact[u], compact[l.node], l.flow});
    }
  }
  return FlowGraph(std::move(nodes), std::move(arcs));
}

SearchResult run_trial(const FlowGraph& g, Rng& rng, const SearchConfig& config) {
  const std::size_t n = g.node_count();
  SearchResult result;
  if (n == 0) return result;

  // fine[u]: node of the current level graph that contains original node u.
  std::vector<ModuleId> fine(n);
  std::iota(fine.begin(), fine.end(), ModuleId{0});
  std::unique_ptr<FlowGraph> coarse;
  const FlowGraph* current = &g;
  auto partition = std::make_unique<Partition>(*current);

  constexpr std::size_t kMaxRounds = 64;
  for (std::size_t round = 0; round < kMaxRounds; ++round) {
    while (true) {
      local_moves(*partition, rng, config);
      if (partition->module_count() == current->node_count()) break;
      const auto compact = compact_assignment(partition->assignment());
      for (auto& m : fine) m = compact[m];
      if (partition->module_count() == 1) break;
      auto next = std::make_unique<FlowGraph>(aggregate(*current, compact));
      partition.reset();
      coarse = std::move(next);
      current = coarse.get();
      partition = std::make_unique<Partition>(*current);
    }

    // Fine-tune: let single nodes leave the modules found on coarse levels.
    fine = compact_assignment(fine);
    Partition refined(g, fine);
    const double gain = local_moves(refined, rng, config);
    fine = compact_assignment(refined.assignment());
    if (gain <= config.improvement_epsilon || refined.module_count() <= 1) break;
    partition.reset();
    coarse = std::make_unique<FlowGraph>(aggregate(g, fine));
    current = coarse.get();
    partition = std::make_unique<Partition>(*current);
  }

  result.assignment = attach_zero_flow_nodes(g, compact_assignment(fine));
  result.codelength = two_level_codelength(g, result.assignment);
  return result;
}

namespace {

SearchResult pick_best(const FlowGraph& g, std::vector<SearchResult>& trials) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < trials.size(); ++i) {
    if (trials[i].codelength < trials[best].codelength) best = i;
  }
  SearchResult result = std::move(trials[best]);
  result.best_trial = best;

  std::vector<ModuleId> one(g.node_count(), 0);
  const double one_level = two_level_codelength(g, one);
  if (one_level <= result.codelength) {
    result.assignment = std::move(one);
    result.codelength = one_level;
  }
  return result;
}

template <bool Parallel>
SearchResult search_impl(const FlowGraph& g, const SearchConfig& config) {
  config.validate();
  if (g.node_count() == 0) return {};
  std::vector<SearchResult> trials(config.trials);
  const auto trial = [&](std::size_t i) {
    Rng rng(derive_seed(config.seed, {i}));
    trials[i] = run_trial(g, rng, config);
  };
  if constexpr (Parallel) {
#pragma omp parallel for schedule(dynamic, 1)
    for (std::size_t i = 0; i < config.trials; ++i) trial(i);
  } else {
    for (std::size_t i = 0; i < config.trials; ++i) trial(i);
  }
  return pick_best(g, trials);
}

}  // namespace

SearchResult search(const FlowGraph& g, const SearchConfig& config) { return search_impl<true>(g, config); }

namespace serial {
SearchResult search(const FlowGraph& g, const SearchConfig& config) { return search_impl<false>(g, config); }
}  // namespace serial

CodingTree optimize(const FlowModel& fm, const SearchConfig& config, std::vector<std::string> labels) {
  const FlowGraph g = make_flow_graph(fm);
  const auto result = search(g, config);
  return CodingTree::two_level(g, result.assignment, std::move(labels));
}

}  // namespace mapreg
