#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

#include "mapreg/coding_tree.hpp"
#include "mapreg/map_equation.hpp"
#include "mapreg/random.hpp"

namespace mapreg {

struct SearchConfig {
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  std::size_t max_sweeps = 100;
  double improvement_epsilon = 1e-10;

  void validate() const;
};

struct MovePassResult {
  bool improved = false;
  double improvement = 0.0;  // codelength reduction in bits, >= 0
  std::size_t moves = 0;
};

/// One sweep over all nodes in seeded random order. Each node moves to the
/// neighboring module (or a fresh module) with the most negative delta; ties
/// go to the lowest module id.
MovePassResult local_move_pass(Partition& partition, Rng& rng, const SearchConfig& config);

/// Repeats local_move_pass until a sweep improves by at most epsilon or
/// max_sweeps is reached. Returns the total improvement.
double local_moves(Partition& partition, Rng& rng, const SearchConfig& config);

/// Coarse flow graph with one node per module; inter-module arc flows and
/// teleportation data are summed. Any partition of the coarse graph has the
/// same codelength as its preimage. Throws for a single-module assignment.
FlowGraph aggregate(const FlowGraph& g, std::span<const ModuleId> assignment);

/// Moves every node without flow into the module with the most flow. Such
/// nodes carry no code, so the codelength is unchanged; without this they
/// would stay behind as empty singleton modules.
std::vector<ModuleId> attach_zero_flow_nodes(const FlowGraph& g, std::span<const ModuleId> assignment);

struct SearchResult {
  std::vector<ModuleId> assignment;  // compact module ids
  double codelength = 0.0;
  std::size_t best_trial = 0;
};

/// One trial from singletons: move passes, aggregation, repeated until no
/// improvement, then fine-tuning of the projected partition.
SearchResult run_trial(const FlowGraph& g, Rng& rng, const SearchConfig& config);

/// Best of `config.trials` seeded trials (trial i uses derive_seed(seed, {i})),
/// compared against the one-module partition. Ties keep the lowest trial.
SearchResult search(const FlowGraph& g, const SearchConfig& config);

namespace serial {
SearchResult search(const FlowGraph& g, const SearchConfig& config);
}  // namespace serial

/// Optimizes the two-level map equation for a model with visit rates.
CodingTree optimize(const FlowModel& fm, const SearchConfig& config, std::vector<std::string> labels = {});

}  // namespace mapreg
