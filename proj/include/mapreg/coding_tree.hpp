#pragma once

#include <cstddef>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "mapreg/map_equation.hpp"

namespace mapreg {

/// Hierarchical codebook structure. Module 0 is the root (index codebook);
/// every other module has a parent, child modules and/or member nodes. Each
/// node is a leaf of exactly one module. The optimizer produces two-level
/// trees (root -> modules -> nodes); deeper trees are accepted for scoring.
class CodingTree {
 public:
  struct Module {
    std::size_t parent = 0;
    double enter = 0.0;
    double exit = 0.0;
    double flow = 0.0;
    std::vector<std::size_t> children;
    std::vector<NodeId> nodes;
  };

  CodingTree() = default;

  /// Two-level tree from a partition of `g`. Modules are ordered by descending
  /// flow (ties: smallest member id), members likewise.
  static CodingTree two_level(const FlowGraph& g, std::span<const ModuleId> assignment,
                              std::vector<std::string> labels = {});

  /// Tree from explicit modules (index 0 must be the root) and node flows.
  CodingTree(std::vector<Module> modules, std::vector<double> node_flow, std::vector<std::string> labels,
             double codelength, double one_level_codelength);

  std::size_t node_count() const noexcept { return node_flow_.size(); }
  std::size_t module_count() const noexcept { return modules_.size(); }
  const Module& module(std::size_t m) const noexcept { return modules_[m]; }
  /// Modules directly below the root.
  std::size_t top_module_count() const noexcept { return modules_.empty() ? 0 : modules_[0].children.size(); }

  double node_flow(NodeId u) const noexcept { return node_flow_[u]; }
  std::size_t leaf_module(NodeId u) const noexcept { return leaf_of_[u]; }
  const std::string& label(NodeId u) const noexcept { return labels_[u]; }
  std::span<const std::string> labels() const noexcept { return labels_; }

  double codelength() const noexcept { return codelength_; }
  double one_level_codelength() const noexcept { return one_level_codelength_; }
  bool trivial() const noexcept { return top_module_count() <= 1; }

  /// Codebook use rate: exit + entry rates of child modules + flow of member nodes.
  /// For the root this is the index codebook use q.
  double codebook_use(std::size_t m) const noexcept;

  /// Depth of module m (root = 0).
  std::size_t depth(std::size_t m) const noexcept;

  /// Index (0-based) of the top-level module containing u.
  std::vector<ModuleId> top_level_assignment() const;

  /// Colon-separated 1-based path of node u, e.g. "2:1".
  std::string path(NodeId u) const;
  /// 1-based path of module m, e.g. "2" or "2:3"; empty for the root.
  std::string module_path(std::size_t m) const;

 private:
  void index_nodes();

  std::vector<Module> modules_;
  std::vector<double> node_flow_;
  std::vector<std::string> labels_;
  std::vector<std::size_t> leaf_of_;
  std::vector<std::size_t> rank_in_leaf_;
  double codelength_ = 0.0;
  double one_level_codelength_ = 0.0;
};

/// Tree text format:
///   # codelength <bits> bits
///   # one-level <bits> bits
///   # module <path> enter <q> exit <x> flow <f>     (one line per module)
///   <path> <flow> <label> <node id>                 (one line per node)
void write_tree(std::ostream& out, const CodingTree& tree);
CodingTree read_tree(std::istream& in);

/// {codelength, one_level_codelength, modules: [{id, path, enter, exit, flow, nodes: [{id, label, flow}]}]}
void write_tree_json(std::ostream& out, const CodingTree& tree);
CodingTree read_tree_json(std::istream& in);

/// Reads either format, chosen by the ".json" extension.
CodingTree load_tree(const std::filesystem::path& path);

}  // namespace mapreg
