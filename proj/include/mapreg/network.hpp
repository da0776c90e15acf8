#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace mapreg {

using NodeId = std::uint32_t;

struct Arc {
  NodeId source;
  NodeId target;
  double weight;

  friend bool operator==(const Arc&, const Arc&) = default;
};

struct NodeDegrees {
  std::uint32_t k_in = 0;
  std::uint32_t k_out = 0;
  double s_in = 0.0;
  double s_out = 0.0;

  friend bool operator==(const NodeDegrees&, const NodeDegrees&) = default;
};

struct ParseOptions {
  bool directed = false;
  bool weighted = false;
};

/// Directed weighted graph with dense node ids 0..n-1. Undirected networks
/// keep both arc directions with equal weight. Immutable after construction.
class Network {
 public:
  Network() = default;

  /// Builds a network from links. Duplicate links accumulate, self-loops and
  /// zero weights are dropped. For undirected networks every link (u, v) is
  /// stored as the two arcs u->v and v->u.
  static Network from_links(std::size_t node_count, std::span<const Arc> links, bool directed, bool weighted,
                            std::vector<std::string> labels = {});

  std::size_t node_count() const noexcept { return labels_.size(); }
  std::size_t arc_count() const noexcept { return arcs_.size(); }
  /// Number of links: arcs for directed networks, node pairs for undirected ones.
  std::size_t link_count() const noexcept { return directed_ ? arcs_.size() : arcs_.size() / 2; }
  bool directed() const noexcept { return directed_; }
  bool weighted() const noexcept { return weighted_; }

  /// All arcs sorted by (source, target).
  std::span<const Arc> arcs() const noexcept { return arcs_; }
  std::span<const Arc> out_arcs(NodeId u) const noexcept {
    return std::span<const Arc>(arcs_).subspan(out_offsets_[u], out_offsets_[u + 1] - out_offsets_[u]);
  }
  /// Arcs entering v, sorted by source.
  std::span<const Arc> in_arcs(NodeId v) const noexcept {
    return std::span<const Arc>(in_arcs_).subspan(in_offsets_[v], in_offsets_[v + 1] - in_offsets_[v]);
  }
  /// Links in canonical form: every arc when directed, source < target when undirected.
  std::vector<Arc> links() const;

  const NodeDegrees& degrees(NodeId u) const noexcept { return degrees_[u]; }
  std::span<const NodeDegrees> degrees() const noexcept { return degrees_; }
  double total_weight() const noexcept { return total_weight_; }
  std::uint32_t max_out_degree() const noexcept;

  double weight(NodeId u, NodeId v) const noexcept;
  bool has_arc(NodeId u, NodeId v) const noexcept { return weight(u, v) > 0.0; }

  const std::string& label(NodeId u) const noexcept { return labels_[u]; }
  std::span<const std::string> labels() const noexcept { return labels_; }
  std::optional<NodeId> find(std::string_view label) const;

 private:
  bool directed_ = false;
  bool weighted_ = false;
  std::vector<std::string> labels_;
  std::unordered_map<std::string, NodeId> index_;
  std::vector<Arc> arcs_;
  std::vector<std::size_t> out_offsets_{0};
  std::vector<Arc> in_arcs_;
  std::vector<std::size_t> in_offsets_{0};
  std::vector<NodeDegrees> degrees_;
  double total_weight_ = 0.0;
};

/// Parses "src dst [weight]" lines. Ids are assigned in order of first
/// appearance; '#' starts a comment. Throws ParseError with the line number.
Network parse_edge_list(std::istream& in, const ParseOptions& options);
Network parse_edge_list(std::string_view text, const ParseOptions& options);
Network read_edge_list(const std::filesystem::path& path, const ParseOptions& options);

/// Writes "src dst weight" per link (each undirected link once), weights with
/// 17 significant digits.
void write_edge_list(std::ostream& out, const Network& net);

/// Observed degrees and strengths per node (cached at construction).
std::vector<NodeDegrees> degrees_and_strengths(const Network& net);

}  // namespace mapreg
