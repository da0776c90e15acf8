#pragma once

#include <limits>
#include <span>
#include <vector>

#include "mapreg/coding_tree.hpp"

namespace mapreg {

inline constexpr double kInfiniteBits = std::numeric_limits<double>::infinity();

struct SimilarityScore {
  NodeId source;
  NodeId target;
  double bits;   // lower = more similar
  double score;  // -bits

  friend bool operator==(const SimilarityScore&, const SimilarityScore&) = default;
};

/// Bit cost of describing a step from u to v with the tree's codebooks:
/// -log2(rev(m, u) * fwd(m, v)) for the smallest module m containing both.
/// rev multiplies exit / codebook use on the way up from u's module to m;
/// fwd multiplies child entry / parent codebook use on the way down to v's
/// module, then p_v / codebook use of v's module. Returns kInfiniteBits when
/// the product is zero (e.g. p_v = 0). Throws for u == v.
double mapsim_bits(const CodingTree& tree, NodeId u, NodeId v);

/// Candidates sorted by ascending bits, ties by ascending node id. Throws if
/// u is among the candidates.
std::vector<SimilarityScore> rank_candidates(const CodingTree& tree, NodeId u, std::span<const NodeId> candidates);

}  // namespace mapreg
