#include "mapreg/mapsim.hpp"

#include <algorithm>
#include <cmath>

#include "mapreg/error.hpp"

namespace mapreg {

namespace {

double ratio(double num, double den) noexcept { return num > 0.0 && den > 0.0 ? num / den : 0.0; }

}  // namespace

double mapsim_bits(const CodingTree& tree, NodeId u, NodeId v) {
  if (u >= tree.node_count() || v >= tree.node_count()) throw Error("node id out of range");
  if (u == v) throw Error("MapSim is undefined for self-pairs");

  std::size_t mu = tree.leaf_module(u);
  std::size_t mv = tree.leaf_module(v);

  // Walk both leaves up to their lowest common ancestor.
  std::vector<std::size_t> down;  // modules below the ancestor on v's side, bottom-up
  std::size_t du = tree.depth(mu);
  std::size_t dv = tree.depth(mv);
  double rev = 1.0;
  while (du > dv) {
    rev *= ratio(tree.module(mu).exit, tree.codebook_use(mu));
    mu = tree.module(mu).parent;
    --du;
  }
  while (dv > du) {
    down.push_back(mv);
    mv = tree.module(mv).parent;
    --dv;
  }
  while (mu != mv) {
    rev *= ratio(tree.module(mu).exit, tree.codebook_use(mu));
    mu = tree.module(mu).parent;
    down.push_back(mv);
    mv = tree.module(mv).parent;
  }

  double fwd = 1.0;
  for (auto it = down.rbegin(); it != down.rend(); ++it) {
    const auto& child = tree.module(*it);
    fwd *= ratio(child.enter, tree.codebook_use(child.parent));
  }
  const std::size_t leaf = tree.leaf_module(v);
  fwd *= ratio(tree.node_flow(v), tree.codebook_use(leaf));

  const double product = rev * fwd;
  if (!(product > 0.0)) return kInfiniteBits;
  return std::max(0.0, -std::log2(product));
}

std::vector<SimilarityScore> rank_candidates(const CodingTree& tree, NodeId u, std::span<const NodeId> candidates) {
  std::vector<SimilarityScore> out;
  out.reserve(candidates.size());
  for (NodeId v : candidates) {
    if (v == u) throw Error("source node is among the candidates");
    const double bits = mapsim_bits(tree, u, v);
    out.push_back({u, v, bits, -bits});
  }
  std::sort(out.begin(), out.end(), [](const SimilarityScore& a, const SimilarityScore& b) {
    if (a.bits != b.bits) return a.bits < b.bits;
    return a.target < b.target;
  });
  return out;
}

}  // namespace mapreg
