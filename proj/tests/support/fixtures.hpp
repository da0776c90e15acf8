#pragma once

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "mapreg/network.hpp"
#include "mapreg/random.hpp"

namespace mapreg::testing {

inline Network make_network(std::size_t n, const std::vector<std::pair<NodeId, NodeId>>& pairs, bool directed = false) {
  std::vector<Arc> links;
  for (auto [u, v] : pairs) links.push_back({u, v, 1.0});
  return Network::from_links(n, links, directed, false);
}

inline Network clique_pair(std::size_t size, bool bridge) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId base : {NodeId{0}, static_cast<NodeId>(size)}) {
    for (NodeId i = 0; i < size; ++i) {
      for (NodeId j = i + 1; j < size; ++j) pairs.emplace_back(base + i, base + j);
    }
  }
  if (bridge) pairs.emplace_back(static_cast<NodeId>(size - 1), static_cast<NodeId>(size));
  return make_network(2 * size, pairs);
}

inline Network clique(std::size_t size) {
  std::vector<std::pair<NodeId, NodeId>> pairs;
  for (NodeId i = 0; i < size; ++i) {
    for (NodeId j = i + 1; j < size; ++j) pairs.emplace_back(i, j);
  }
  return make_network(size, pairs);
}

/// G(n, p) with optional directions and weights in [1, 5).
inline Network random_network(std::size_t n, double p, std::uint64_t seed, bool directed, bool weighted) {
  Rng rng(seed);
  std::vector<Arc> links;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = directed ? 0 : u + 1; v < n; ++v) {
      if (u == v) continue;
      if (rng.uniform() < p) links.push_back({u, v, weighted ? 1.0 + 4.0 * rng.uniform() : 1.0});
    }
  }
  return Network::from_links(n, links, directed, weighted);
}

/// Undirected planted partition with exactly `intra` + `inter` distinct links
/// and no isolated node (the seed is advanced until that holds).
inline Network planted_partition(const std::vector<std::size_t>& sizes, std::size_t intra, std::size_t inter,
                                 std::uint64_t seed) {
  std::vector<std::size_t> group;
  for (std::size_t g = 0; g < sizes.size(); ++g) group.insert(group.end(), sizes[g], g);
  const std::size_t n = group.size();
  std::vector<std::pair<NodeId, NodeId>> in_pairs;
  std::vector<std::pair<NodeId, NodeId>> out_pairs;
  for (NodeId u = 0; u < n; ++u) {
    for (NodeId v = u + 1; v < n; ++v) (group[u] == group[v] ? in_pairs : out_pairs).emplace_back(u, v);
  }
  for (std::uint64_t attempt = 0;; ++attempt) {
    Rng rng(derive_seed(seed, {attempt}));
    auto a = in_pairs;
    auto b = out_pairs;
    rng.shuffle(std::span(a));
    rng.shuffle(std::span(b));
    std::vector<std::pair<NodeId, NodeId>> chosen(a.begin(), a.begin() + static_cast<std::ptrdiff_t>(intra));
    chosen.insert(chosen.end(), b.begin(), b.begin() + static_cast<std::ptrdiff_t>(inter));
    std::vector<int> deg(n, 0);
    for (auto [u, v] : chosen) ++deg[u], ++deg[v];
    if (std::find(deg.begin(), deg.end(), 0) != deg.end()) continue;
    std::sort(chosen.begin(), chosen.end());
    return make_network(n, chosen);
  }
}

/// 62 nodes, 159 links, four planted groups: the size of the dolphins network.
inline Network dolphins_standin() { return planted_partition({18, 16, 15, 13}, 131, 28, 62159); }

struct NamedSource {
  Network net;
  std::string source;
};

/// The real dolphins edge list when available (MAPREG_DOLPHINS or
/// data/dolphins.txt), otherwise the planted stand-in.
inline NamedSource load_dolphins() {
  std::vector<std::filesystem::path> candidates;
  if (const char* env = std::getenv("MAPREG_DOLPHINS")) candidates.emplace_back(env);
  candidates.emplace_back(std::filesystem::path(MAPREG_SOURCE_DIR) / "data" / "dolphins.txt");
  for (const auto& path : candidates) {
    if (std::filesystem::exists(path)) return {read_edge_list(path, {}), path.string()};
  }
  return {dolphins_standin(), "planted stand-in (62 nodes, 159 links)"};
}

}  // namespace mapreg::testing
