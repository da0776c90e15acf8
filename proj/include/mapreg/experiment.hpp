#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mapreg/network.hpp"
#include "mapreg/optimizer.hpp"
#include "mapreg/overlays.hpp"

namespace mapreg {

struct NodePair {
  NodeId source;
  NodeId target;

  friend bool operator==(const NodePair&, const NodePair&) = default;
  friend auto operator<=>(const NodePair&, const NodePair&) = default;
};

/// Training network plus balanced validation pairs for one removal fraction.
struct Split {
  Network train;
  std::vector<NodePair> positives;  // removed arcs, both directions for undirected networks
  std::vector<NodePair> negatives;  // nonlinks of the original network, same count
  double fraction = 0.0;
  std::size_t repeat = 0;
  std::uint64_t seed = 0;
};

/// round(r * links) with halves rounded up.
std::size_t removal_count(std::size_t links, double fraction);

/// Removes round(r * E) links uniformly at random (undirected links as whole
/// pairs), keeps every node, and samples as many nonlinks of `net` as
/// negatives. Throws when 0 < r < 1 is violated or when no link would remain
/// or none would be removed.
Split split_links(const Network& net, double fraction, std::uint64_t seed, std::size_t repeat = 0);

/// `count` distinct node pairs absent from `net`, without self-pairs. For
/// undirected networks `count` unordered pairs are drawn and each is returned
/// in both directions. Throws when fewer than `count` nonlinks exist.
std::vector<NodePair> sample_nonlinks(const Network& net, std::size_t count, std::uint64_t seed);

struct ExperimentRecord {
  std::string network;
  std::string method;
  double fraction = 0.0;
  std::size_t repeat = 0;
  std::optional<double> auc;  // absent when the cell failed
  std::size_t modules = 0;
  bool trivial = false;
  std::optional<double> ami;  // only for non-trivial solutions
  double seconds = 0.0;
  double total_weight = 0.0;
  std::string error;
};

struct NamedNetwork {
  std::string id;
  Network net;
};

struct ExperimentConfig {
  std::vector<Method> methods{Method::standard, Method::global};
  std::vector<double> fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t repeats = 5;
  std::uint64_t seed = 1;
  SearchConfig search{};
  MethodParams params{};
  /// Concurrent cells; 0 = available parallelism.
  std::size_t jobs = 0;
  /// Use the standard map equation for every AMI reference partition.
  bool standard_reference = false;
};

/// Link-prediction score of a pair: -MapSim bits.
double mapsim_score(const CodingTree& tree, NodePair pair);

/// Evaluates every (network, fraction, repeat, method) cell. Negatives are
/// shared by all methods of a split. Records come back in canonical order
/// (network, fraction, repeat, method as given) and, apart from `seconds`,
/// are a pure function of the inputs and the seed.
std::vector<ExperimentRecord> run_experiment(std::span<const NamedNetwork> networks, const ExperimentConfig& config);

/// CSV with columns network,method,fraction,repeat,auc,modules,trivial,ami,seconds,total_weight.
void write_records_csv(std::ostream& out, std::span<const ExperimentRecord> records);
std::vector<ExperimentRecord> read_records_csv(std::istream& in);

}  // namespace mapreg
