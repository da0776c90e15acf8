#include "mapreg/experiment.hpp"

#include <omp.h>

#include <algorithm>
#include <bit>
#include <chrono>
#include <cmath>
#include <fmt/format.h>
#include <istream>
#include <ostream>
#include <sstream>
#include <unordered_set>

#include "mapreg/error.hpp"
#include "mapreg/mapsim.hpp"
#include "mapreg/metrics.hpp"
#include "mapreg/random.hpp"

namespace mapreg {

std::size_t removal_count(std::size_t links, double fraction) {
  if (!(fraction > 0.0 && fraction < 1.0)) throw Error(fmt::format("removal fraction {} outside (0, 1)", fraction));
  return static_cast<std::size_t>(std::floor(fraction * static_cast<double>(links) + 0.5 + 1e-9));
}

namespace {

std::uint64_t pair_key(NodeId u, NodeId v) { return (static_cast<std::uint64_t>(u) << 32) | v; }

void push_pair(std::vector<NodePair>& out, NodeId u, NodeId v, bool directed) {
  out.push_back({u, v});
  if (!directed) out.push_back({v, u});
}

std::vector<std::string> copy_labels(const Network& net) {
  return {net.labels().begin(), net.labels().end()};
}

}  // namespace

std::vector<NodePair> sample_nonlinks(const Network& net, std::size_t count, std::uint64_t seed) {
  const auto n = static_cast<std::uint64_t>(net.node_count());
  const std::uint64_t pairs = net.directed() ? n * (n - (n > 0 ? 1 : 0)) : n * (n - (n > 0 ? 1 : 0)) / 2;
  const std::uint64_t population = pairs - net.link_count();
  if (count > population) {
    throw Error(fmt::format("cannot sample {} nonlinks, only {} exist", count, population));
  }
  std::vector<NodePair> out;
  out.reserve(net.directed() ? count : 2 * count);
  if (count == 0) return out;
  Rng rng(seed);

  if (2 * count >= population) {
    // Dense request: enumerate every nonlink and take a random prefix.
    std::vector<NodePair> all;
    all.reserve(population);
    for (NodeId u = 0; u < n; ++u) {
      for (NodeId v = net.directed() ? 0 : u + 1; v < n; ++v) {
        if (u != v && !net.has_arc(u, v)) all.push_back({u, v});
      }
    }
    rng.shuffle(std::span<NodePair>(all));
    for (std::size_t i = 0; i < count; ++i) push_pair(out, all[i].source, all[i].target, net.directed());
    return out;
  }

  std::unordered_set<std::uint64_t> taken;
  taken.reserve(2 * count);
  while (taken.size() < count) {
    auto u = static_cast<NodeId>(rng.below(n));
    auto v = static_cast<NodeId>(rng.below(n));
    if (u == v || net.has_arc(u, v)) continue;
    if (!net.directed() && u > v) std::swap(u, v);
    if (!taken.insert(pair_key(u, v)).second) continue;
    push_pair(out, u, v, net.directed());
  }
  return out;
}

Split split_links(const Network& net, double fraction, std::uint64_t seed, std::size_t repeat) {
  std::vector<Arc> links = net.links();
  const std::size_t k = removal_count(links.size(), fraction);
  if (k == 0) throw Error(fmt::format("fraction {} removes no link of {}", fraction, links.size()));
  if (k >= links.size()) throw Error(fmt::format("fraction {} removes every link of {}", fraction, links.size()));

  Rng rng(derive_seed(seed, {0}));
  std::vector<std::size_t> order(links.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  rng.shuffle(std::span<std::size_t>(order));
  std::vector<bool> removed(links.size(), false);
  for (std::size_t i = 0; i < k; ++i) removed[order[i]] = true;

  Split split;
  split.fraction = fraction;
  split.repeat = repeat;
  split.seed = seed;
  std::vector<Arc> kept;
  kept.reserve(links.size() - k);
  for (std::size_t i = 0; i < links.size(); ++i) {
    if (removed[i]) {
      push_pair(split.positives, links[i].source, links[i].target, net.directed());
    } else {
      kept.push_back(links[i]);
    }
  }
  split.train = Network::from_links(net.node_count(), kept, net.directed(), net.weighted(), copy_labels(net));
  split.negatives = sample_nonlinks(net, k, derive_seed(seed, {1}));
  return split;
}

double mapsim_score(const CodingTree& tree, NodePair pair) { return -mapsim_bits(tree, pair.source, pair.target); }

namespace {

std::uint64_t fraction_key(double fraction) { return static_cast<std::uint64_t>(std::llround(fraction * 1e9)); }

int resolve_jobs(std::size_t jobs) {
  return jobs == 0 ? omp_get_max_threads() : static_cast<int>(jobs);
}

struct Reference {
  std::vector<ModuleId> assignment;
  bool trivial = true;
  std::string error;
};

}  // namespace

std::vector<ExperimentRecord> run_experiment(std::span<const NamedNetwork> networks, const ExperimentConfig& config) {
  if (config.methods.empty()) throw Error("no methods requested");
  if (config.fractions.empty()) throw Error("no removal fractions requested");
  if (config.repeats == 0) throw Error("repeats must be positive");
  config.search.validate();
  for (double r : config.fractions) removal_count(1, r);

  const std::size_t n_net = networks.size();
  const std::size_t n_method = config.methods.size();
  const std::size_t n_frac = config.fractions.size();
  const std::size_t n_rep = config.repeats;
  const int jobs = resolve_jobs(config.jobs);

  auto search_for = [&](std::uint64_t seed) {
    SearchConfig s = config.search;
    s.seed = seed;
    return s;
  };

  // Full-network partitions used as AMI references.
  std::vector<Reference> references(n_net * n_method);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::size_t job = 0; job < references.size(); ++job) {
    const std::size_t i = job / n_method;
    const Method method = config.standard_reference ? Method::standard : config.methods[job % n_method];
    auto& ref = references[job];
    try {
      const FlowModel fm = build_flow_model(networks[i].net, method, config.params);
      const auto seed = derive_seed(config.seed, {i, 0xffffffffULL, static_cast<std::uint64_t>(method)});
      const CodingTree tree = optimize(fm, search_for(seed));
      ref.assignment = tree.top_level_assignment();
      ref.trivial = tree.trivial();
    } catch (const std::exception& e) {
      ref.error = e.what();
    }
  }

  // Splits are shared by every method so all methods see the same negatives.
  const std::size_t n_split = n_net * n_frac * n_rep;
  std::vector<Split> splits(n_split);
  std::vector<std::string> split_errors(n_split);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::size_t s = 0; s < n_split; ++s) {
    const std::size_t i = s / (n_frac * n_rep);
    const std::size_t f = (s / n_rep) % n_frac;
    const std::size_t rep = s % n_rep;
    const double r = config.fractions[f];
    try {
      splits[s] = split_links(networks[i].net, r, derive_seed(config.seed, {i, fraction_key(r), rep}), rep);
    } catch (const std::exception& e) {
      split_errors[s] = e.what();
    }
  }

  std::vector<ExperimentRecord> records(n_split * n_method);
#pragma omp parallel for schedule(dynamic, 1) num_threads(jobs)
  for (std::size_t c = 0; c < records.size(); ++c) {
    const std::size_t s = c / n_method;
    const std::size_t m = c % n_method;
    const std::size_t i = s / (n_frac * n_rep);
    const Method method = config.methods[m];
    const Split& split = splits[s];
    auto& rec = records[c];
    rec.network = networks[i].id;
    rec.method = std::string(method_tag(method));
    rec.fraction = config.fractions[(s / n_rep) % n_frac];
    rec.repeat = s % n_rep;
    if (!split_errors[s].empty()) {
      rec.error = split_errors[s];
      continue;
    }
    try {
      const auto start = std::chrono::steady_clock::now();
      const FlowModel fm = build_flow_model(split.train, method, config.params);
      const CodingTree tree =
          optimize(fm, search_for(derive_seed(split.seed, {static_cast<std::uint64_t>(method)})));
      std::vector<double> pos;
      std::vector<double> neg;
      pos.reserve(split.positives.size());
      neg.reserve(split.negatives.size());
      for (const auto& p : split.positives) pos.push_back(mapsim_score(tree, p));
      for (const auto& p : split.negatives) neg.push_back(mapsim_score(tree, p));
      rec.auc = auc(pos, neg);
      rec.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      rec.modules = tree.top_module_count();
      rec.trivial = tree.trivial();
      rec.total_weight = fm.total_weight();
      const auto& ref = references[i * n_method + m];
      if (!rec.trivial && ref.error.empty()) {
        const auto assignment = tree.top_level_assignment();
        rec.ami = ami(assignment, ref.assignment);
      }
    } catch (const std::exception& e) {
      rec.auc.reset();
      rec.error = e.what();
    }
  }
  return records;
}

namespace {

constexpr std::string_view kHeader = "network,method,fraction,repeat,auc,modules,trivial,ami,seconds,total_weight";

std::string optional_field(const std::optional<double>& v) { return v ? fmt::format("{}", *v) : std::string(); }

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

double parse_double(const std::string& s, std::size_t line, std::string_view column) {
  std::size_t used = 0;
  double v = 0.0;
  try {
    v = std::stod(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size()) throw ParseError(line, fmt::format("invalid {} '{}'", column, s));
  return v;
}

std::size_t parse_count(const std::string& s, std::size_t line, std::string_view column) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    v = std::stoull(s, &used);
  } catch (const std::exception&) {
    used = 0;
  }
  if (s.empty() || used != s.size() || s.front() == '-') {
    throw ParseError(line, fmt::format("invalid {} '{}'", column, s));
  }
  return static_cast<std::size_t>(v);
}

}  // namespace

void write_records_csv(std::ostream& out, std::span<const ExperimentRecord> records) {
  out << kHeader << '\n';
  for (const auto& r : records) {
    if (r.network.find_first_of(",\"\n\r") != std::string::npos) {
      throw Error("network id '" + r.network + "' cannot be written to CSV");
    }
    out << fmt::format("{},{},{},{},{},{},{},{},{:.6f},{}\n", r.network, r.method, r.fraction, r.repeat,
                       optional_field(r.auc), r.modules, r.trivial ? 1 : 0, optional_field(r.ami), r.seconds,
                       r.total_weight);
  }
}

std::vector<ExperimentRecord> read_records_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 1;
  if (!std::getline(in, line)) throw ParseError(1, "empty records file");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kHeader) throw ParseError(1, "unexpected header '" + line + "'");
  std::vector<ExperimentRecord> records;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 10) throw ParseError(line_no, fmt::format("expected 10 fields, found {}", f.size()));
    ExperimentRecord r;
    r.network = f[0];
    r.method = std::string(method_tag(parse_method(f[1])));
    r.fraction = parse_double(f[2], line_no, "fraction");
    r.repeat = parse_count(f[3], line_no, "repeat");
    if (!f[4].empty()) r.auc = parse_double(f[4], line_no, "auc");
    r.modules = parse_count(f[5], line_no, "modules");
    if (f[6] != "0" && f[6] != "1") throw ParseError(line_no, "invalid trivial flag '" + f[6] + "'");
    r.trivial = f[6] == "1";
    if (!f[7].empty()) r.ami = parse_double(f[7], line_no, "ami");
    r.seconds = parse_double(f[8], line_no, "seconds");
    r.total_weight = parse_double(f[9], line_no, "total_weight");
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace mapreg
