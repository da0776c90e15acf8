// Acceptance suite: one PASS/FAIL line per primary criterion. Exit status is
// the number of failed criteria.

#include <fmt/format.h>

#include <chrono>
#include <cmath>
#include <functional>
#include <numeric>
#include <string>
#include <vector>

#include "mapreg/experiment.hpp"
#include "mapreg/mapsim.hpp"
#include "mapreg/metrics.hpp"
#include "mapreg/optimizer.hpp"
#include "mapreg/overlays.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mapreg;
namespace mt = mapreg::testing;

namespace {

// Tolerances and budgets, fixed here.
constexpr double kOptimalityTol = 1e-9;
constexpr double kOptimalitySeconds = 10.0;
constexpr double kEq2Tol = 1e-10;
constexpr double kFactorizationTol = 1e-12;
constexpr double kStochasticTol = 1e-12;
constexpr double kConservationTol = 1e-9;
constexpr double kCostTol = 1e-12;
constexpr double kAucTol = 1e-12;
constexpr double kAmiTol = 1e-12;
constexpr double kTelescopeTol = 1e-8;
constexpr double kCollapseSeconds = 300.0;
constexpr std::size_t kCollapseRepeats = 10;
constexpr std::size_t kSparseSeeds = 10;

struct Outcome {
  bool pass = true;
  std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

Outcome brute_force_optimality() {
  const auto start = std::chrono::steady_clock::now();
  double worst = 0.0;
  std::size_t matched = 0;
  for (std::uint64_t i = 0; i < 5; ++i) {
    const bool directed = i % 2 == 1;
    const Network net = mt::random_network(7, 0.45, 7000 + i, directed, i >= 3);
    const Method method = i % 2 == 0 ? Method::global : Method::standard;
    const FlowModel fm = build_flow_model(net, method);
    const std::vector<double> p(fm.visit_rates().begin(), fm.visit_rates().end());
    const auto best = mt::brute_force_optimum(mt::dense_model(net, method == Method::global), p);
    SearchConfig config;
    config.trials = 100;
    config.seed = 1;
    const CodingTree tree = optimize(fm, config);
    const double gap = std::abs(tree.codelength() - best.codelength);
    worst = std::max(worst, gap);
    matched += gap <= kOptimalityTol ? 1 : 0;
  }
  const double elapsed = seconds_since(start);
  return {matched == 5 && elapsed < kOptimalitySeconds,
          fmt::format("{}/5 optimal, max gap {:.2e} bits, {:.2f} s", matched, worst, elapsed)};
}

Outcome eq2_oracle() {
  Rng rng(2024);
  double worst = 0.0;
  for (std::uint64_t c = 0; c < 200; ++c) {
    const std::size_t n = 2 + rng.below(7);
    const bool directed = rng.below(2) == 1;
    const Network net = mt::random_network(n, 0.2 + 0.5 * rng.uniform(), 10000 + c, directed, rng.below(2) == 1);
    const Method method = rng.below(2) == 1 ? Method::global : Method::standard;
    const FlowModel fm = build_flow_model(net, method);
    std::vector<ModuleId> a(n);
    const std::size_t k = 1 + rng.below(n);
    for (auto& m : a) m = static_cast<ModuleId>(rng.below(k));
    a = compact_assignment(a);
    const std::vector<double> p(fm.visit_rates().begin(), fm.visit_rates().end());
    const double naive = mt::naive_two_level(mt::dense_model(net, method == Method::global), p, {a.begin(), a.end()});
    worst = std::max(worst, std::abs(two_level_codelength(fm, a) - naive));
  }
  return {worst < kEq2Tol, fmt::format("200 cases, max |diff| {:.2e} bits", worst)};
}

Outcome regularization_identities() {
  Rng rng(5);
  double worst_factor = 0.0;
  for (int pair = 0; pair < 1000; ++pair) {
    static std::vector<std::pair<Network, mt::Matrix>> pool;
    if (pool.empty()) {
      for (std::uint64_t s = 0; s < 10; ++s) {
        Network net = mt::random_network(30, 0.1, 300 + s, s % 2 == 0, s % 3 != 0);
        mt::Matrix dense = mt::dense_model(net, true);
        pool.emplace_back(std::move(net), std::move(dense));
      }
    }
    const auto& [net, dense] = pool[rng.below(pool.size())];
    const FlowModel fm = regularized_transitions(net);
    const auto u = static_cast<NodeId>(rng.below(net.node_count()));
    const auto v = static_cast<NodeId>(rng.below(net.node_count()));
    worst_factor = std::max(worst_factor, std::abs(fm.transition(u, v) - dense[u][v]));
  }

  double worst_gamma = 0.0;
  for (std::uint64_t s = 0; s < 5; ++s) {
    const Network net = mt::random_network(20 + 10 * s, 0.15, 400 + s, s % 2 == 0, false);
    const double m = static_cast<double>(net.node_count()) + 50.0;
    const double gamma = std::log(m) / m;
    for (NodeId u = 0; u < net.node_count(); ++u) {
      for (NodeId v = 0; v < net.node_count(); ++v) {
        if (net.degrees(u).k_out > 0 && net.degrees(v).k_in > 0) {
          worst_gamma = std::max(worst_gamma, std::abs(prior_weight(net, u, v) - gamma) / gamma);
        }
      }
    }
  }

  double worst_row = 0.0;
  const Network net = mt::random_network(25, 0.12, 77, true, true);
  for (Method m : {Method::standard, Method::global, Method::cn, Method::mmt, Method::vmt, Method::global_cn,
                   Method::global_mmt, Method::global_vmt}) {
    const FlowModel fm = build_flow_model(net, m);
    for (NodeId u = 0; u < net.node_count(); ++u) {
      double row = 0.0;
      for (NodeId v = 0; v < net.node_count(); ++v) row += fm.transition(u, v);
      worst_row = std::max(worst_row, std::abs(row - 1.0));
    }
  }
  return {worst_factor < kFactorizationTol && worst_gamma < kFactorizationTol && worst_row < kStochasticTol,
          fmt::format("factorized vs direct {:.1e}, gamma rel. dev. {:.1e}, row-sum dev. {:.1e} (8 tags)",
                      worst_factor, worst_gamma, worst_row)};
}

Outcome vmt_conservation() {
  double worst = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    const Network net = mt::random_network(20 + s, 0.08 + 0.01 * static_cast<double>(s % 5), 600 + s, s % 2 == 1,
                                           s % 3 == 0);
    const auto p = visit_rates(empirical_transitions(net));
    const WeightOverlay w = vmt_overlay(net, p, kDefaultDelta);
    worst = std::max(worst, std::abs(w.total_weight() - net.total_weight()));
  }
  const Network star = mt::make_network(4, {{0, 1}, {0, 2}, {0, 3}});
  const double budget = vmt_budget(star);
  const Network path = mt::make_network(3, {{0, 1}, {1, 2}});
  const double step = vmt_step_cost(path, path.out_arcs(1));
  const bool costs = std::abs(budget - std::log2(3.0)) < kCostTol && std::abs(budget - 1.585) < 5e-4 &&
                     std::abs(step - 1.0) < kCostTol;
  return {worst < kConservationTol && costs,
          fmt::format("20 graphs, max |total - w_tot| {:.1e}; budget {:.4f} bits, degree-2 step {:.4f} bits", worst,
                      budget, step)};
}

Outcome metric_oracles() {
  Rng rng(31);
  double worst_auc = 0.0;
  for (int rep = 0; rep < 300; ++rep) {
    std::vector<double> pos(1 + rng.below(80));
    std::vector<double> neg(1 + rng.below(80));
    for (auto& x : pos) x = static_cast<double>(rng.below(12));
    for (auto& x : neg) x = static_cast<double>(rng.below(12));
    double wins = 0.0;
    for (double a : pos) {
      for (double b : neg) wins += a > b ? 1.0 : (a == b ? 0.5 : 0.0);
    }
    worst_auc = std::max(worst_auc, std::abs(auc(pos, neg) - wins / static_cast<double>(pos.size() * neg.size())));
  }

  double worst_ami = 0.0;
  for (int rep = 0; rep < 100; ++rep) {
    const std::size_t n = 4 + rng.below(40);
    std::vector<std::uint32_t> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) a[i] = static_cast<std::uint32_t>(i % 2 + 2 * rng.below(2));
    for (auto& x : b) x = static_cast<std::uint32_t>(rng.below(4));
    std::vector<std::uint32_t> perm{7, 3, 11, 5};
    std::vector<std::uint32_t> a_perm(n);
    for (std::size_t i = 0; i < n; ++i) a_perm[i] = perm[a[i]];
    worst_ami = std::max({worst_ami, std::abs(ami(a, a) - 1.0), std::abs(ami(a, b) - ami(b, a)),
                          std::abs(ami(a_perm, b) - ami(a, b))});
  }

  bool ci_in_range = true;
  for (int rep = 0; rep < 50; ++rep) {
    std::vector<double> v(2 + rng.below(20));
    for (auto& x : v) x = rng.uniform();
    const auto ci = bootstrap_ci(v, 1000, 0.95, static_cast<std::uint64_t>(rep));
    const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
    ci_in_range = ci_in_range && ci.lo <= ci.hi && ci.lo >= *lo && ci.hi <= *hi;
  }

  double worst_delta = 0.0;
  for (std::uint64_t s = 0; s < 10; ++s) {
    const Network net = mt::random_network(18, 0.2, 800 + s, s % 2 == 0, true);
    const FlowGraph g = make_flow_graph(build_flow_model(net, s % 2 == 0 ? Method::global : Method::standard));
    Partition part(g);
    const double start = part.recompute_codelength();
    double sum = 0.0;
    for (int step = 0; step < 300; ++step) {
      const auto u = static_cast<NodeId>(rng.below(net.node_count()));
      const ModuleId target = part.module_of(static_cast<NodeId>(rng.below(net.node_count())));
      sum += part.delta_move(u, target);
      part.move(u, target);
    }
    worst_delta = std::max(worst_delta, std::abs(start + sum - part.recompute_codelength()));
  }
  return {worst_auc < kAucTol && worst_ami < kAmiTol && ci_in_range && worst_delta < kTelescopeTol,
          fmt::format("AUC dev. {:.1e}, AMI identity dev. {:.1e}, CI in range: {}, telescoping dev. {:.1e}",
                      worst_auc, worst_ami, ci_in_range ? "yes" : "no", worst_delta)};
}

struct MethodStats {
  double mean_modules = 0.0;
  double trivial_fraction = 0.0;
  double mean_auc = 0.0;
};

MethodStats stats_of(const std::vector<ExperimentRecord>& records, const std::string& network,
                     const std::string& method) {
  MethodStats s;
  std::size_t n = 0;
  for (const auto& r : records) {
    if (r.network != network || r.method != method || !r.auc) continue;
    s.mean_modules += static_cast<double>(r.modules);
    s.trivial_fraction += r.trivial ? 1.0 : 0.0;
    s.mean_auc += *r.auc;
    ++n;
  }
  if (n > 0) {
    s.mean_modules /= static_cast<double>(n);
    s.trivial_fraction /= static_cast<double>(n);
    s.mean_auc /= static_cast<double>(n);
  }
  return s;
}

Outcome community_collapse(const mt::NamedSource& dolphins) {
  const auto start = std::chrono::steady_clock::now();
  const std::vector<NamedNetwork> nets{{"dolphins", dolphins.net}};
  ExperimentConfig config;
  config.methods = {Method::standard, Method::global};
  config.fractions = {0.9};
  config.repeats = kCollapseRepeats;
  config.seed = 1;
  const auto records = run_experiment(nets, config);
  const auto standard = stats_of(records, "dolphins", "standard");
  const auto global = stats_of(records, "dolphins", "global");
  const double elapsed = seconds_since(start);
  return {standard.mean_modules > global.mean_modules && global.trivial_fraction > standard.trivial_fraction &&
              elapsed < kCollapseSeconds,
          fmt::format("{}; r=0.9, {} repeats: modules standard {:.2f} vs global {:.2f}, trivial fraction standard "
                      "{:.2f} vs global {:.2f}, {:.1f} s",
                      dolphins.source, kCollapseRepeats, standard.mean_modules, global.mean_modules,
                      standard.trivial_fraction, global.trivial_fraction, elapsed)};
}

Outcome sparse_regime(const mt::NamedSource& dolphins) {
  const std::vector<NamedNetwork> nets{
      {"dolphins", dolphins.net},
      {"planted-a", mt::planted_partition({20, 20, 20, 20}, 200, 40, 11)},
      {"planted-b", mt::planted_partition({30, 25, 20}, 180, 30, 12)},
  };
  ExperimentConfig config;
  config.methods = {Method::standard, Method::global};
  config.fractions = {0.9};
  config.repeats = kSparseSeeds;
  config.seed = 1;
  const auto records = run_experiment(nets, config);
  std::size_t wins = 0;
  std::string detail;
  for (const auto& net : nets) {
    const auto s = stats_of(records, net.id, "standard");
    const auto g = stats_of(records, net.id, "global");
    wins += g.mean_auc >= s.mean_auc ? 1 : 0;
    detail += fmt::format("{} {:.3f} vs {:.3f}; ", net.id, g.mean_auc, s.mean_auc);
  }
  return {wins >= 2, fmt::format("AUC global vs standard at r=0.9, {} seeds: {}{}/3 networks favor global",
                                 kSparseSeeds, detail, wins)};
}

Outcome trivial_degeneracy() {
  std::size_t sources = 0;
  bool exact = true;
  for (std::uint64_t s = 0; s < 4; ++s) {
    const Network net = mt::random_network(30, 0.1, 900 + s, s % 2 == 0, s >= 2);
    const FlowModel fm = build_flow_model(net, s % 2 == 0 ? Method::global : Method::standard);
    const CodingTree tree = CodingTree::two_level(make_flow_graph(fm), std::vector<ModuleId>(net.node_count(), 0));
    const auto p = fm.visit_rates();
    for (NodeId u = 0; u < net.node_count(); ++u) {
      std::vector<NodeId> candidates;
      for (NodeId v = 0; v < net.node_count(); ++v) {
        if (v != u) candidates.push_back(v);
      }
      const auto ranked = rank_candidates(tree, u, candidates);
      std::stable_sort(candidates.begin(), candidates.end(), [&](NodeId a, NodeId b) { return p[a] > p[b]; });
      for (std::size_t i = 0; i < ranked.size(); ++i) exact = exact && ranked[i].target == candidates[i];
      ++sources;
    }
  }
  return {exact, fmt::format("{} sources, MapSim order {} visit-rate order", sources, exact ? "equals" : "differs from")};
}

}  // namespace

int main() {
  const auto dolphins = mt::load_dolphins();
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"brute-force optimality", brute_force_optimality},
      {"two-level codelength oracle", eq2_oracle},
      {"regularization identities", regularization_identities},
      {"variable Markov time conservation", vmt_conservation},
      {"metric oracles", metric_oracles},
      {"community collapse in the sparse regime", [&] { return community_collapse(dolphins); }},
      {"sparse-regime AUC direction", [&] { return sparse_regime(dolphins); }},
      {"one-module MapSim degeneracy", trivial_degeneracy},
  };
  int failed = 0;
  for (const auto& [name, check] : criteria) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    fmt::print("[{}] {}: {}\n", o.pass ? "PASS" : "FAIL", name, o.detail);
    std::fflush(stdout);
  }
  fmt::print("{} of {} criteria passed\n", criteria.size() - static_cast<std::size_t>(failed), criteria.size());
  return failed;
}
