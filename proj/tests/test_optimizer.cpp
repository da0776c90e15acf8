#include <doctest.h>

#include <cmath>

#include "mapreg/error.hpp"
#include "mapreg/optimizer.hpp"
#include "mapreg/overlays.hpp"
#include "support/fixtures.hpp"
#include "support/oracles.hpp"

using namespace mapreg;
namespace mt = mapreg::testing;

namespace {

SearchConfig trials(std::size_t n, std::uint64_t seed = 1) {
  SearchConfig c;
  c.trials = n;
  c.seed = seed;
  return c;
}

}  // namespace

TEST_CASE("search reaches the exhaustive optimum on small graphs") {
  for (std::uint64_t seed = 0; seed < 4; ++seed) {
    const Network net = mt::random_network(6, 0.45, 900 + seed, seed % 2 == 0, seed >= 2);
    const Method method = seed % 3 == 0 ? Method::standard : Method::global;
    const FlowModel fm = build_flow_model(net, method);
    const std::vector<double> p(fm.visit_rates().begin(), fm.visit_rates().end());
    const auto best = mt::brute_force_optimum(mt::dense_model(net, method == Method::global), p);
    const auto result = search(make_flow_graph(fm), trials(50));
    CHECK(result.codelength <= best.codelength + 1e-9);
    CHECK(std::abs(two_level_codelength(fm, result.assignment) - result.codelength) < 1e-12);
  }
}

TEST_CASE("two bridged cliques split into two modules") {
  const Network net = mt::clique_pair(5, true);
  for (Method m : {Method::standard, Method::global}) {
    const CodingTree tree = optimize(build_flow_model(net, m), trials(20));
    CHECK(tree.top_module_count() == 2);
    const auto a = tree.top_level_assignment();
    for (NodeId u = 1; u < 5; ++u) CHECK(a[u] == a[0]);
    for (NodeId u = 6; u < 10; ++u) CHECK(a[u] == a[5]);
    CHECK(a[0] != a[5]);
    CHECK(tree.codelength() < tree.one_level_codelength());
  }
}

TEST_CASE("a single clique stays in one module") {
  const CodingTree tree = optimize(build_flow_model(mt::clique(6), Method::standard), trials(20));
  CHECK(tree.trivial());
  CHECK(tree.codelength() == doctest::Approx(tree.one_level_codelength()));
  CHECK(tree.codelength() == doctest::Approx(std::log2(6.0)));
}

TEST_CASE("search is deterministic and parallel equals serial") {
  const Network net = mt::planted_partition({10, 10, 10}, 90, 15, 4);
  const FlowGraph g = make_flow_graph(build_flow_model(net, Method::global));
  const auto a = search(g, trials(16, 42));
  const auto b = search(g, trials(16, 42));
  const auto c = serial::search(g, trials(16, 42));
  CHECK(a.assignment == b.assignment);
  CHECK(a.assignment == c.assignment);
  CHECK(a.codelength == c.codelength);
  CHECK(a.best_trial == c.best_trial);
}

TEST_CASE("aggregation preserves codelengths") {
  const Network net = mt::random_network(20, 0.2, 71, true, true);
  const FlowGraph g = make_flow_graph(build_flow_model(net, Method::global));
  Rng rng(3);
  std::vector<ModuleId> fine(net.node_count());
  for (auto& m : fine) m = static_cast<ModuleId>(rng.below(6));
  fine = compact_assignment(fine);
  const FlowGraph coarse = aggregate(g, fine);
  std::vector<ModuleId> top(coarse.node_count());
  for (auto& m : top) m = static_cast<ModuleId>(rng.below(3));
  std::vector<ModuleId> projected(fine.size());
  for (std::size_t u = 0; u < fine.size(); ++u) projected[u] = top[fine[u]];
  CHECK(two_level_codelength(coarse, top) == doctest::Approx(two_level_codelength(g, projected)).epsilon(1e-12));
  const std::vector<ModuleId> coarse_one(coarse.node_count(), 0);
  const std::vector<ModuleId> fine_one(fine.size(), 0);
  CHECK(two_level_codelength(coarse, coarse_one) == doctest::Approx(two_level_codelength(g, fine_one)).epsilon(1e-12));
}

TEST_CASE("local moves never increase the codelength") {
  const Network net = mt::random_network(40, 0.1, 8, false, false);
  const FlowGraph g = make_flow_graph(build_flow_model(net, Method::standard));
  Partition part(g);
  Rng rng(1);
  double previous = part.codelength();
  for (int i = 0; i < 5; ++i) {
    const auto r = local_move_pass(part, rng, trials(1));
    CHECK(part.codelength() <= previous + 1e-12);
    CHECK(r.improvement >= 0.0);
    previous = part.codelength();
  }
}

TEST_CASE("invalid search settings are rejected") {
  const FlowGraph g = make_flow_graph(build_flow_model(mt::clique(3), Method::standard));
  CHECK_THROWS_AS(search(g, trials(0)), Error);
}

TEST_CASE("nodes without flow join the heaviest module") {
  // Node 10 is isolated: nothing enters it under the standard model.
  Network base = mt::clique_pair(5, true);
  auto links = base.links();
  const Network net = Network::from_links(11, links, false, false, {});
  const FlowModel fm = build_flow_model(net, Method::standard);
  const FlowGraph g = make_flow_graph(fm);
  REQUIRE(g.node(10).flow == 0.0);
  const CodingTree tree = optimize(fm, {});
  CHECK(tree.top_module_count() == 2);
  const std::vector<ModuleId> lonely{0, 0, 0, 0, 0, 1, 1, 1, 1, 1, 2};
  const auto attached = attach_zero_flow_nodes(g, lonely);
  CHECK(attached[10] < 2);
  CHECK(two_level_codelength(g, attached) == doctest::Approx(two_level_codelength(g, lonely)).epsilon(1e-12));
}
