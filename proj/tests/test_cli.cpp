#include <doctest.h>
#include <sys/wait.h>

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "mapreg/coding_tree.hpp"

namespace fs = std::filesystem;

namespace {

struct Workspace {
  fs::path dir;
  Workspace() {
    dir = fs::temp_directory_path() / ("mapreg_cli_" + std::to_string(std::rand()) + "_" +
                                       std::to_string(reinterpret_cast<std::uintptr_t>(this)));
    fs::create_directories(dir);
  }
  ~Workspace() { fs::remove_all(dir); }
  fs::path operator/(const std::string& name) const { return dir / name; }
};

int run(const std::string& args, const fs::path& out = {}) {
  std::string cmd = std::string(MAPREG_CLI) + " " + args;
  cmd += out.empty() ? " > /dev/null 2>&1" : " > \"" + out.string() + "\" 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

void write(const fs::path& p, const std::string& text) { std::ofstream(p, std::ios::binary) << text; }

std::string two_cliques() {
  std::string s;
  for (int base : {0, 5}) {
    for (int i = 0; i < 5; ++i) {
      for (int j = i + 1; j < 5; ++j) s += "n" + std::to_string(base + i) + " n" + std::to_string(base + j) + "\n";
    }
  }
  return s + "n4 n5\n";
}

// Blanks the wall-time column of a records CSV.
std::string mask_seconds(const std::string& csv) {
  std::istringstream in(csv);
  std::string line;
  std::string out;
  while (std::getline(in, line)) {
    std::vector<std::string> f;
    std::string field;
    std::istringstream ls(line);
    while (std::getline(ls, field, ',')) f.push_back(field);
    if (!line.empty() && line.back() == ',') f.emplace_back();
    if (f.size() == 10 && f[8] != "seconds") f[8] = "-";
    for (std::size_t i = 0; i < f.size(); ++i) out += (i ? "," : "") + f[i];
    out += "\n";
  }
  return out;
}

}  // namespace

TEST_CASE("help and usage errors") {
  CHECK(run("--help") == 0);
  CHECK(run("partition --help") == 0);
  CHECK(run("") != 0);
  CHECK(run("partition --no-such-flag x") != 0);
}

TEST_CASE("partition writes tree and JSON files deterministically") {
  Workspace ws;
  write(ws / "net.txt", two_cliques());
  const std::string base = "partition " + (ws / "net.txt").string() + " --method global --seed 3 --trials 20 -o ";
  REQUIRE(run(base + (ws / "a.tree").string(), ws / "log.txt") == 0);
  CHECK(slurp(ws / "log.txt").find("modules 2") != std::string::npos);
  CHECK(slurp(ws / "log.txt").find("method global") != std::string::npos);
  REQUIRE(fs::exists(ws / "a.json"));
  REQUIRE(run(base + (ws / "b.tree").string()) == 0);
  CHECK(slurp(ws / "a.tree") == slurp(ws / "b.tree"));
  CHECK(slurp(ws / "a.json") == slurp(ws / "b.json"));
  const auto tree = mapreg::load_tree(ws / "a.tree");
  CHECK(tree.top_module_count() == 2);
}

TEST_CASE("partition of a missing file fails without output") {
  Workspace ws;
  CHECK(run("partition " + (ws / "missing.txt").string() + " -o " + (ws / "x.tree").string()) != 0);
  CHECK_FALSE(fs::exists(ws / "x.tree"));
  CHECK_FALSE(fs::exists(ws / "x.json"));
}

TEST_CASE("score reports bits from the tree file") {
  Workspace ws;
  write(ws / "net.txt", two_cliques());
  REQUIRE(run("partition " + (ws / "net.txt").string() + " --trials 10 -o " + (ws / "t.tree").string()) == 0);
  write(ws / "pairs.txt", "n0 n1\n# comment\nn0 n9\n");
  REQUIRE(run("score " + (ws / "t.tree").string() + " " + (ws / "pairs.txt").string() + " -o " +
              (ws / "s.txt").string()) == 0);
  const auto tree = mapreg::load_tree(ws / "t.tree");
  std::istringstream in(slurp(ws / "s.txt"));
  std::string src, dst;
  double bits = 0.0, score = 0.0;
  REQUIRE(static_cast<bool>(in >> src >> dst >> bits >> score));
  CHECK(src == "n0");
  CHECK(dst == "n1");
  // Same module: -log2(p_v / codebook use), both read back from the tree file.
  mapreg::NodeId id = 0;
  while (tree.label(id) != "n1") ++id;
  const std::size_t m = tree.leaf_module(id);
  CHECK(bits == doctest::Approx(-std::log2(tree.node_flow(id) / tree.codebook_use(m))).epsilon(1e-12));
  CHECK(score == -bits);
  REQUIRE(static_cast<bool>(in >> src >> dst >> bits >> score));
  CHECK(dst == "n9");

  write(ws / "bad.txt", "n0 nope\n");
  REQUIRE(run("score " + (ws / "t.tree").string() + " " + (ws / "bad.txt").string(), ws / "err.txt") != 0);
  CHECK(slurp(ws / "err.txt").find("nope") != std::string::npos);

  write(ws / "empty.txt", "");
  CHECK(run("score " + (ws / "t.json").string() + " " + (ws / "empty.txt").string(), ws / "e.txt") == 0);
  CHECK(slurp(ws / "e.txt").empty());
}

TEST_CASE("experiment and report") {
  Workspace ws;
  write(ws / "cliques.txt", two_cliques());
  const std::string exp = "experiment " + (ws / "cliques.txt").string() +
                          " --method standard,global --fractions 0.5 --trials 10 --seed 5 -o ";
  REQUIRE(run(exp + (ws / "r1.csv").string()) == 0);
  REQUIRE(run(exp + (ws / "r2.csv").string() + " --jobs 1") == 0);
  const std::string r1 = slurp(ws / "r1.csv");
  CHECK(std::count(r1.begin(), r1.end(), '\n') == 11);
  CHECK(mask_seconds(r1) == mask_seconds(slurp(ws / "r2.csv")));

  REQUIRE(run("report " + (ws / "r1.csv").string() + " -o " + (ws / "rep").string()) == 0);
  for (const char* f : {"auc_by_fraction.csv", "mean_rank.csv", "nontrivial.csv", "ami.csv", "density.csv"}) {
    CHECK(fs::exists(ws / "rep" / f));
  }

  // Drop one row: the table is incomplete.
  std::string cut = r1.substr(0, r1.rfind('\n', r1.size() - 2) + 1);
  write(ws / "cut.csv", cut);
  CHECK(run("report " + (ws / "cut.csv").string() + " -o " + (ws / "rep2").string()) != 0);
  CHECK(run("report " + (ws / "cut.csv").string() + " --allow-missing -o " + (ws / "rep2").string()) == 0);
  CHECK(run("report " + (ws / "r1.csv").string() + " --flip-auc=false -o " + (ws / "rep3").string()) == 0);
}

TEST_CASE("experiment matches the golden records") {
  Workspace ws;
  const fs::path golden = fs::path(MAPREG_SOURCE_DIR) / "tests" / "golden";
  REQUIRE(run("experiment " + (golden / "planted.txt").string() +
              " --method standard,global,global+vmt --fractions 0.3,0.7 --repeats 3 --trials 8 --seed 2024 -o " +
              (ws / "out.csv").string()) == 0);
  CHECK(mask_seconds(slurp(ws / "out.csv")) == mask_seconds(slurp(golden / "planted_records.csv")));
}

TEST_CASE("failed experiment cells are left out of the records") {
  Workspace ws;
  write(ws / "cliques.txt", two_cliques());
  // 0.01 of 21 links removes none, so those cells fail.
  REQUIRE(run("experiment " + (ws / "cliques.txt").string() +
                  " --method standard --fractions 0.01,0.5 --repeats 2 --trials 4 -o " + (ws / "r.csv").string(),
              ws / "log.txt") == 0);
  const std::string csv = slurp(ws / "r.csv");
  CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
  CHECK(csv.find(",0.01,") == std::string::npos);
  CHECK(slurp(ws / "log.txt").find("2 of 4 cells failed") != std::string::npos);
}
