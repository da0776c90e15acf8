#include <omp.h>
#include <unistd.h>

#include <CLI11.hpp>
#include <filesystem>
#include <fmt/format.h>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "mapreg/coding_tree.hpp"
#include "mapreg/error.hpp"
#include "mapreg/experiment.hpp"
#include "mapreg/mapsim.hpp"
#include "mapreg/network.hpp"
#include "mapreg/optimizer.hpp"
#include "mapreg/overlays.hpp"
#include "mapreg/report.hpp"

namespace fs = std::filesystem;
using namespace mapreg;

namespace {

struct Common {
  bool directed = false;
  bool weighted = false;
  std::size_t trials = 100;
  std::uint64_t seed = 1;
  double beta = kDefaultBeta;
  double delta = kDefaultDelta;
  int correction = kDefaultCorrection;
  std::size_t jobs = 0;

  ParseOptions parse() const { return {directed, weighted}; }
  MethodParams params() const { return {beta, delta, correction, {}}; }
  SearchConfig search() const {
    SearchConfig s;
    s.trials = trials;
    s.seed = seed;
    return s;
  }
};

void add_network_flags(CLI::App& app, Common& c) {
  app.add_flag("--directed", c.directed, "Treat links as directed");
  app.add_flag("--weighted", c.weighted, "Read a third column as link weight");
}

void add_search_flags(CLI::App& app, Common& c) {
  app.add_option("--trials", c.trials, "Optimizer trials")->capture_default_str()->check(CLI::PositiveNumber);
  app.add_option("--seed", c.seed, "Random seed")->capture_default_str();
  app.add_option("--beta", c.beta, "Mixed Markov time weight")->capture_default_str()->check(CLI::Range(0.0, 1.0));
  app.add_option("--delta", c.delta, "Variable Markov time stop probability")->capture_default_str();
  app.add_option("--correction", c.correction, "Prior finite-size correction C")
      ->capture_default_str()
      ->check(CLI::NonNegativeNumber);
  app.add_option("--jobs", c.jobs, "Worker threads (0 = all cores)")->capture_default_str();
}

/// Writes to a sibling temporary file and renames it over `path`.
void write_atomic(const fs::path& path, const std::string& content) {
  const fs::path tmp = path.string() + fmt::format(".tmp{}", static_cast<long>(::getpid()));
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot write " + tmp.string());
    out << content;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw Error("cannot write " + tmp.string());
    }
  }
  std::error_code ec;
  fs::rename(tmp, path, ec);
  if (ec) {
    fs::remove(tmp);
    throw Error("cannot write " + path.string() + ": " + ec.message());
  }
}

void set_threads(std::size_t jobs) {
  if (jobs > 0) omp_set_num_threads(static_cast<int>(jobs));
}

int cmd_partition(const std::string& input, const std::string& method_tag_in, const std::string& output,
                  const Common& c) {
  set_threads(c.jobs);
  const Method method = parse_method(method_tag_in);
  const Network net = read_edge_list(input, c.parse());
  const FlowModel fm = build_flow_model(net, method, c.params());
  const CodingTree tree = optimize(fm, c.search(), {net.labels().begin(), net.labels().end()});

  fs::path tree_path = output.empty() ? fs::path(input).filename().replace_extension(".tree") : fs::path(output);
  fs::path json_path = tree_path;
  json_path.replace_extension(".json");
  if (json_path == tree_path) tree_path.replace_extension(".tree");

  std::ostringstream tree_text;
  write_tree(tree_text, tree);
  std::ostringstream json_text;
  write_tree_json(json_text, tree);
  write_atomic(tree_path, tree_text.str());
  write_atomic(json_path, json_text.str());

  fmt::print("method {}\ncodelength {:.6f} bits\none-level {:.6f} bits\nmodules {}\ntree {}\njson {}\n",
             method_tag(method), tree.codelength(), tree.one_level_codelength(), tree.top_module_count(),
             tree_path.string(), json_path.string());
  return 0;
}

int cmd_score(const std::string& tree_file, const std::string& pairs_file, const std::string& output) {
  const CodingTree tree = load_tree(tree_file);
  std::unordered_map<std::string, NodeId> ids;
  for (NodeId u = 0; u < tree.node_count(); ++u) ids.emplace(tree.label(u), u);

  std::ifstream in(pairs_file);
  if (!in) throw Error("cannot open " + pairs_file);
  std::string out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream tokens(line);
    std::string src;
    std::string dst;
    std::string extra;
    if (!(tokens >> src)) continue;
    if (!(tokens >> dst) || (tokens >> extra)) throw ParseError(pairs_file, line_no, "expected 'src dst'");
    const auto s = ids.find(src);
    if (s == ids.end()) throw ParseError(pairs_file, line_no, "unknown node label '" + src + "'");
    const auto d = ids.find(dst);
    if (d == ids.end()) throw ParseError(pairs_file, line_no, "unknown node label '" + dst + "'");
    const double bits = mapsim_bits(tree, s->second, d->second);
    out += fmt::format("{} {} {:.17g} {:.17g}\n", src, dst, bits, -bits);
  }
  if (output.empty() || output == "-") {
    std::cout << out;
  } else {
    write_atomic(output, out);
  }
  return 0;
}

int cmd_experiment(const std::vector<std::string>& inputs, const std::vector<std::string>& methods,
                   const std::vector<double>& fractions, std::size_t repeats, bool standard_reference,
                   const std::string& output, const Common& c) {
  std::vector<NamedNetwork> nets;
  for (const auto& path : inputs) {
    nets.push_back({fs::path(path).stem().string(), read_edge_list(path, c.parse())});
  }
  ExperimentConfig config;
  config.methods.clear();
  for (const auto& m : methods) config.methods.push_back(parse_method(m));
  config.fractions = fractions;
  config.repeats = repeats;
  config.seed = c.seed;
  config.search = c.search();
  config.params = c.params();
  config.jobs = c.jobs;
  config.standard_reference = standard_reference;

  const auto records = run_experiment(nets, config);
  // Failed cells are left out so the report sees an incomplete table.
  std::vector<ExperimentRecord> completed;
  for (const auto& r : records) {
    if (r.error.empty()) {
      completed.push_back(r);
    } else {
      fmt::print(stderr, "mapreg: cell failed (network {}, method {}, fraction {:g}, repeat {}): {}\n", r.network,
                 r.method, r.fraction, r.repeat, r.error);
    }
  }
  const std::size_t failed = records.size() - completed.size();
  std::ostringstream csv;
  write_records_csv(csv, completed);
  if (output.empty() || output == "-") {
    std::cout << csv.str();
  } else {
    write_atomic(output, csv.str());
  }
  if (failed > 0) fmt::print(stderr, "mapreg: {} of {} cells failed\n", failed, records.size());
  return 0;
}

int cmd_report(const std::string& input, bool flip, bool allow_missing, std::uint64_t seed,
               const std::string& output) {
  std::ifstream in(input);
  if (!in) throw Error("cannot open " + input);
  std::vector<ExperimentRecord> records;
  try {
    records = read_records_csv(in);
  } catch (const ParseError& e) {
    throw ParseError(input, e.line(), e.detail());
  }
  ReportOptions options;
  options.flip_auc = flip;
  options.allow_missing = allow_missing;
  options.seed = seed;
  const auto files = build_reports(records, options);
  const fs::path dir = output.empty() ? fs::path(".") : fs::path(output);
  fs::create_directories(dir);
  for (const auto& [name, content] : files) write_atomic(dir / name, content);
  for (const auto& [name, content] : files) fmt::print("{}\n", (dir / name).string());
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Regularized map-equation community detection and MapSim link prediction"};
  app.require_subcommand(1);

  Common part;
  std::string part_input;
  std::string part_method = "standard";
  std::string part_output;
  auto* partition = app.add_subcommand("partition", "Partition a network and write its coding tree");
  partition->add_option("network", part_input, "Edge list")->required();
  partition->add_option("--method", part_method, "Regularization tag")->capture_default_str();
  partition->add_option("-o", part_output, "Tree output path (JSON is written next to it)");
  add_network_flags(*partition, part);
  add_search_flags(*partition, part);

  std::string score_tree;
  std::string score_pairs;
  std::string score_output;
  auto* score = app.add_subcommand("score", "Score node pairs with MapSim");
  score->add_option("tree", score_tree, "Tree file (.tree or .json)")->required();
  score->add_option("pairs", score_pairs, "Pair list, one 'src dst' per line")->required();
  score->add_option("-o", score_output, "Output path (default stdout)");

  Common exp;
  std::vector<std::string> exp_inputs;
  std::vector<std::string> exp_methods{"standard", "global"};
  std::vector<double> exp_fractions{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
  std::size_t exp_repeats = 5;
  bool exp_standard_reference = false;
  std::string exp_output;
  auto* experiment = app.add_subcommand("experiment", "Run the link-removal protocol and write raw records");
  experiment->add_option("networks", exp_inputs, "Edge lists")->required();
  experiment->add_option("--method", exp_methods, "Regularization tags")->delimiter(',')->capture_default_str();
  experiment->add_option("--fractions", exp_fractions, "Removal fractions")->delimiter(',')->capture_default_str();
  experiment->add_option("--repeats", exp_repeats, "Repeats per fraction")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  experiment->add_flag("--standard-reference", exp_standard_reference,
                       "Compare partitions against the standard method's full-network partition");
  experiment->add_option("-o", exp_output, "Records CSV path (default stdout)");
  add_network_flags(*experiment, exp);
  add_search_flags(*experiment, exp);

  std::string report_input;
  bool report_flip = true;
  bool report_allow_missing = false;
  std::uint64_t report_seed = 1;
  std::string report_output;
  auto* report = app.add_subcommand("report", "Aggregate raw records into report tables");
  report->add_option("records", report_input, "Records CSV")->required();
  report->add_flag("--flip-auc,!--no-flip-auc", report_flip, "Orient mean AUC values below 0.5")
      ->capture_default_str();
  report->add_flag("--allow-missing", report_allow_missing, "Aggregate incomplete tables");
  report->add_option("--seed", report_seed, "Bootstrap seed")->capture_default_str();
  report->add_option("-o", report_output, "Output directory (default .)");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*partition) return cmd_partition(part_input, part_method, part_output, part);
    if (*score) return cmd_score(score_tree, score_pairs, score_output);
    if (*experiment) {
      return cmd_experiment(exp_inputs, exp_methods, exp_fractions, exp_repeats, exp_standard_reference, exp_output,
                            exp);
    }
    if (*report) return cmd_report(report_input, report_flip, report_allow_missing, report_seed, report_output);
  } catch (const std::exception& e) {
    fmt::print(stderr, "mapreg: error: {}\n", e.what());
    return 1;
  }
  return 0;
}
