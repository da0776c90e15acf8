#include "mapreg/coding_tree.hpp"

#include <algorithm>
#include <fstream>
#include <istream>
#include <map>
#include <numeric>
#include <ostream>
#include <sstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "mapreg/error.hpp"

namespace mapreg {

CodingTree CodingTree::two_level(const FlowGraph& g, std::span<const ModuleId> assignment,
                                 std::vector<std::string> labels) {
  const auto compact = compact_assignment(assignment);
  const auto flows = module_flows(g, compact);
  const std::size_t k = flows.size();

  std::vector<std::vector<NodeId>> members(k);
  for (NodeId u = 0; u < compact.size(); ++u) members[compact[u]].push_back(u);
  for (auto& list : members) {
    std::stable_sort(list.begin(), list.end(),
                     [&](NodeId a, NodeId b) { return g.node(a).flow > g.node(b).flow; });
  }
  std::vector<std::size_t> order(k);
  std::iota(order.begin(), order.end(), 0);
  auto min_member = [&](std::size_t m) { return *std::min_element(members[m].begin(), members[m].end()); };
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (flows[a].flow != flows[b].flow) return flows[a].flow > flows[b].flow;
    return min_member(a) < min_member(b);
  });

  std::vector<Module> modules(1);
  double total_flow = 0.0;
  for (std::size_t idx : order) {
    Module m;
    m.parent = 0;
    m.enter = flows[idx].enter;
    m.exit = flows[idx].exit;
    m.flow = flows[idx].flow;
    m.nodes = members[idx];
    total_flow += m.flow;
    modules[0].children.push_back(modules.size());
    modules.push_back(std::move(m));
  }
  modules[0].flow = total_flow;

  std::vector<double> node_flow(g.node_count());
  for (NodeId u = 0; u < g.node_count(); ++u) node_flow[u] = g.node(u).flow;
  if (labels.empty()) {
    for (std::size_t u = 0; u < g.node_count(); ++u) labels.push_back(std::to_string(u));
  }
  return CodingTree(std::move(modules), std::move(node_flow), std::move(labels), codelength_from_modules(flows),
                    -g.total_node_entropy());
}

CodingTree::CodingTree(std::vector<Module> modules, std::vector<double> node_flow, std::vector<std::string> labels,
                       double codelength, double one_level_codelength)
    : modules_(std::move(modules)),
      node_flow_(std::move(node_flow)),
      labels_(std::move(labels)),
      codelength_(codelength),
      one_level_codelength_(one_level_codelength) {
  if (labels_.size() != node_flow_.size()) throw Error("coding tree label count does not match node count");
  if (modules_.empty()) throw Error("coding tree needs a root module");
  index_nodes();
}

void CodingTree::index_nodes() {
  const std::size_t none = modules_.size();
  leaf_of_.assign(node_flow_.size(), none);
  rank_in_leaf_.assign(node_flow_.size(), 0);
  for (std::size_t m = 0; m < modules_.size(); ++m) {
    if (m > 0 && modules_[m].parent >= m && modules_[m].parent != 0) {
      // parents must precede children so depth() terminates
      throw Error("coding tree modules must be listed parent-first");
    }
    const auto& nodes = modules_[m].nodes;
    for (std::size_t r = 0; r < nodes.size(); ++r) {
      const NodeId u = nodes[r];
      if (u >= node_flow_.size()) throw Error("coding tree node id out of range");
      if (leaf_of_[u] != none) throw Error("node " + std::to_string(u) + " appears in two modules");
      leaf_of_[u] = m;
      rank_in_leaf_[u] = r;
    }
  }
  for (std::size_t u = 0; u < leaf_of_.size(); ++u) {
    if (leaf_of_[u] == none) throw Error("node " + std::to_string(u) + " is not assigned to a module");
  }
}

double CodingTree::codebook_use(std::size_t m) const noexcept {
  const auto& mod = modules_[m];
  double use = mod.exit;
  for (std::size_t c : mod.children) use += modules_[c].enter;
  for (NodeId u : mod.nodes) use += node_flow_[u];
  return use;
}

std::size_t CodingTree::depth(std::size_t m) const noexcept {
  std::size_t d = 0;
  while (m != 0) {
    m = modules_[m].parent;
    ++d;
  }
  return d;
}

std::vector<ModuleId> CodingTree::top_level_assignment() const {
  std::vector<ModuleId> top_index(modules_.size(), 0);
  const auto& roots = modules_[0].children;
  for (std::size_t i = 0; i < roots.size(); ++i) top_index[roots[i]] = static_cast<ModuleId>(i);
  std::vector<ModuleId> out(node_count());
  for (NodeId u = 0; u < node_count(); ++u) {
    std::size_t m = leaf_of_[u];
    while (m != 0 && modules_[m].parent != 0) m = modules_[m].parent;
    out[u] = top_index[m];
  }
  return out;
}

std::string CodingTree::module_path(std::size_t m) const {
  std::vector<std::size_t> parts;
  while (m != 0) {
    const std::size_t parent = modules_[m].parent;
    const auto& siblings = modules_[parent].children;
    parts.push_back(static_cast<std::size_t>(std::find(siblings.begin(), siblings.end(), m) - siblings.begin()) + 1);
    m = parent;
  }
  std::string out;
  for (auto it = parts.rbegin(); it != parts.rend(); ++it) {
    if (!out.empty()) out += ':';
    out += std::to_string(*it);
  }
  return out;
}

std::string CodingTree::path(NodeId u) const {
  const std::size_t m = leaf_of_[u];
  const std::size_t rank = modules_[m].children.size() + rank_in_leaf_[u] + 1;
  std::string prefix = module_path(m);
  return prefix.empty() ? std::to_string(rank) : prefix + ":" + std::to_string(rank);
}

void write_tree(std::ostream& out, const CodingTree& tree) {
  out << fmt::format("# codelength {:.17g} bits\n", tree.codelength());
  out << fmt::format("# one-level {:.17g} bits\n", tree.one_level_codelength());
  for (std::size_t m = 1; m < tree.module_count(); ++m) {
    const auto& mod = tree.module(m);
    out << fmt::format("# module {} enter {:.17g} exit {:.17g} flow {:.17g}\n", tree.module_path(m), mod.enter,
                       mod.exit, mod.flow);
  }
  // Depth-first so nodes appear grouped by module.
  std::vector<std::size_t> stack{0};
  while (!stack.empty()) {
    const std::size_t m = stack.back();
    stack.pop_back();
    const auto& mod = tree.module(m);
    for (NodeId u : mod.nodes) {
      out << fmt::format("{} {:.17g} {} {}\n", tree.path(u), tree.node_flow(u), tree.label(u), u);
    }
    for (auto it = mod.children.rbegin(); it != mod.children.rend(); ++it) stack.push_back(*it);
  }
}

namespace {

std::string parent_path(const std::string& path) {
  const auto colon = path.rfind(':');
  return colon == std::string::npos ? std::string() : path.substr(0, colon);
}

struct NodeRecord {
  std::string leaf_path;
  double flow;
  std::string label;
  NodeId id;
};

struct ModuleRecord {
  std::string path;
  double enter, exit, flow;
};

CodingTree assemble(const std::vector<ModuleRecord>& module_records, const std::vector<NodeRecord>& node_records,
                    double codelength, double one_level) {
  std::vector<CodingTree::Module> modules(1);
  std::map<std::string, std::size_t> index{{"", 0}};
  for (const auto& rec : module_records) {
    const auto parent = index.find(parent_path(rec.path));
    if (parent == index.end()) throw Error("module '" + rec.path + "' listed before its parent");
    if (index.count(rec.path)) throw Error("duplicate module '" + rec.path + "'");
    CodingTree::Module m;
    m.parent = parent->second;
    m.enter = rec.enter;
    m.exit = rec.exit;
    m.flow = rec.flow;
    modules[parent->second].children.push_back(modules.size());
    index.emplace(rec.path, modules.size());
    modules.push_back(std::move(m));
  }
  const std::size_t n = node_records.size();
  std::vector<double> flow(n, 0.0);
  std::vector<std::string> labels(n);
  std::vector<char> seen(n, 0);
  for (const auto& rec : node_records) {
    if (rec.id >= n || seen[rec.id]) throw Error("tree node ids must be unique and dense");
    seen[rec.id] = 1;
    const auto leaf = index.find(rec.leaf_path);
    if (leaf == index.end()) throw Error("node " + std::to_string(rec.id) + " refers to unknown module '" + rec.leaf_path + "'");
    modules[leaf->second].nodes.push_back(rec.id);
    flow[rec.id] = rec.flow;
    labels[rec.id] = rec.label;
  }
  double total = 0.0;
  for (std::size_t c : modules[0].children) total += modules[c].flow;
  modules[0].flow = total;
  return CodingTree(std::move(modules), std::move(flow), std::move(labels), codelength, one_level);
}

}  // namespace

CodingTree read_tree(std::istream& in) {
  std::vector<ModuleRecord> modules;
  std::vector<NodeRecord> nodes;
  double codelength = 0.0;
  double one_level = 0.0;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::istringstream ls(line);
    std::string first;
    if (!(ls >> first)) continue;
    if (first[0] == '#') {
      std::string key = first.size() > 1 ? first.substr(1) : std::string();
      if (key.empty()) ls >> key;
      if (key == "codelength") {
        if (!(ls >> codelength)) throw ParseError(line_no, "bad codelength header");
      } else if (key == "one-level") {
        if (!(ls >> one_level)) throw ParseError(line_no, "bad one-level header");
      } else if (key == "module") {
        ModuleRecord rec;
        std::string k1, k2, k3;
        if (!(ls >> rec.path >> k1 >> rec.enter >> k2 >> rec.exit >> k3 >> rec.flow) || k1 != "enter" ||
            k2 != "exit" || k3 != "flow") {
          throw ParseError(line_no, "bad module line");
        }
        modules.push_back(rec);
      }
      continue;
    }
    NodeRecord rec;
    rec.leaf_path = parent_path(first);
    long long id = -1;
    if (!(ls >> rec.flow >> rec.label >> id) || id < 0) throw ParseError(line_no, "expected '<path> <flow> <label> <id>'");
    rec.id = static_cast<NodeId>(id);
    nodes.push_back(std::move(rec));
  }
  try {
    return assemble(modules, nodes, codelength, one_level);
  } catch (const ParseError&) {
    throw;
  } catch (const Error& e) {
    throw ParseError(0, e.what());
  }
}

void write_tree_json(std::ostream& out, const CodingTree& tree) {
  nlohmann::ordered_json j;
  j["codelength"] = tree.codelength();
  j["one_level_codelength"] = tree.one_level_codelength();
  auto modules = nlohmann::ordered_json::array();
  for (std::size_t m = 1; m < tree.module_count(); ++m) {
    const auto& mod = tree.module(m);
    nlohmann::ordered_json jm;
    jm["id"] = m;
    jm["path"] = tree.module_path(m);
    jm["enter"] = mod.enter;
    jm["exit"] = mod.exit;
    jm["flow"] = mod.flow;
    auto nodes = nlohmann::ordered_json::array();
    for (NodeId u : mod.nodes) {
      nodes.push_back({{"id", u}, {"label", tree.label(u)}, {"flow", tree.node_flow(u)}});
    }
    jm["nodes"] = std::move(nodes);
    modules.push_back(std::move(jm));
  }
  j["modules"] = std::move(modules);
  out << j.dump(2) << '\n';
}

CodingTree read_tree_json(std::istream& in) {
  nlohmann::json j;
  try {
    in >> j;
    std::vector<ModuleRecord> modules;
    std::vector<NodeRecord> nodes;
    for (const auto& jm : j.at("modules")) {
      ModuleRecord rec{jm.at("path").get<std::string>(), jm.at("enter").get<double>(), jm.at("exit").get<double>(),
                       jm.at("flow").get<double>()};
      for (const auto& jn : jm.at("nodes")) {
        nodes.push_back({rec.path, jn.at("flow").get<double>(), jn.value("label", std::to_string(jn.at("id").get<NodeId>())),
                         jn.at("id").get<NodeId>()});
      }
      modules.push_back(std::move(rec));
    }
    return assemble(modules, nodes, j.at("codelength").get<double>(), j.value("one_level_codelength", 0.0));
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(0, std::string("malformed tree JSON: ") + e.what());
  }
}

CodingTree load_tree(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return path.extension() == ".json" ? read_tree_json(in) : read_tree(in);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.line(), e.detail());
  }
}

}  // namespace mapreg
