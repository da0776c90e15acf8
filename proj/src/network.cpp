#include "mapreg/network.hpp"

#include <algorithm>
#include <cctype>
#include <cerrno>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include <fmt/format.h>

#include "mapreg/error.hpp"

namespace mapreg {

Network Network::from_links(std::size_t node_count, std::span<const Arc> links, bool directed, bool weighted,
                            std::vector<std::string> labels) {
  Network net;
  net.directed_ = directed;
  net.weighted_ = weighted;
  if (labels.empty()) {
    labels.reserve(node_count);
    for (std::size_t i = 0; i < node_count; ++i) labels.push_back(std::to_string(i));
  }
  if (labels.size() != node_count) throw Error("label count does not match node count");
  net.labels_ = std::move(labels);
  for (std::size_t i = 0; i < node_count; ++i) {
    if (!net.index_.emplace(net.labels_[i], static_cast<NodeId>(i)).second) {
      throw Error("duplicate node label '" + net.labels_[i] + "'");
    }
  }

  std::vector<Arc> arcs;
  arcs.reserve(directed ? links.size() : 2 * links.size());
  for (const Arc& link : links) {
    if (link.source >= node_count || link.target >= node_count) throw Error("link endpoint out of range");
    if (!(link.weight >= 0.0) || !std::isfinite(link.weight)) throw Error("link weight must be finite and >= 0");
    if (link.source == link.target || link.weight == 0.0) continue;
    arcs.push_back(link);
    if (!directed) arcs.push_back({link.target, link.source, link.weight});
  }
  std::sort(arcs.begin(), arcs.end(), [](const Arc& a, const Arc& b) {
    return a.source != b.source ? a.source < b.source : a.target < b.target;
  });
  // Accumulate multi-edges.
  for (const Arc& a : arcs) {
    if (!net.arcs_.empty() && net.arcs_.back().source == a.source && net.arcs_.back().target == a.target) {
      net.arcs_.back().weight += a.weight;
    } else {
      net.arcs_.push_back(a);
    }
  }

  const std::size_t n = node_count;
  net.degrees_.assign(n, NodeDegrees{});
  net.out_offsets_.assign(n + 1, 0);
  net.in_offsets_.assign(n + 1, 0);
  for (const Arc& a : net.arcs_) {
    ++net.out_offsets_[a.source + 1];
    ++net.in_offsets_[a.target + 1];
    auto& ds = net.degrees_[a.source];
    auto& dt = net.degrees_[a.target];
    ++ds.k_out;
    ds.s_out += a.weight;
    ++dt.k_in;
    dt.s_in += a.weight;
  }
  for (std::size_t i = 0; i < n; ++i) {
    net.out_offsets_[i + 1] += net.out_offsets_[i];
    net.in_offsets_[i + 1] += net.in_offsets_[i];
  }
  net.in_arcs_.resize(net.arcs_.size());
  std::vector<std::size_t> cursor(net.in_offsets_.begin(), net.in_offsets_.end() - 1);
  for (const Arc& a : net.arcs_) net.in_arcs_[cursor[a.target]++] = a;

  net.total_weight_ = 0.0;
  for (const auto& d : net.degrees_) net.total_weight_ += d.s_out;
  return net;
}

std::vector<Arc> Network::links() const {
  if (directed_) return arcs_;
  std::vector<Arc> out;
  out.reserve(arcs_.size() / 2);
  for (const Arc& a : arcs_) {
    if (a.source < a.target) out.push_back(a);
  }
  return out;
}

std::uint32_t Network::max_out_degree() const noexcept {
  std::uint32_t k = 0;
  for (const auto& d : degrees_) k = std::max(k, d.k_out);
  return k;
}

double Network::weight(NodeId u, NodeId v) const noexcept {
  auto row = out_arcs(u);
  auto it = std::lower_bound(row.begin(), row.end(), v, [](const Arc& a, NodeId t) { return a.target < t; });
  return it != row.end() && it->target == v ? it->weight : 0.0;
}

std::optional<NodeId> Network::find(std::string_view label) const {
  auto it = index_.find(std::string(label));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

namespace {

std::vector<std::string_view> split_tokens(std::string_view line) {
  std::vector<std::string_view> tokens;
  std::size_t i = 0;
  while (i < line.size()) {
    while (i < line.size() && std::isspace(static_cast<unsigned char>(line[i]))) ++i;
    if (i >= line.size()) break;
    std::size_t j = i;
    while (j < line.size() && !std::isspace(static_cast<unsigned char>(line[j]))) ++j;
    tokens.push_back(line.substr(i, j - i));
    i = j;
  }
  return tokens;
}

double parse_weight(std::string_view token, std::size_t line_no) {
  std::string s(token);
  errno = 0;
  char* end = nullptr;
  const double w = std::strtod(s.c_str(), &end);
  if (end != s.c_str() + s.size() || errno == ERANGE || !std::isfinite(w)) {
    throw ParseError(line_no, "non-numeric weight '" + s + "'");
  }
  if (w < 0.0) throw ParseError(line_no, "negative weight '" + s + "'");
  return w;
}

}  // namespace

Network parse_edge_list(std::istream& in, const ParseOptions& options) {
  std::vector<std::string> labels;
  std::unordered_map<std::string, NodeId> ids;
  std::vector<Arc> links;
  auto intern = [&](std::string_view token) {
    auto [it, inserted] = ids.try_emplace(std::string(token), static_cast<NodeId>(labels.size()));
    if (inserted) labels.emplace_back(token);
    return it->second;
  };

  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    std::string_view view(line);
    if (auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    auto tokens = split_tokens(view);
    if (tokens.empty()) continue;
    if (tokens.size() != 2 && tokens.size() != 3) {
      throw ParseError(line_no, fmt::format("expected 2 or 3 tokens, got {}", tokens.size()));
    }
    double w = 1.0;
    if (tokens.size() == 3) {
      const double parsed = parse_weight(tokens[2], line_no);
      if (options.weighted) w = parsed;
    }
    const NodeId u = intern(tokens[0]);
    const NodeId v = intern(tokens[1]);
    links.push_back({u, v, w});
  }
  const std::size_t n = labels.size();
  return Network::from_links(n, links, options.directed, options.weighted, std::move(labels));
}

Network parse_edge_list(std::string_view text, const ParseOptions& options) {
  std::istringstream in{std::string(text)};
  return parse_edge_list(in, options);
}

Network read_edge_list(const std::filesystem::path& path, const ParseOptions& options) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open '" + path.string() + "'");
  try {
    return parse_edge_list(in, options);
  } catch (const ParseError& e) {
    throw ParseError(path.string(), e.line(), e.detail());
  }
}

void write_edge_list(std::ostream& out, const Network& net) {
  for (const Arc& a : net.links()) {
    out << fmt::format("{} {} {:.17g}\n", net.label(a.source), net.label(a.target), a.weight);
  }
}

std::vector<NodeDegrees> degrees_and_strengths(const Network& net) {
  return {net.degrees().begin(), net.degrees().end()};
}

}  // namespace mapreg
