#include "mapreg/report.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/format.h>
#include <optional>
#include <set>
#include <tuple>
#include <vector>

#include "mapreg/error.hpp"
#include "mapreg/metrics.hpp"
#include "mapreg/random.hpp"

namespace mapreg {

namespace {

struct Cell {
  std::set<std::size_t> repeats;
  std::vector<double> auc;
  std::vector<std::size_t> modules;
  std::vector<double> ami;
  std::vector<double> total_weight;
  std::size_t failed = 0;
};

using Key = std::tuple<std::string, Method, double>;  // network, method, fraction

std::string num(double v) { return fmt::format("{:.6f}", v); }
std::string num(const std::optional<double>& v) { return v ? num(*v) : std::string(); }

struct Summary {
  std::optional<double> mean;
  ConfidenceInterval ci{};
};

Summary summarize(std::span<const double> means, std::span<const double> ci_values, const ReportOptions& options,
                  std::uint64_t seed) {
  Summary s;
  if (means.empty()) return s;
  s.mean = mean(means);
  s.ci = bootstrap_ci(ci_values.empty() ? means : ci_values, options.resamples, options.level, seed);
  return s;
}

}  // namespace

std::map<std::string, std::string> build_reports(std::span<const ExperimentRecord> records,
                                                 const ReportOptions& options) {
  if (records.empty()) throw Error("no records to report");

  std::map<Key, Cell> cells;
  std::set<std::string> networks;
  std::set<Method> methods;
  std::set<double> fractions;
  std::size_t repeats = 0;
  for (const auto& r : records) {
    const Method m = parse_method(r.method);
    networks.insert(r.network);
    methods.insert(m);
    fractions.insert(r.fraction);
    repeats = std::max(repeats, r.repeat + 1);
    auto& cell = cells[{r.network, m, r.fraction}];
    if (!cell.repeats.insert(r.repeat).second) {
      throw Error(fmt::format("duplicate record for network '{}', method {}, fraction {}, repeat {}", r.network,
                              r.method, r.fraction, r.repeat));
    }
    if (!r.auc) {
      ++cell.failed;
      continue;
    }
    cell.auc.push_back(*r.auc);
    cell.modules.push_back(r.modules);
    if (r.ami) cell.ami.push_back(*r.ami);
    cell.total_weight.push_back(r.total_weight);
  }

  if (!options.allow_missing) {
    for (const auto& n : networks) {
      for (const auto m : methods) {
        for (const double f : fractions) {
          const auto it = cells.find({n, m, f});
          const std::size_t have = it == cells.end() ? 0 : it->second.auc.size();
          if (have != repeats) {
            throw Error(fmt::format("incomplete table: network '{}', method {}, fraction {} has {} of {} repeats", n,
                                    method_tag(m), f, have, repeats));
          }
        }
      }
    }
  }

  auto cell_of = [&](const std::string& n, Method m, double f) -> const Cell* {
    const auto it = cells.find({n, m, f});
    return it == cells.end() || it->second.auc.empty() ? nullptr : &it->second;
  };
  // Mean AUC of a cell and whether it was flipped.
  auto oriented = [&](const Cell& c) {
    const double raw = mean(c.auc);
    const bool flip = options.flip_auc && raw < 0.5;
    return std::pair{flip ? flip_auc(raw) : raw, flip};
  };

  std::string auc_csv = "method,fraction,mean_auc,ci_lo,ci_hi,networks\n";
  std::string rank_csv = "method,fraction,mean_rank,ci_lo,ci_hi,networks\n";
  std::string nontrivial_csv = "method,fraction,nontrivial_fraction,mean_modules,records\n";
  std::string ami_csv = "method,fraction,mean_ami,ci_lo,ci_hi,count\n";
  std::string density_csv = "method,fraction,mean_total_weight,records\n";

  for (const double f : fractions) {
    // Ranks per network over the methods present for that network.
    std::map<Method, std::vector<double>> ranks;
    for (const auto& n : networks) {
      std::map<std::string, double> row;
      for (const auto m : methods) {
        if (const Cell* c = cell_of(n, m, f)) row[std::string(method_tag(m))] = oriented(*c).first;
      }
      if (row.size() != methods.size()) continue;
      for (const auto& [tag, rank] : rank_methods(row)) ranks[parse_method(tag)].push_back(rank);
    }

    for (const auto m : methods) {
      const auto tag = method_tag(m);
      const std::string prefix = fmt::format("{},{:g}", tag, f);
      const std::uint64_t seed =
          derive_seed(options.seed, {static_cast<std::uint64_t>(m), static_cast<std::uint64_t>(std::llround(f * 1e9))});

      std::vector<double> net_means;
      std::vector<double> repeat_values;
      std::vector<std::size_t> modules;
      std::vector<double> amis;
      std::vector<double> weights;
      for (const auto& n : networks) {
        const Cell* c = cell_of(n, m, f);
        if (!c) continue;
        const auto [value, flipped] = oriented(*c);
        net_means.push_back(value);
        for (double a : c->auc) repeat_values.push_back(flipped ? flip_auc(a) : a);
        modules.insert(modules.end(), c->modules.begin(), c->modules.end());
        amis.insert(amis.end(), c->ami.begin(), c->ami.end());
        weights.insert(weights.end(), c->total_weight.begin(), c->total_weight.end());
      }

      const auto a = summarize(net_means, net_means.size() >= 2 ? std::span<const double>() : repeat_values, options,
                               derive_seed(seed, {0}));
      auc_csv += fmt::format("{},{},{},{},{}\n", prefix, num(a.mean), a.mean ? num(a.ci.lo) : "",
                             a.mean ? num(a.ci.hi) : "", net_means.size());

      const auto& rk = ranks[m];
      const auto r = summarize(rk, {}, options, derive_seed(seed, {1}));
      rank_csv += fmt::format("{},{},{},{},{}\n", prefix, num(r.mean), r.mean ? num(r.ci.lo) : "",
                              r.mean ? num(r.ci.hi) : "", rk.size());

      const auto nt = nontrivial_stats(modules);
      nontrivial_csv += fmt::format("{},{},{},{}\n", prefix, modules.empty() ? "" : num(nt.nontrivial_fraction),
                                    num(nt.mean_modules), nt.count);

      const auto am = summarize(amis, {}, options, derive_seed(seed, {2}));
      ami_csv += fmt::format("{},{},{},{},{}\n", prefix, num(am.mean), am.mean ? num(am.ci.lo) : "",
                             am.mean ? num(am.ci.hi) : "", amis.size());

      density_csv += fmt::format("{},{},{}\n", prefix, weights.empty() ? "" : num(mean(weights)), weights.size());
    }
  }

  return {{"auc_by_fraction.csv", std::move(auc_csv)},
          {"mean_rank.csv", std::move(rank_csv)},
          {"nontrivial.csv", std::move(nontrivial_csv)},
          {"ami.csv", std::move(ami_csv)},
          {"density.csv", std::move(density_csv)}};
}

}  // namespace mapreg
