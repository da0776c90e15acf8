#include "mapreg/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <set>
#include <unordered_map>

#include "mapreg/error.hpp"
#include "mapreg/random.hpp"

namespace mapreg {

double mean(std::span<const double> values) {
  if (values.empty()) throw Error("mean of an empty list");
  // Offsetting by the first value keeps constant lists exact.
  const double ref = values[0];
  double acc = 0.0;
  for (double v : values) acc += v - ref;
  return ref + acc / static_cast<double>(values.size());
}

double auc(std::span<const double> positive, std::span<const double> negative) {
  if (positive.empty() || negative.empty()) throw Error("AUC needs positive and negative scores");
  struct Item {
    double score;
    bool positive;
  };
  std::vector<Item> items;
  items.reserve(positive.size() + negative.size());
  for (double s : positive) {
    if (std::isnan(s)) throw Error("NaN score in AUC input");
    items.push_back({s, true});
  }
  for (double s : negative) {
    if (std::isnan(s)) throw Error("NaN score in AUC input");
    items.push_back({s, false});
  }
  std::sort(items.begin(), items.end(), [](const Item& a, const Item& b) { return a.score < b.score; });

  // Sum of (1-based, tie-averaged) ranks of the positives, doubled to stay integral.
  long double twice_rank_sum = 0.0L;
  std::size_t i = 0;
  while (i < items.size()) {
    std::size_t j = i;
    std::size_t pos_in_group = 0;
    while (j < items.size() && items[j].score == items[i].score) {
      pos_in_group += items[j].positive ? 1 : 0;
      ++j;
    }
    // ranks i+1 .. j, average (i + 1 + j) / 2
    twice_rank_sum += static_cast<long double>(pos_in_group) * static_cast<long double>(i + 1 + j);
    i = j;
  }
  const auto p = static_cast<long double>(positive.size());
  const auto n = static_cast<long double>(negative.size());
  const long double u = twice_rank_sum / 2.0L - p * (p + 1.0L) / 2.0L;
  return static_cast<double>(u / (p * n));
}

namespace {

struct Contingency {
  std::vector<double> row;  // a_i
  std::vector<double> col;  // b_j
  std::vector<std::vector<double>> cells;
  double total = 0.0;
};

std::vector<std::uint32_t> relabel(std::span<const std::uint32_t> labels, std::size_t& count) {
  std::unordered_map<std::uint32_t, std::uint32_t> ids;
  std::vector<std::uint32_t> out;
  out.reserve(labels.size());
  for (auto l : labels) out.push_back(ids.try_emplace(l, static_cast<std::uint32_t>(ids.size())).first->second);
  count = ids.size();
  return out;
}

Contingency contingency(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  if (a.size() != b.size()) throw Error("partitions cover different node sets");
  std::size_t ka = 0;
  std::size_t kb = 0;
  const auto ra = relabel(a, ka);
  const auto rb = relabel(b, kb);
  Contingency c;
  c.row.assign(ka, 0.0);
  c.col.assign(kb, 0.0);
  c.cells.assign(ka, std::vector<double>(kb, 0.0));
  for (std::size_t i = 0; i < ra.size(); ++i) {
    c.cells[ra[i]][rb[i]] += 1.0;
    c.row[ra[i]] += 1.0;
    c.col[rb[i]] += 1.0;
  }
  c.total = static_cast<double>(a.size());
  return c;
}

double entropy_of_counts(std::span<const double> counts, double total) {
  double h = 0.0;
  for (double c : counts) {
    if (c > 0.0) h -= (c / total) * std::log(c / total);
  }
  return h;
}

double mi_from(const Contingency& c) {
  double mi = 0.0;
  for (std::size_t i = 0; i < c.row.size(); ++i) {
    for (std::size_t j = 0; j < c.col.size(); ++j) {
      const double nij = c.cells[i][j];
      if (nij > 0.0) mi += (nij / c.total) * std::log(c.total * nij / (c.row[i] * c.col[j]));
    }
  }
  return std::max(0.0, mi);
}

double emi_from(const Contingency& c) {
  const double n = c.total;
  const double lg_n = std::lgamma(n + 1.0);
  double emi = 0.0;
  for (double ai : c.row) {
    for (double bj : c.col) {
      const double lo = std::max(1.0, ai + bj - n);
      const double hi = std::min(ai, bj);
      const double base = std::lgamma(ai + 1.0) + std::lgamma(bj + 1.0) + std::lgamma(n - ai + 1.0) +
                          std::lgamma(n - bj + 1.0) - lg_n;
      for (double nij = lo; nij <= hi; nij += 1.0) {
        const double log_p = base - std::lgamma(nij + 1.0) - std::lgamma(ai - nij + 1.0) -
                             std::lgamma(bj - nij + 1.0) - std::lgamma(n - ai - bj + nij + 1.0);
        emi += (nij / n) * std::log(n * nij / (ai * bj)) * std::exp(log_p);
      }
    }
  }
  return emi;
}

}  // namespace

double mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  return mi_from(contingency(a, b));
}

double partition_entropy(std::span<const std::uint32_t> labels) {
  std::size_t k = 0;
  const auto r = relabel(labels, k);
  std::vector<double> counts(k, 0.0);
  for (auto l : r) counts[l] += 1.0;
  return entropy_of_counts(counts, static_cast<double>(labels.size()));
}

double expected_mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  return emi_from(contingency(a, b));
}

double ami(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b) {
  const Contingency c = contingency(a, b);
  if (c.total == 0.0) return 0.0;
  const double mi = mi_from(c);
  const double emi = emi_from(c);
  const double normalizer = 0.5 * (entropy_of_counts(c.row, c.total) + entropy_of_counts(c.col, c.total));
  const double denominator = normalizer - emi;
  if (std::abs(denominator) < 1e-15) return 0.0;
  return (mi - emi) / denominator;
}

std::map<std::string, double> rank_methods(const std::map<std::string, double>& scores) {
  std::vector<std::pair<std::string, double>> sorted(scores.begin(), scores.end());
  std::stable_sort(sorted.begin(), sorted.end(), [](const auto& x, const auto& y) { return x.second > y.second; });
  std::map<std::string, double> ranks;
  std::size_t i = 0;
  while (i < sorted.size()) {
    std::size_t j = i;
    while (j < sorted.size() && sorted[j].second == sorted[i].second) ++j;
    const double avg = 0.5 * static_cast<double>(i + 1 + j);
    for (std::size_t k = i; k < j; ++k) ranks[sorted[k].first] = avg;
    i = j;
  }
  return ranks;
}

std::map<std::string, double> mean_rank(const ScoreTable& table) {
  if (table.empty()) throw Error("mean rank of an empty table");
  std::set<std::string> methods;
  for (const auto& [network, row] : table) {
    for (const auto& [method, value] : row) methods.insert(method);
  }
  std::map<std::string, double> sums;
  for (const auto& [network, row] : table) {
    for (const auto& m : methods) {
      if (!row.count(m)) throw Error("missing AUC for network '" + network + "', method '" + m + "'");
    }
    for (const auto& [method, rank] : rank_methods(row)) sums[method] += rank;
  }
  for (auto& [method, s] : sums) s /= static_cast<double>(table.size());
  return sums;
}

double quantile_sorted(std::span<const double> sorted, double q) {
  if (sorted.empty()) throw Error("quantile of an empty list");
  const double h = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(h));
  const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = h - static_cast<double>(lo);
  if (frac == 0.0 || sorted[lo] == sorted[hi]) return sorted[lo];
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

ConfidenceInterval bootstrap_ci(std::span<const double> values, std::size_t resamples, double level,
                                std::uint64_t seed) {
  if (values.empty()) throw Error("bootstrap of an empty list");
  if (!(level > 0.0 && level < 1.0)) throw Error("confidence level must lie in (0, 1)");
  if (resamples == 0) throw Error("bootstrap needs at least one resample");
  const std::size_t n = values.size();
  const auto [min_it, max_it] = std::minmax_element(values.begin(), values.end());
  Rng rng(seed);
  std::vector<double> means(resamples);
  std::vector<double> sample(n);
  for (auto& m : means) {
    for (auto& s : sample) s = values[rng.below(n)];
    m = std::clamp(mean(sample), *min_it, *max_it);
  }
  std::sort(means.begin(), means.end());
  const double tail = 0.5 * (1.0 - level);
  return {quantile_sorted(means, tail), quantile_sorted(means, 1.0 - tail)};
}

NontrivialStats nontrivial_stats(std::span<const std::size_t> module_counts) {
  NontrivialStats s;
  s.count = module_counts.size();
  if (module_counts.empty()) return s;
  double sum = 0.0;
  std::size_t nontrivial = 0;
  for (auto k : module_counts) {
    if (k > 1) {
      ++nontrivial;
      sum += static_cast<double>(k);
    }
  }
  s.nontrivial_fraction = static_cast<double>(nontrivial) / static_cast<double>(module_counts.size());
  if (nontrivial > 0) s.mean_modules = sum / static_cast<double>(nontrivial);
  return s;
}

}  // namespace mapreg
