#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

namespace mapreg {

/// Mann-Whitney AUC, (wins + ties / 2) / (|pos| |neg|), by sorting and rank
/// counting in O((P + N) log(P + N)). Throws on empty input or NaN scores.
double auc(std::span<const double> positive, std::span<const double> negative);

/// Report-level AUC flip 1 - auc, applied to cells whose mean is below 0.5.
inline double flip_auc(double value) noexcept { return 1.0 - value; }
inline double oriented_auc(double value) noexcept { return value < 0.5 ? flip_auc(value) : value; }

/// Adjusted mutual information with hypergeometric expected MI and the
/// arithmetic mean of the two entropies as normalizer. 0 when the denominator
/// vanishes (e.g. both partitions have one module). Labels are arbitrary ints.
double ami(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// Mutual information and entropies in nats, exposed for tests and reports.
double mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);
double partition_entropy(std::span<const std::uint32_t> labels);
double expected_mutual_information(std::span<const std::uint32_t> a, std::span<const std::uint32_t> b);

/// table[network][method] = AUC. Per network, methods are ranked by
/// descending AUC (rank 1 = best, average ranks on ties); returns the mean rank
/// per method. Throws when a network lacks a method present elsewhere.
using ScoreTable = std::map<std::string, std::map<std::string, double>>;
std::map<std::string, double> mean_rank(const ScoreTable& table);
/// Ranks of one network's methods (same convention as mean_rank).
std::map<std::string, double> rank_methods(const std::map<std::string, double>& scores);

struct ConfidenceInterval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Percentile bootstrap of the mean: `resamples` resamples with replacement,
/// bounds at the (1 - level) / 2 and (1 + level) / 2 quantiles (linear
/// interpolation) of the resampled means. Deterministic given seed.
ConfidenceInterval bootstrap_ci(std::span<const double> values, std::size_t resamples = 1000, double level = 0.95,
                                std::uint64_t seed = 1);

/// Linearly interpolated quantile of sorted values, q in [0, 1].
double quantile_sorted(std::span<const double> sorted, double q);

struct NontrivialStats {
  double nontrivial_fraction = 0.0;
  std::optional<double> mean_modules;  // over non-trivial solutions only
  std::size_t count = 0;
};

/// Module counts of one (method, fraction) cell; a solution is trivial when it has one module.
NontrivialStats nontrivial_stats(std::span<const std::size_t> module_counts);

double mean(std::span<const double> values);

}  // namespace mapreg
