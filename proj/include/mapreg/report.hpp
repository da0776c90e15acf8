#pragma once

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>

#include "mapreg/experiment.hpp"

namespace mapreg {

struct ReportOptions {
  /// Orient each (network, method, fraction) mean AUC so that it is >= 0.5.
  bool flip_auc = true;
  /// Aggregate whatever is present instead of refusing incomplete tables.
  bool allow_missing = false;
  std::size_t resamples = 1000;
  double level = 0.95;
  std::uint64_t seed = 1;
};

/// Aggregate tables keyed by file name:
///   auc_by_fraction.csv  method,fraction,mean_auc,ci_lo,ci_hi,networks
///   mean_rank.csv        method,fraction,mean_rank,ci_lo,ci_hi,networks
///   nontrivial.csv       method,fraction,nontrivial_fraction,mean_modules,records
///   ami.csv              method,fraction,mean_ami,ci_lo,ci_hi,count
///   density.csv          method,fraction,mean_total_weight,records
/// Confidence intervals bootstrap the per-network means, or the repeats when
/// only one network is present. Throws on incomplete tables unless
/// allow_missing is set; failed cells count as missing.
std::map<std::string, std::string> build_reports(std::span<const ExperimentRecord> records,
                                                 const ReportOptions& options = {});

}  // namespace mapreg
