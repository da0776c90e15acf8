#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "mapreg/network.hpp"

namespace mapreg {

inline constexpr int kDefaultCorrection = 50;
inline constexpr double kDefaultVisitTolerance = 1e-12;
inline constexpr std::size_t kDefaultVisitIterations = 10000;

/// Sparse non-negative link weights without diagonal entries, sorted by
/// (source, target). Output of the local regularizations.
struct WeightOverlay {
  std::size_t node_count = 0;
  std::vector<Arc> arcs;

  double total_weight() const noexcept;
  /// Weight of (u, v), 0 when absent.
  double weight(NodeId u, NodeId v) const noexcept;
};

/// Global part of a combined weighting: none, or the factorized Bayesian prior.
struct GlobalRegularization {
  bool bayesian_prior = false;
  int correction = kDefaultCorrection;

  static GlobalRegularization none() { return {}; }
  static GlobalRegularization prior(int correction = kDefaultCorrection) { return {true, correction}; }
};

struct CombineOptions {
  /// Scale the local overlay so its total weight equals the observed w_tot.
  bool rescale_local_to_total = false;
};

/// Expected link weight under the continuous configuration model; 0 when
/// k_out(u) = 0 or k_in(v) = 0.
double config_model_weight(const Network& net, NodeId u, NodeId v);

/// ln(n + C) / (n + C). Throws when n + C is 0.
double prior_strength(std::size_t node_count, int correction);

/// gamma_uv = prior_strength(n, C) * c_uv.
double prior_weight(const Network& net, NodeId u, NodeId v, int correction = kDefaultCorrection);

/// Random-walk transition model over a sparse weight matrix, optionally mixed
/// with the Bayesian prior. The prior is kept factorized: for fixed u the prior
/// row is proportional to s_in(v)/k_in(v), so a prior step is a teleportation
/// draw from prior_distribution() with node-dependent probability alpha(u).
/// Nodes without any out-mass teleport to dangling_distribution().
class FlowModel {
 public:
  struct Entry {
    NodeId target;
    double weight;
  };

  std::size_t node_count() const noexcept { return row_sum_.size(); }

  /// Sparse (observed + local) weights of row u, sorted by target.
  std::span<const Entry> row(NodeId u) const noexcept {
    return std::span<const Entry>(entries_).subspan(offsets_[u], offsets_[u + 1] - offsets_[u]);
  }
  double row_sum(NodeId u) const noexcept { return row_sum_[u]; }
  /// Sum over v of gamma_uv, including the self pair.
  double prior_mass(NodeId u) const noexcept { return prior_mass_.empty() ? 0.0 : prior_mass_[u]; }
  double alpha(NodeId u) const noexcept { return alpha_[u]; }
  bool dangling(NodeId u) const noexcept { return row_sum_[u] + prior_mass(u) <= 0.0; }
  bool has_prior() const noexcept { return !prior_dist_.empty(); }

  /// Normalized prior target distribution pi_v (empty without prior).
  std::span<const double> prior_distribution() const noexcept { return prior_dist_; }
  std::span<const double> dangling_distribution() const noexcept { return dangling_dist_; }

  /// Factorized transition probability t_hat(u, v).
  double transition(NodeId u, NodeId v) const noexcept;

  /// Total weight of the regularized network: sparse weights plus prior mass.
  double total_weight() const noexcept;

  std::span<const double> visit_rates() const noexcept { return visit_rates_; }
  bool has_visit_rates() const noexcept { return !visit_rates_.empty(); }
  void set_visit_rates(std::vector<double> p);

  friend FlowModel combine_overlays(const Network& observed, const GlobalRegularization& global,
                                    const WeightOverlay& local, const CombineOptions& options);

 private:
  std::vector<std::size_t> offsets_{0};
  std::vector<Entry> entries_;
  std::vector<double> row_sum_;
  std::vector<double> prior_mass_;
  std::vector<double> alpha_;
  std::vector<double> prior_dist_;
  std::vector<double> dangling_dist_;
  std::vector<double> visit_rates_;
};

/// Unregularized model: t_uv = w_uv / s_out(u).
FlowModel empirical_transitions(const Network& net);

/// Globally regularized model (observed weights + factorized prior).
FlowModel regularized_transitions(const Network& net, int correction = kDefaultCorrection);

/// W_reg = W_global + W_local, where the global part is either the observed
/// weights alone or the observed weights plus the factorized prior.
FlowModel combine_overlays(const Network& observed, const GlobalRegularization& global, const WeightOverlay& local,
                           const CombineOptions& options = {});

/// Stationary distribution by lazy power iteration, O(arcs + n) per iteration.
/// Throws ConvergenceError when ||p - pT||_1 >= tol after max_iters iterations.
std::vector<double> visit_rates(const FlowModel& fm, double tol = kDefaultVisitTolerance,
                                std::size_t max_iters = kDefaultVisitIterations);

/// Convenience: computes and stores the visit rates.
void compute_visit_rates(FlowModel& fm, double tol = kDefaultVisitTolerance,
                         std::size_t max_iters = kDefaultVisitIterations);

namespace serial {
std::vector<double> visit_rates(const FlowModel& fm, double tol = kDefaultVisitTolerance,
                                std::size_t max_iters = kDefaultVisitIterations);
}  // namespace serial

}  // namespace mapreg
