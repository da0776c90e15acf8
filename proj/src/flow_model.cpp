#include "mapreg/flow_model.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "mapreg/error.hpp"

namespace mapreg {

double WeightOverlay::total_weight() const noexcept {
  double total = 0.0;
  for (const Arc& a : arcs) total += a.weight;
  return total;
}

double WeightOverlay::weight(NodeId u, NodeId v) const noexcept {
  auto it = std::lower_bound(arcs.begin(), arcs.end(), std::pair{u, v}, [](const Arc& a, const std::pair<NodeId, NodeId>& key) {
    return a.source != key.first ? a.source < key.first : a.target < key.second;
  });
  return it != arcs.end() && it->source == u && it->target == v ? it->weight : 0.0;
}

double config_model_weight(const Network& net, NodeId u, NodeId v) {
  const auto& du = net.degrees(u);
  const auto& dv = net.degrees(v);
  if (du.k_out == 0 || dv.k_in == 0) return 0.0;
  // sum_i (k_in + k_out) = 2 * arcs, sum_i (s_in + s_out) = 2 * w_tot
  const double global = static_cast<double>(net.arc_count()) / net.total_weight();
  return global * (du.s_out * dv.s_in) / (static_cast<double>(du.k_out) * dv.k_in);
}

double prior_strength(std::size_t node_count, int correction) {
  if (correction < 0) throw Error("prior correction must be >= 0");
  const double m = static_cast<double>(node_count) + correction;
  if (node_count == 0) throw Error("prior strength undefined for an empty network");
  return std::log(m) / m;
}

double prior_weight(const Network& net, NodeId u, NodeId v, int correction) {
  const double strength = prior_strength(net.node_count(), correction);
  return strength * config_model_weight(net, u, v);
}

double FlowModel::transition(NodeId u, NodeId v) const noexcept {
  if (dangling(u)) return dangling_dist_[v];
  double t = 0.0;
  if (row_sum_[u] > 0.0) {
    auto r = row(u);
    auto it = std::lower_bound(r.begin(), r.end(), v, [](const Entry& e, NodeId t) { return e.target < t; });
    if (it != r.end() && it->target == v) t += (1.0 - alpha_[u]) * it->weight / row_sum_[u];
  }
  if (!prior_dist_.empty()) t += alpha_[u] * prior_dist_[v];
  return t;
}

double FlowModel::total_weight() const noexcept {
  return std::accumulate(row_sum_.begin(), row_sum_.end(), 0.0) +
         std::accumulate(prior_mass_.begin(), prior_mass_.end(), 0.0);
}

void FlowModel::set_visit_rates(std::vector<double> p) {
  if (p.size() != node_count()) throw Error("visit-rate vector has wrong size");
  visit_rates_ = std::move(p);
}

FlowModel combine_overlays(const Network& observed, const GlobalRegularization& global, const WeightOverlay& local,
                           const CombineOptions& options) {
  const std::size_t n = observed.node_count();
  if (local.node_count != n) throw Error("overlay node set does not match the network");

  double scale = 1.0;
  if (options.rescale_local_to_total) {
    const double local_total = local.total_weight();
    if (local_total > 0.0) scale = observed.total_weight() / local_total;
  }

  FlowModel fm;
  fm.offsets_.assign(n + 1, 0);
  fm.row_sum_.assign(n, 0.0);
  fm.entries_.reserve(observed.arc_count() + local.arcs.size());

  // Merge the sorted observed rows with the sorted overlay rows.
  auto local_it = local.arcs.begin();
  for (NodeId u = 0; u < n; ++u) {
    auto obs = observed.out_arcs(u);
    auto obs_it = obs.begin();
    auto local_end = local_it;
    while (local_end != local.arcs.end() && local_end->source == u) ++local_end;
    while (obs_it != obs.end() || local_it != local_end) {
      NodeId target;
      double w = 0.0;
      if (local_it == local_end || (obs_it != obs.end() && obs_it->target < local_it->target)) {
        target = obs_it->target;
        w = obs_it->weight;
        ++obs_it;
      } else if (obs_it == obs.end() || local_it->target < obs_it->target) {
        target = local_it->target;
        w = scale * local_it->weight;
        ++local_it;
      } else {
        target = obs_it->target;
        w = obs_it->weight + scale * local_it->weight;
        ++obs_it;
        ++local_it;
      }
      if (target == u) throw Error("overlay contains a self-link");
      if (w > 0.0) {
        fm.entries_.push_back({target, w});
        fm.row_sum_[u] += w;
      }
    }
    if (local_it != local_end) throw Error("overlay arcs are not sorted");
    fm.offsets_[u + 1] = fm.entries_.size();
  }
  if (local_it != local.arcs.end()) throw Error("overlay arcs are not sorted");

  if (global.bayesian_prior && observed.arc_count() > 0) {
    const double strength = prior_strength(n, global.correction);
    const double config_factor = static_cast<double>(observed.arc_count()) / observed.total_weight();
    fm.prior_dist_.assign(n, 0.0);
    double z = 0.0;
    for (NodeId v = 0; v < n; ++v) {
      const auto& d = observed.degrees(v);
      if (d.k_in > 0) {
        fm.prior_dist_[v] = d.s_in / d.k_in;
        z += fm.prior_dist_[v];
      }
    }
    for (double& x : fm.prior_dist_) x /= z;
    fm.prior_mass_.assign(n, 0.0);
    for (NodeId u = 0; u < n; ++u) {
      const auto& d = observed.degrees(u);
      if (d.k_out > 0) fm.prior_mass_[u] = strength * config_factor * (d.s_out / d.k_out) * z;
    }
  }

  fm.alpha_.assign(n, 0.0);
  for (NodeId u = 0; u < n; ++u) {
    const double prior = fm.prior_mass(u);
    const double denom = fm.row_sum_[u] + prior;
    if (denom > 0.0) fm.alpha_[u] = prior / denom;
  }

  // Dangling walkers restart uniformly on nodes that can be entered.
  std::vector<char> enterable(n, 0);
  for (const auto& e : fm.entries_) enterable[e.target] = 1;
  for (std::size_t v = 0; v < fm.prior_dist_.size(); ++v) {
    if (fm.prior_dist_[v] > 0.0) enterable[v] = 1;
  }
  const auto count = static_cast<double>(std::count(enterable.begin(), enterable.end(), 1));
  fm.dangling_dist_.assign(n, 0.0);
  for (NodeId v = 0; v < n; ++v) {
    fm.dangling_dist_[v] = count > 0 ? (enterable[v] ? 1.0 / count : 0.0) : 1.0 / static_cast<double>(n);
  }
  return fm;
}

FlowModel empirical_transitions(const Network& net) {
  return combine_overlays(net, GlobalRegularization::none(), WeightOverlay{net.node_count(), {}});
}

FlowModel regularized_transitions(const Network& net, int correction) {
  if (net.node_count() == 0) throw Error("cannot regularize an empty network");
  return combine_overlays(net, GlobalRegularization::prior(correction), WeightOverlay{net.node_count(), {}});
}

namespace {

// Column-oriented view of the sparse part: for each target v, the sources u
// with coefficient (1 - alpha_u) w_uv / S_u.
struct PullMatrix {
  std::vector<std::size_t> offsets;
  std::vector<NodeId> sources;
  std::vector<double> coefficients;
};

PullMatrix make_pull_matrix(const FlowModel& fm) {
  const std::size_t n = fm.node_count();
  PullMatrix m;
  m.offsets.assign(n + 1, 0);
  for (NodeId u = 0; u < n; ++u) {
    for (const auto& e : fm.row(u)) ++m.offsets[e.target + 1];
  }
  for (std::size_t v = 0; v < n; ++v) m.offsets[v + 1] += m.offsets[v];
  m.sources.resize(m.offsets[n]);
  m.coefficients.resize(m.offsets[n]);
  std::vector<std::size_t> cursor(m.offsets.begin(), m.offsets.end() - 1);
  for (NodeId u = 0; u < n; ++u) {
    if (fm.dangling(u) || fm.row_sum(u) <= 0.0) continue;
    const double scale = (1.0 - fm.alpha(u)) / fm.row_sum(u);
    for (const auto& e : fm.row(u)) {
      const std::size_t slot = cursor[e.target]++;
      m.sources[slot] = u;
      m.coefficients[slot] = scale * e.weight;
    }
  }
  return m;
}

std::vector<double> initial_rates(const FlowModel& fm) {
  const std::size_t n = fm.node_count();
  std::vector<double> p(n, 0.0);
  for (NodeId u = 0; u < n; ++u) {
    for (const auto& e : fm.row(u)) p[e.target] += e.weight;
  }
  double total = std::accumulate(p.begin(), p.end(), 0.0);
  if (total <= 0.0) {
    p.assign(n, 1.0);
    total = static_cast<double>(n);
  }
  for (double& x : p) x /= total;
  return p;
}

template <bool Parallel>
std::vector<double> power_iteration(const FlowModel& fm, double tol, std::size_t max_iters) {
  const std::size_t n = fm.node_count();
  if (n == 0) return {};
  const PullMatrix pull = make_pull_matrix(fm);
  const auto prior = fm.prior_distribution();
  const auto restart = fm.dangling_distribution();

  std::vector<double> p = initial_rates(fm);
  std::vector<double> next(n, 0.0);
  double residual = 0.0;
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    double teleport = 0.0;
    double dangling = 0.0;
    for (NodeId u = 0; u < n; ++u) {
      if (fm.dangling(u)) {
        dangling += p[u];
      } else {
        teleport += p[u] * fm.alpha(u);
      }
    }

    const auto step = [&](std::size_t v) {
      double acc = 0.0;
      for (std::size_t k = pull.offsets[v]; k < pull.offsets[v + 1]; ++k) acc += p[pull.sources[k]] * pull.coefficients[k];
      if (!prior.empty()) acc += teleport * prior[v];
      acc += dangling * restart[v];
      next[v] = acc;
    };
    if constexpr (Parallel) {
#pragma omp parallel for schedule(static)
      for (std::size_t v = 0; v < n; ++v) step(v);
    } else {
      for (std::size_t v = 0; v < n; ++v) step(v);
    }

    residual = 0.0;
    for (std::size_t v = 0; v < n; ++v) residual += std::abs(next[v] - p[v]);
    if (residual < tol) {
      const double total = std::accumulate(p.begin(), p.end(), 0.0);
      for (double& x : p) x /= total;
      return p;
    }
    // Lazy step: same fixed point, no oscillation on periodic chains.
    double total = 0.0;
    for (std::size_t v = 0; v < n; ++v) {
      p[v] = 0.5 * (p[v] + next[v]);
      total += p[v];
    }
    for (double& x : p) x /= total;
  }
  throw ConvergenceError(residual, max_iters);
}

}  // namespace

std::vector<double> visit_rates(const FlowModel& fm, double tol, std::size_t max_iters) {
  return power_iteration<true>(fm, tol, max_iters);
}

void compute_visit_rates(FlowModel& fm, double tol, std::size_t max_iters) {
  fm.set_visit_rates(visit_rates(fm, tol, max_iters));
}

namespace serial {
std::vector<double> visit_rates(const FlowModel& fm, double tol, std::size_t max_iters) {
  return power_iteration<false>(fm, tol, max_iters);
}
}  // namespace serial

}  // namespace mapreg
