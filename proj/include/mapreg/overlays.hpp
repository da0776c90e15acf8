#pragma once

#include <string>
#include <string_view>

#include "mapreg/flow_model.hpp"
#include "mapreg/network.hpp"

namespace mapreg {

inline constexpr double kDefaultBeta = 0.7;
inline constexpr double kDefaultDelta = 0.5;

/// Jaccard overlap of undirected neighborhoods for every pair sharing a
/// neighbor, emitted in both directions.
WeightOverlay common_neighbors_overlay(const Network& net);

/// beta * T + (1 - beta) * T^2 with the diagonal removed, T the row-normalized
/// empirical transition matrix.
WeightOverlay mmt_overlay(const Network& net, double beta = kDefaultBeta);

/// Budget used by the variable-Markov-time walk: log2 of the largest out-degree.
double vmt_budget(const Network& net);

/// Bit cost of choosing among `candidates` out-arcs of one node: log2(count)
/// for unweighted networks, entropy of the normalized weights otherwise.
double vmt_step_cost(const Network& net, std::span<const Arc> candidates);

/// Variable-Markov-time overlay. From each source u every simple path is
/// enumerated with its exact probability: the first step is always taken,
/// afterwards the walker stops with probability delta, or when no unvisited
/// neighbor remains, or when the remaining budget cannot pay the next step.
/// w(u, x) = p_u * w_tot * Pr[walk from u stops at x], with p renormalized over
/// sources that have out-links so the overlay carries exactly w_tot.
/// `visit_rates` are the source network's p (size n).
WeightOverlay vmt_overlay(const Network& net, std::span<const double> visit_rates, double delta = kDefaultDelta);

/// Regularization pipelines, named by tag in every output.
enum class Method { standard, global, cn, mmt, vmt, global_cn, global_mmt, global_vmt };

std::string_view method_tag(Method m);
/// Accepts the tags above plus "none" as an alias of "standard".
Method parse_method(std::string_view tag);
bool uses_prior(Method m);

struct MethodParams {
  double beta = kDefaultBeta;
  double delta = kDefaultDelta;
  int correction = kDefaultCorrection;
  CombineOptions combine{};
};

/// Regularizes `net` according to `method` and solves for visit rates.
FlowModel build_flow_model(const Network& net, Method method, const MethodParams& params = {});

namespace serial {
WeightOverlay common_neighbors_overlay(const Network& net);
WeightOverlay mmt_overlay(const Network& net, double beta = kDefaultBeta);
WeightOverlay vmt_overlay(const Network& net, std::span<const double> visit_rates, double delta = kDefaultDelta);
}  // namespace serial

}  // namespace mapreg
