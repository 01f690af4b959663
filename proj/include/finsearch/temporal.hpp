#pragma once

#include <algorithm>
#include <cmath>

#include "finsearch/graph.hpp"

namespace finsearch {

// Time-decay parameters, in hours. Defaults give the 24/Δ decay inside a
// 72-hour window with the weight capped at 24 (Δ clamped to at least one
// hour so a near-zero Δ cannot dominate aggregation unboundedly).
struct TemporalParams {
  double window_hours = 72.0;
  double numerator_hours = 24.0;
  double min_delta_hours = 1.0;

  void check() const {
    if (window_hours <= 0 || numerator_hours <= 0 || min_delta_hours <= 0) {
      throw Error(errc::config, "temporal params must be positive");
    }
    if (numerator_hours > window_hours) {
      throw Error(errc::config, "numerator_hours must be <= window_hours");
    }
    if (min_delta_hours > numerator_hours) {
      throw Error(errc::config, "min_delta_hours must be <= numerator_hours");
    }
  }
};

// Decay weight for information aged |t_query - t_info|. Zero at and beyond
// the window edge, numerator/max(Δ, min_delta) inside it.
inline double temporal_weight(TimePoint t_query, TimePoint t_info,
                              const TemporalParams& params = {}) {
  const double delta = hours_between(t_query, t_info);
  if (delta >= params.window_hours) return 0.0;
  return params.numerator_hours / std::max(delta, params.min_delta_hours);
}

// Stamps every node and evidence item with its temporal weight. Failed
// nodes and nodes without an info_time get weight 0; items fall back to
// their node's weight when they carry no published_at of their own.
// Idempotent: weights are recomputed from timestamps, never compounded.
inline SearchGraph annotate_weights(SearchGraph graph, TimePoint t_query,
                                    const TemporalParams& params = {}) {
  params.check();
  for (const auto& [id, unused] : graph.nodes()) {
    auto& n = graph.node(id);
    double node_w = 0.0;
    if (n.status != NodeStatus::Failed && n.info_time) {
      node_w = temporal_weight(t_query, *n.info_time, params);
    }
    n.weight = node_w;
    if (n.response) {
      for (auto& item : *n.response) {
        item.weight = item.published_at
                          ? temporal_weight(t_query, *item.published_at, params)
                          : node_w;
      }
    }
  }
  return graph;
}

// Ablation baseline: temporal weighting disabled is equivalent to weight 1
// on every node and evidence item.
inline SearchGraph annotate_uniform_weights(SearchGraph graph) {
  for (const auto& [id, unused] : graph.nodes()) {
    auto& n = graph.node(id);
    n.weight = 1.0;
    if (n.response) {
      for (auto& item : *n.response) item.weight = 1.0;
    }
  }
  return graph;
}

}  // namespace finsearch
