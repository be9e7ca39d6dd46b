#pragma once

#include <span>

#include "gridmapf/grid_map.hpp"
#include "gridmapf/plan.hpp"

namespace gridmapf {

struct OdrmstarOptions {
  /// Heuristic inflation; the returned cost is at most epsilon times optimal.
  double epsilon = 2.0;
  TransitionMode mode = TransitionMode::Standard;
  double timeout_seconds = 60.0;
};

/// Recursive M* with operator decomposition.
///
/// Agents follow individually optimal policies until they collide. Collisions
/// are pushed back along the search graph as collision sets; the agents of
/// each independent collision set are then moved together by a recursive
/// planner for just that subset. When a collision set covers every agent of
/// a (sub)planner, that planner expands the set jointly, assigning one agent
/// per intermediate node.
///
/// The objective is sum-of-costs. Each agent's local state carries a "done"
/// flag: an agent resting on its goal may commit to staying there at zero
/// cost, which makes the search cost equal to the sum of final arrival times.
SolveResult odrmstar_solve(const GridMap& map, std::span<const Cell> starts,
                           std::span<const Cell> goals, const OdrmstarOptions& options = {});

}  // namespace gridmapf
