#pragma once

#include <span>

#include "gridmapf/grid_map.hpp"
#include "gridmapf/plan.hpp"

namespace gridmapf {

struct CbsOptions {
  TransitionMode mode = TransitionMode::Standard;
  double timeout_seconds = 300.0;
  /// Once two agents have conflicted more than this many times over the whole
  /// search, their groups are merged into one meta-agent planned jointly.
  /// Negative disables merging (plain CBS).
  int merge_bound = 10;
  /// Merges that would produce a larger meta-agent are skipped.
  int max_group_size = 3;
  /// Merges are also skipped once (map cells)^(group size) exceeds this; joint
  /// searches on big maps cost more than the conflicts they save.
  double merge_state_limit = 1e5;
};

/// Optimal sum-of-costs planning with Conflict-Based Search. The high level
/// is best-first over constraint-tree nodes ordered by cost; each node splits
/// on its earliest conflict (lowest agent pair among equal times). In
/// Restricted mode entering a cell occupied at the previous timestep is a
/// conflict as well.
///
/// Meta-agent merging keeps the search optimal and lets it prove
/// unsolvability: once all agents of an infeasible subproblem are merged the
/// joint low level exhausts its finite state space.
SolveResult cbs_solve(const GridMap& map, std::span<const Cell> starts,
                      std::span<const Cell> goals, const CbsOptions& options = {});

}  // namespace gridmapf
