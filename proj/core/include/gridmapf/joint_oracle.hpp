#pragma once

#include <optional>
#include <span>

#include "gridmapf/grid_map.hpp"
#include "gridmapf/plan.hpp"

namespace gridmapf {

inline constexpr int kOracleMaxAgents = 3;
inline constexpr int kOracleMaxSide = 6;

/// Exhaustive uniform-cost search over the joint configuration space. Returns
/// an optimal sum-of-costs plan, or nullopt when the instance has no solution
/// at all. Exponential; meant as a ground truth in tests. Throws
/// std::invalid_argument beyond kOracleMaxAgents agents or a map side longer
/// than kOracleMaxSide.
std::optional<JointPlan> joint_oracle(const GridMap& map, std::span<const Cell> starts,
                                      std::span<const Cell> goals, TransitionMode mode);

}  // namespace gridmapf
