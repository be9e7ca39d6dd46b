#pragma once

#include <limits>
#include <optional>
#include <span>
#include <unordered_map>
#include <unordered_set>
#include <vector>

#include "gridmapf/grid_map.hpp"
#include "gridmapf/types.hpp"

namespace gridmapf {

/// One position per timestep, starting at t = 0.
struct Path {
  std::vector<Cell> positions;

  /// Number of steps (positions - 1); 0 for the trivial path.
  int length() const { return positions.empty() ? 0 : static_cast<int>(positions.size()) - 1; }
  /// Position at time t; paths rest at their last cell forever.
  Cell at(int t) const {
    return t < static_cast<int>(positions.size()) ? positions[t] : positions.back();
  }
  friend bool operator==(const Path&, const Path&) = default;
};

inline constexpr int kUnreachable = std::numeric_limits<int>::max();

/// Per-cell shortest-path distance to a fixed target on the static map.
/// Built by a backward breadth-first search; unreachable cells hold
/// kUnreachable.
class DistanceMap {
 public:
  DistanceMap() = default;
  DistanceMap(const GridMap& map, Cell target);

  int at(Cell c) const { return dist_[c.row * width_ + c.col]; }
  Cell target() const { return target_; }

 private:
  int width_ = 0;
  Cell target_{};
  std::vector<int> dist_;
};

/// Shortest 4-connected path from start to goal avoiding obstacles and
/// `extra_obstacles`, or nullopt when none exists. Manhattan heuristic; ties
/// go to the lexicographically smaller (row, col) cell. Throws
/// std::invalid_argument if start or goal is out of bounds or an obstacle.
std::optional<Path> astar(const GridMap& map, Cell start, Cell goal,
                          std::span<const Cell> extra_obstacles = {});

/// Same as astar, with obstacles supplied as a per-cell mask (index as
/// GridMap::index). Used on hot paths that reuse the mask across calls.
std::optional<Path> astar_masked(const GridMap& map, Cell start, Cell goal,
                                 std::span<const std::uint8_t> blocked_mask);

enum class ConstraintKind { Vertex, Edge };

/// Vertex: `agent` may not be at `cell` at time `time`.
/// Edge: `agent` may not move from `from` to `cell` between `time` and
/// `time + 1`.
struct Constraint {
  int agent = 0;
  ConstraintKind kind = ConstraintKind::Vertex;
  Cell cell{};
  Cell from{};
  int time = 0;

  static Constraint vertex(int agent, Cell c, int t) { return {agent, ConstraintKind::Vertex, c, {}, t}; }
  static Constraint edge(int agent, Cell from, Cell to, int t) {
    return {agent, ConstraintKind::Edge, to, from, t};
  }
  friend bool operator==(const Constraint&, const Constraint&) = default;
};

/// Where other agents are, used only to break ties between equally short
/// paths in favour of fewer conflicts with them. Paths rest at their last
/// cell forever.
class ConflictTable {
 public:
  /// With `count_follow`, entering a cell another agent held one step
  /// earlier counts as well.
  ConflictTable(const GridMap& map, std::span<const Path> others, bool count_follow);

  /// Conflicts incurred by moving from cell index `from` at time t to `to` at
  /// t + 1.
  int count(int from, int to, int t) const;
  /// Counts no longer depend on t beyond this time.
  int horizon() const { return horizon_; }

 private:
  int occupied(int cell, int t) const;

  int width_;
  bool count_follow_;
  int horizon_ = 0;
  std::unordered_map<long long, int> visits_;
  std::unordered_set<long long> moves_;
  std::vector<int> rest_from_;
};

/// Minimum-arrival-time path that respects every constraint whose agent
/// matches `agent`. Arrival is the first time after which the path can rest on
/// the goal forever; the returned path ends at that time. Returns nullopt when
/// no such path of at most `horizon` steps exists. `heuristic`, if given,
/// must be a DistanceMap targeting `goal`. `avoid` only reorders ties.
std::optional<Path> space_time_astar(const GridMap& map, int agent, Cell start, Cell goal,
                                     std::span<const Constraint> constraints, int horizon,
                                     const DistanceMap* heuristic = nullptr,
                                     const ConflictTable* avoid = nullptr);

/// Horizon that can never cut off a feasible constrained path: the latest
/// constraint time plus the number of cells.
int lossless_horizon(const GridMap& map, std::span<const Constraint> constraints);

}  // namespace gridmapf
