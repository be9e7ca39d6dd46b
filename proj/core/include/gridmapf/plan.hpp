#pragma once

#include <chrono>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gridmapf/grid_map.hpp"
#include "gridmapf/search.hpp"

namespace gridmapf {

/// How agents may move relative to each other within one timestep.
enum class TransitionMode {
  /// Vertex and swap conflicts are forbidden; following into a cell being
  /// vacated in the same step is allowed.
  Standard,
  /// Additionally no agent may enter a cell that any agent occupied at the
  /// start of the step. This matches GridWorld execution.
  Restricted,
};

std::string_view mode_name(TransitionMode mode);
/// Accepts "standard" or "restricted"; throws std::invalid_argument otherwise.
TransitionMode parse_mode(std::string_view name);

/// Collision-free paths, padded to a common length.
struct JointPlan {
  std::vector<Path> paths;
  int cost = 0;      // sum over agents of final goal-arrival times
  int makespan = 0;  // latest final goal-arrival time

  int num_agents() const { return static_cast<int>(paths.size()); }
};

/// Time at which `path` reaches `goal` and stays there for good, or nullopt if
/// it does not end on the goal.
std::optional<int> arrival_time(const Path& path, Cell goal);

/// Pads every path to makespan + 1 positions and fills in cost and makespan.
/// Paths that do not end on their goal contribute their full length.
JointPlan make_joint_plan(std::vector<Path> paths, std::span<const Cell> goals);

enum class SolveStatus { Solved, Unsolvable, Timeout };

std::string_view status_name(SolveStatus status);

struct SolveStats {
  long long expansions = 0;
  long long generated = 0;
  double wall_seconds = 0.0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::Unsolvable;
  std::optional<JointPlan> plan;
  SolveStats stats;

  bool solved() const { return status == SolveStatus::Solved; }
};

/// Wall-clock budget shared by a solve call and everything it spawns.
class Deadline {
 public:
  using Clock = std::chrono::steady_clock;

  /// A non-positive or infinite budget never expires.
  explicit Deadline(double seconds);
  bool expired() const { return limited_ && Clock::now() >= end_; }

 private:
  bool limited_ = false;
  Clock::time_point end_{};
};

/// Thrown internally by solvers when the deadline passes; solve entry points
/// translate it into SolveStatus::Timeout.
struct TimeoutReached {};

enum class ViolationKind {
  AgentCount,
  WrongStart,
  OffMap,
  Obstacle,
  Jump,
  VertexConflict,
  EdgeConflict,
  FollowConflict,
  NotAtGoal,
  LengthMismatch,
  CostMismatch,
};

struct Violation {
  ViolationKind kind;
  int agent = -1;
  int other = -1;
  int time = -1;
  std::string message;
};

std::string_view violation_name(ViolationKind kind);

/// Every way `plan` fails to be a valid solution for the given starts/goals
/// under `mode`. An empty result means the plan is valid.
std::vector<Violation> validate_plan(const GridMap& map, std::span<const Cell> starts,
                                     std::span<const Cell> goals, const JointPlan& plan,
                                     TransitionMode mode);

}  // namespace gridmapf
