#pragma once

#include <optional>
#include <random>
#include <span>
#include <vector>

#include "gridmapf/grid_map.hpp"
#include "gridmapf/types.hpp"

namespace gridmapf {

struct AgentState {
  int id = 0;
  Cell position{};
  Cell goal{};
  std::optional<Cell> previous_position;  // empty only at timestep 0

  bool on_goal() const { return position == goal; }
};

/// Per-step rewards and the blocking delay threshold.
struct RewardConfig {
  double move = -0.3;
  double stay_off_goal = -0.5;
  double stay_on_goal = 0.0;
  double collision = -2.0;
  double blocking = -2.0;
  double finish = 20.0;
  int blocking_delay_threshold = 10;
};

/// Static map plus the dynamic agent state of one episode. Agent ids are
/// their indices in agents().
class GridWorld {
 public:
  GridWorld() = default;
  /// Throws std::invalid_argument if an agent starts or has its goal on an
  /// obstacle or outside the map, or if two agents share a start cell.
  GridWorld(GridMap map, std::span<const Cell> starts, std::span<const Cell> goals);

  const GridMap& map() const { return map_; }
  int num_agents() const { return static_cast<int>(agents_.size()); }
  const std::vector<AgentState>& agents() const { return agents_; }
  /// Throws std::out_of_range for unknown ids.
  const AgentState& agent(int id) const;
  int timestep() const { return timestep_; }

  /// Id of the agent at c, or -1.
  int occupant(Cell c) const { return map_.in_bounds(c) ? occupancy_[map_.index(c)] : -1; }
  bool all_on_goal() const;

  std::vector<Cell> positions() const;
  std::vector<Cell> goals() const;

 private:
  friend class WorldStepper;

  GridMap map_;
  std::vector<AgentState> agents_;
  std::vector<int> occupancy_;
  int timestep_ = 0;
};

struct AgentOutcome {
  Action requested = Action::Stay;
  Action executed = Action::Stay;
  double reward = 0.0;
  bool collided = false;
  bool blocking = false;
};

struct StepOutcome {
  std::vector<AgentOutcome> agents;
  bool episode_done = false;
};

struct StepOptions {
  /// Also treats a move back onto the previous position as invalid.
  bool training_mode = false;
  /// Evaluate the blocking penalty for agents resting on their goal. Turning
  /// this off only changes rewards and the blocking flags.
  bool evaluate_blocking = true;
  RewardConfig rewards{};
};

/// Actions whose target is in bounds, free of obstacles and not occupied by
/// any agent at the start of the current timestep. Stay is always valid. In
/// training mode the move back to previous_position is excluded.
ActionMask valid_actions(const GridWorld& world, int agent_id, bool training_mode);

/// Executes one joint action with agents acting in a uniformly random order
/// drawn from `rng`. `actions` is indexed by agent id and must hold exactly
/// one action per agent (std::invalid_argument otherwise).
StepOutcome step(GridWorld& world, std::span<const Action> actions, std::mt19937_64& rng,
                 const StepOptions& options = {});

/// Same as step() with an explicit execution order (a permutation of ids).
StepOutcome step_in_order(GridWorld& world, std::span<const Action> actions,
                          std::span<const int> order, const StepOptions& options = {});

/// True if `blocker`, resting where it is, makes `victim`'s goal unreachable
/// or delays it by more than `delay_threshold` steps. Other agents are static
/// obstacles in both A* queries.
bool is_blocking(const GridWorld& world, int blocker_id, int victim_id,
                 int delay_threshold = RewardConfig{}.blocking_delay_threshold);

/// For each agent: on its goal and blocking at least one other agent.
std::vector<bool> blocking_flags(const GridWorld& world,
                                 int delay_threshold = RewardConfig{}.blocking_delay_threshold);

}  // namespace gridmapf
