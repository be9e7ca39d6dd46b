#include "gridmapf/world.hpp"

#include <algorithm>
#include <numeric>
#include <stdexcept>
#include <string>

#include "gridmapf/search.hpp"

namespace gridmapf {

GridWorld::GridWorld(GridMap map, std::span<const Cell> starts, std::span<const Cell> goals)
    : map_(std::move(map)), occupancy_(map_.num_cells(), -1) {
  if (starts.size() != goals.size()) {
    throw std::invalid_argument("starts and goals differ in length");
  }
  agents_.reserve(starts.size());
  for (std::size_t i = 0; i < starts.size(); ++i) {
    const int id = static_cast<int>(i);
    if (map_.blocked(starts[i])) {
      throw std::invalid_argument("agent " + std::to_string(id) + " starts on a blocked cell " +
                                  to_string(starts[i]));
    }
    if (map_.blocked(goals[i])) {
      throw std::invalid_argument("agent " + std::to_string(id) + " has its goal on a blocked cell " +
                                  to_string(goals[i]));
    }
    int& slot = occupancy_[map_.index(starts[i])];
    if (slot != -1) {
      throw std::invalid_argument("agents " + std::to_string(slot) + " and " + std::to_string(id) +
                                  " share start cell " + to_string(starts[i]));
    }
    slot = id;
    agents_.push_back({id, starts[i], goals[i], std::nullopt});
  }
}

const AgentState& GridWorld::agent(int id) const {
  if (id < 0 || id >= num_agents()) {
    throw std::out_of_range("unknown agent id " + std::to_string(id));
  }
  return agents_[id];
}

bool GridWorld::all_on_goal() const {
  return std::all_of(agents_.begin(), agents_.end(), [](const AgentState& a) { return a.on_goal(); });
}

std::vector<Cell> GridWorld::positions() const {
  std::vector<Cell> out;
  out.reserve(agents_.size());
  for (const AgentState& a : agents_) out.push_back(a.position);
  return out;
}

std::vector<Cell> GridWorld::goals() const {
  std::vector<Cell> out;
  out.reserve(agents_.size());
  for (const AgentState& a : agents_) out.push_back(a.goal);
  return out;
}

ActionMask valid_actions(const GridWorld& world, int agent_id, bool training_mode) {
  const AgentState& agent = world.agent(agent_id);
  ActionMask mask{};
  mask[to_index(Action::Stay)] = true;
  for (Action a : kAllActions) {
    if (a == Action::Stay) continue;
    const Cell target = apply(agent.position, a);
    bool ok = world.map().passable(target) && world.occupant(target) == -1;
    if (ok && training_mode && agent.previous_position && *agent.previous_position == target) {
      ok = false;
    }
    mask[to_index(a)] = ok;
  }
  return mask;
}

namespace {

// Caches each victim's A* length with every other agent present.
class BlockingOracle {
 public:
  BlockingOracle(const GridWorld& world, int threshold)
      : world_(world), threshold_(threshold), mask_(world.map().num_cells(), 0),
        with_all_(world.num_agents(), kUnset) {
    for (const AgentState& a : world.agents()) mask_[world.map().index(a.position)] = 1;
  }

  bool blocking(int blocker, int victim) {
    const AgentState& v = world_.agent(victim);
    const AgentState& b = world_.agent(blocker);
    if (v.on_goal()) return false;
    const int with_blocker = length_with_all(victim);
    // Removing the blocker can never beat the Manhattan distance.
    if (with_blocker != kUnreachable &&
        with_blocker - manhattan(v.position, v.goal) <= threshold_) {
      return false;
    }
    const int b_index = world_.map().index(b.position);
    mask_[b_index] = 0;
    const int without = search(victim);
    mask_[b_index] = 1;
    if (without == kUnreachable) return false;
    if (with_blocker == kUnreachable) return true;
    return with_blocker - without > threshold_;
  }

 private:
  static constexpr int kUnset = -1;

  int length_with_all(int victim) {
    if (with_all_[victim] == kUnset) with_all_[victim] = search(victim);
    return with_all_[victim];
  }

  int search(int victim) {
    const AgentState& v = world_.agent(victim);
    const int self = world_.map().index(v.position);
    mask_[self] = 0;
    auto path = astar_masked(world_.map(), v.position, v.goal, mask_);
    mask_[self] = 1;
    return path ? path->length() : kUnreachable;
  }

  const GridWorld& world_;
  int threshold_;
  std::vector<std::uint8_t> mask_;
  std::vector<int> with_all_;
};

}  // namespace

bool is_blocking(const GridWorld& world, int blocker_id, int victim_id, int delay_threshold) {
  world.agent(blocker_id);
  world.agent(victim_id);
  if (blocker_id == victim_id) return false;
  BlockingOracle oracle(world, delay_threshold);
  return oracle.blocking(blocker_id, victim_id);
}

std::vector<bool> blocking_flags(const GridWorld& world, int delay_threshold) {
  std::vector<bool> flags(world.num_agents(), false);
  BlockingOracle oracle(world, delay_threshold);
  for (const AgentState& b : world.agents()) {
    if (!b.on_goal()) continue;
    for (const AgentState& v : world.agents()) {
      if (v.id != b.id && oracle.blocking(b.id, v.id)) {
        flags[b.id] = true;
        break;
      }
    }
  }
  return flags;
}

class WorldStepper {
 public:
  static StepOutcome run(GridWorld& world, std::span<const Action> actions,
                         std::span<const int> order, const StepOptions& options) {
    const int n = world.num_agents();
    if (static_cast<int>(actions.size()) != n) {
      throw std::invalid_argument("expected " + std::to_string(n) + " actions, got " +
                                  std::to_string(actions.size()));
    }
    if (static_cast<int>(order.size()) != n) {
      throw std::invalid_argument("execution order must list every agent exactly once");
    }
    std::vector<std::uint8_t> seen(n, 0);
    for (int id : order) {
      if (id < 0 || id >= n || seen[id]) {
        throw std::invalid_argument("execution order must be a permutation of agent ids");
      }
      seen[id] = 1;
    }

    const GridMap& map = world.map_;
    StepOutcome outcome;
    outcome.agents.resize(n);
    std::vector<std::uint8_t> claimed(map.num_cells(), 0);
    std::vector<Cell> next(n);

    for (int id : order) {
      const AgentState& agent = world.agents_[id];
      AgentOutcome& out = outcome.agents[id];
      out.requested = actions[id];
      next[id] = agent.position;
      if (actions[id] == Action::Stay) continue;

      const Cell target = apply(agent.position, actions[id]);
      bool ok = map.passable(target) && world.occupancy_[map.index(target)] == -1 &&
                !claimed[map.index(target)];
      if (ok && options.training_mode && agent.previous_position &&
          *agent.previous_position == target) {
        ok = false;
      }
      if (ok) {
        claimed[map.index(target)] = 1;
        next[id] = target;
        out.executed = actions[id];
      } else {
        out.collided = true;
      }
    }

    for (int id = 0; id < n; ++id) {
      AgentState& agent = world.agents_[id];
      world.occupancy_[map.index(agent.position)] = -1;
    }
    for (int id = 0; id < n; ++id) {
      AgentState& agent = world.agents_[id];
      agent.previous_position = agent.position;
      agent.position = next[id];
      world.occupancy_[map.index(agent.position)] = id;
    }
    ++world.timestep_;

    const RewardConfig& rewards = options.rewards;
    std::optional<BlockingOracle> oracle;
    for (int id = 0; id < n; ++id) {
      AgentOutcome& out = outcome.agents[id];
      const AgentState& agent = world.agents_[id];
      if (out.collided) {
        out.reward = rewards.collision;
      } else if (out.executed != Action::Stay) {
        out.reward = rewards.move;
      } else if (!agent.on_goal()) {
        out.reward = rewards.stay_off_goal;
      } else {
        if (options.evaluate_blocking) {
          if (!oracle) oracle.emplace(world, rewards.blocking_delay_threshold);
          for (int victim = 0; victim < n && !out.blocking; ++victim) {
            if (victim != id && oracle->blocking(id, victim)) out.blocking = true;
          }
        }
        out.reward = out.blocking ? rewards.blocking : rewards.stay_on_goal;
      }
    }

    if (world.all_on_goal()) {
      outcome.episode_done = true;
      for (AgentOutcome& out : outcome.agents) out.reward += rewards.finish;
    }
    return outcome;
  }
};

StepOutcome step_in_order(GridWorld& world, std::span<const Action> actions,
                          std::span<const int> order, const StepOptions& options) {
  return WorldStepper::run(world, actions, order, options);
}

StepOutcome step(GridWorld& world, std::span<const Action> actions, std::mt19937_64& rng,
                 const StepOptions& options) {
  std::vector<int> order(world.num_agents());
  std::iota(order.begin(), order.end(), 0);
  std::shuffle(order.begin(), order.end(), rng);
  return WorldStepper::run(world, actions, order, options);
}

}  // namespace gridmapf
