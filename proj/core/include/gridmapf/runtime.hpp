#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridmapf/losses.hpp"
#include "gridmapf/observation.hpp"
#include "gridmapf/plan.hpp"
#include "gridmapf/transport.hpp"
#include "gridmapf/world.hpp"

namespace gridmapf {

/// A policy's answer for one agent: an action, a distribution to sample
/// from, or a fault (malformed output) that the runtime turns into Stay.
struct Decision {
  std::optional<Action> action;
  std::optional<ActionDistribution> distribution;
  std::string fault;

  static Decision act(Action a) { return {a, std::nullopt, {}}; }
  static Decision sample(const ActionDistribution& p) { return {std::nullopt, p, {}}; }
  static Decision faulted(std::string why) { return {std::nullopt, std::nullopt, std::move(why)}; }
};

struct EpisodeInfo {
  int episode = 0;
  int num_agents = 0;
  int fov = 0;
};

/// Everything a policy may look at during one joint step. The world is a
/// frozen snapshot; built-in policies read only the static map and what the
/// agent's own window shows.
struct StepView {
  const GridWorld& world;
  std::span<const Observation> observations;  // by agent id
  int t = 0;
  int episode = 0;
};

/// Thrown by a policy when the episode cannot go on (e.g. its process died).
class EpisodeAborted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class Policy {
 public:
  virtual ~Policy() = default;
  virtual void begin_episode(const EpisodeInfo&) {}
  /// Fills out[k] with the decision for agents[k].
  virtual void decide(const StepView& view, std::span<const int> agents,
                      std::span<Decision> out) = 0;
  virtual void end_episode(bool /*success*/) {}
  /// Mask-compliant policies have sampled distributions restricted to the
  /// valid actions; others get invalid choices replaced by Stay.
  virtual bool mask_compliant() const { return false; }
};

/// Replans A* every step treating agents visible in its window as obstacles
/// and takes the first step; Stay when no path exists.
std::unique_ptr<Policy> greedy_policy();
std::unique_ptr<Policy> stay_policy();
/// actions[agent][t]; Stay once a sequence runs out.
std::unique_ptr<Policy> scripted_policy(std::vector<std::vector<Action>> actions);
std::unique_ptr<Policy> plan_policy(const JointPlan& plan);

struct ExternalOptions {
  /// Wall-clock budget for all answers of one joint step.
  double step_deadline_seconds = 1.0;
};

/// Bridges to a process speaking the wire protocol (one JSON object per
/// line): reset at episode start, one obs request per agent and step, act
/// responses, end at termination.
std::unique_ptr<Policy> external_policy(std::unique_ptr<Transport> transport,
                                        const ExternalOptions& options = {});

/// 256 steps up to side 40, 384 up to side 80, 512 beyond.
int default_step_cap(const GridMap& map);

struct RuntimeOptions {
  FovConfig fov{};
  int step_cap = 0;  // 0 picks default_step_cap()
  std::uint64_t seed = 0;
  int episode = 0;
  /// Observations (and masks) include the training-only no-backtrack rule.
  bool training_observations = false;
  bool record_trace = false;
  RewardConfig rewards{};
};

struct EpisodeResult {
  bool success = false;
  int steps_used = 0;
  /// Time of final goal arrival, -1 for agents not on their goal at the end.
  std::vector<int> path_lengths;
  int collisions = 0;
  std::vector<double> rewards;
  int faults = 0;
  int invalid_actions = 0;
  bool aborted = false;
  std::string error;
  std::vector<std::string> fault_messages;  // first few only
  /// With record_trace: positions at t = 0..steps_used and every outcome.
  std::vector<std::vector<Cell>> positions;
  std::vector<StepOutcome> trace;
};

/// One shared policy drives every agent.
EpisodeResult run_episode(GridWorld world, Policy& policy, const RuntimeOptions& options = {});
/// policies[i] drives agent i.
EpisodeResult run_episode(GridWorld world, std::span<Policy* const> policies,
                          const RuntimeOptions& options = {});

}  // namespace gridmapf
