#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridmapf/observation.hpp"
#include "gridmapf/plan.hpp"
#include "gridmapf/world.hpp"

namespace gridmapf {

struct DemoRecord {
  Observation observation;
  Action expert_action = Action::Stay;
  bool blocking = false;
  Cell position{};

  friend bool operator==(const DemoRecord&, const DemoRecord&) = default;
};

struct DemoMeta {
  int episode = 0;
  std::uint64_t seed = 0;
  double epsilon = 2.0;
  int size = 0;
  double density = 0.0;
  int cost = 0;
  /// Always false: recorded masks never exclude the move back to the
  /// previous cell, since expert plans may need it.
  bool backtrack_masked = false;

  friend bool operator==(const DemoMeta&, const DemoMeta&) = default;
};

/// Expert trajectory of one world. Every agent has makespan + 1 records; the
/// last one observes the solved state and carries Stay.
struct DemoTrajectory {
  DemoMeta meta;
  GridMap map;
  std::vector<Cell> starts;
  std::vector<Cell> goals;
  std::vector<std::vector<DemoRecord>> agents;

  int team() const { return static_cast<int>(agents.size()); }
  int length() const { return agents.empty() ? 0 : static_cast<int>(agents.front().size()); }
  std::vector<std::vector<Action>> expert_actions() const;

  friend bool operator==(const DemoTrajectory&, const DemoTrajectory&) = default;
};

struct DemoOptions {
  FovConfig fov{};
  double epsilon = 2.0;
  double timeout_seconds = 60.0;
};

struct DemoResult {
  SolveStatus status = SolveStatus::Unsolvable;
  std::optional<DemoTrajectory> demo;
};

/// Raised when a Restricted plan fails to replay in the world. That would be
/// a planner bug, never an input problem.
class DemoReplayError : public std::logic_error {
 public:
  using std::logic_error::logic_error;
};

/// Solves `world` with Restricted ODrM* and records every agent's
/// observation, plan action and blocking flag while stepping the world along
/// the plan in agent-id order.
DemoResult generate_demo(const GridWorld& world, const DemoOptions& options = {});

/// JSON lines: per trajectory one meta line followed by one line per record
/// ({episode, agent, t, obs, action, blocking, pos}).
void write_demos(std::span<const DemoTrajectory> demos, std::ostream& out);
void write_demos(std::span<const DemoTrajectory> demos, const std::filesystem::path& path);

class DemoParseError : public std::runtime_error {
 public:
  DemoParseError(int line, const std::string& what);
  int line() const { return line_; }

 private:
  int line_;
};

std::vector<DemoTrajectory> read_demos(std::istream& in);
std::vector<DemoTrajectory> read_demos(const std::filesystem::path& path);

}  // namespace gridmapf
