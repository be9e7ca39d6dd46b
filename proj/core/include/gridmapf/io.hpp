#pragma once

#include <filesystem>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "gridmapf/grid_map.hpp"
#include "gridmapf/plan.hpp"
#include "gridmapf/world.hpp"

namespace gridmapf {

/// Malformed or unreadable input files.
class FormatError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A map plus agent starts and goals, as stored in scenario files.
struct Scenario {
  GridMap map;
  std::vector<Cell> starts;
  std::vector<Cell> goals;
  std::optional<std::uint64_t> seed;
  std::optional<double> density;

  GridWorld world() const { return GridWorld(map, starts, goals); }
  friend bool operator==(const Scenario&, const Scenario&) = default;
};

Scenario scenario_from_world(const GridWorld& world);

std::string map_to_text(const GridMap& map);
GridMap parse_map_text(const std::string& text);

std::string scenario_to_json(const Scenario& scenario);
Scenario parse_scenario_json(const std::string& text);

/// A solver result as written by the solve command.
struct PlanFile {
  JointPlan plan;
  std::string algorithm;
  TransitionMode mode = TransitionMode::Standard;
  double wall_seconds = 0.0;
};

std::string plan_to_json(const PlanFile& plan);
PlanFile parse_plan_json(const std::string& text);

/// Text picture of one timestep: '@' obstacles, agents as A-Z then a-z then
/// 0-9 (cycling), and '+' on goals not covered by any agent.
std::string render_frame(const GridMap& map, std::span<const Cell> positions,
                         std::span<const Cell> goals);
char agent_symbol(int agent);

/// Whole-file helpers; throw FormatError when the file cannot be opened.
std::string read_file(const std::filesystem::path& path);
void write_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace gridmapf
