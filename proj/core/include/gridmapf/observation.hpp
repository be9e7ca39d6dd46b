#pragma once

#include <array>
#include <optional>
#include <span>
#include <vector>

#include "gridmapf/types.hpp"
#include "gridmapf/world.hpp"

namespace gridmapf {

struct FovConfig {
  int fov = 10;
  /// Caps goal_magnitude when set; benchmark runs on large worlds use 75.
  std::optional<double> distance_cap;
};

/// Channel order inside Observation::channels and the flattened layout.
enum class Channel : int { Obstacles = 0, Agents = 1, AgentGoals = 2, OwnGoal = 3 };
inline constexpr int kNumChannels = 4;

/// One agent's partial view. Channels are fov x fov binary grids stored
/// row-major; the observing agent sits at window index (center, center).
struct Observation {
  int fov = 0;
  std::array<std::vector<std::uint8_t>, kNumChannels> channels;
  std::array<double, 2> goal_vector{};  // (d_row, d_col) / |d|, or (0, 0) on goal
  double goal_magnitude = 0.0;
  ActionMask valid_action_mask{};

  std::uint8_t at(Channel ch, int row, int col) const {
    return channels[static_cast<int>(ch)][row * fov + col];
  }
  friend bool operator==(const Observation&, const Observation&) = default;
};

/// Window index of the observing agent for a given fov.
constexpr int fov_center(int fov) { return (fov - 1) / 2; }

/// Length of the flattened encoding: 4 * fov^2 + 2 + 1 + 5.
constexpr int flat_size(int fov) { return kNumChannels * fov * fov + 2 + 1 + kNumActions; }

/// Builds the observation of `agent_id`. Out-of-bounds window cells read as
/// obstacles. Other agents' goals outside the window are clamped onto its
/// border; the agent's own goal appears only when inside the window.
Observation observe(const GridWorld& world, int agent_id, const FovConfig& cfg,
                    bool training_mode);

/// Channels row-major in declared order, then goal_vector, goal_magnitude and
/// the valid-action mask (as 0/1).
std::vector<double> flatten(const Observation& obs);

/// Inverse of flatten(). Throws std::invalid_argument if the length does not
/// match flat_size(fov) or a channel/mask entry is not 0 or 1.
Observation parse_observation(std::span<const double> flat, int fov);

}  // namespace gridmapf
