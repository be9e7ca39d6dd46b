#pragma once

#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <utility>
#include <vector>

#include "gridmapf/grid_map.hpp"
#include "gridmapf/world.hpp"

namespace gridmapf {

struct TriangularDensity {
  double low = 0.0;
  double mode = 0.33;
  double high = 0.5;
};

struct SamplerConfig {
  /// (side length, relative weight); worlds are square.
  std::vector<std::pair<int, double>> size_choices = {{10, 2.0}, {40, 1.0}, {70, 1.0}};
  TriangularDensity density{};
  int team_size = 8;
  std::uint64_t seed = 0;
  /// Benchmark overrides: a fixed side length and obstacle density replace the
  /// weighted/triangular draws.
  std::optional<int> fixed_size;
  std::optional<double> fixed_density;
  /// Obstacle layouts tried before giving up.
  int max_obstacle_retries = 100;
};

/// Thrown when no valid layout is found within the retry budget.
class SamplingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct SampledEnvironment {
  GridWorld world;
  int size = 0;
  double density = 0.0;
};

/// Draws a world and team per the config. Every agent shares a connected
/// region with its goal; starts are pairwise distinct and goals are pairwise
/// distinct. Deterministic in `cfg.seed`.
SampledEnvironment sample_environment(const SamplerConfig& cfg);

/// Places `team` agents uniformly on distinct free cells, each with a goal
/// drawn from its start's connected region. Retries a few times and returns
/// nullopt if the map cannot host the team.
std::optional<GridWorld> place_agents(const GridMap& map, int team, std::mt19937_64& rng);

/// Lower-level draws, exposed so their distributions can be checked directly.
int draw_size(const SamplerConfig& cfg, std::mt19937_64& rng);
double draw_density(const TriangularDensity& tri, std::mt19937_64& rng);

/// Maximal 4-connected set of free cells containing `cell`, sorted
/// row-major. Throws std::invalid_argument if `cell` is blocked.
std::vector<Cell> connected_region(const GridMap& map, Cell cell);

/// Component label per cell (-1 for obstacles), labels dense from 0.
std::vector<int> label_regions(const GridMap& map);

}  // namespace gridmapf
