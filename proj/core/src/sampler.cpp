#include "gridmapf/sampler.hpp"

#include <algorithm>
#include <deque>
#include <stdexcept>
#include <string>

namespace gridmapf {

namespace {

constexpr int kPlacementAttempts = 10;

void validate(const SamplerConfig& cfg) {
  if (cfg.team_size < 1) throw std::invalid_argument("team_size must be at least 1");
  if (!cfg.fixed_size) {
    if (cfg.size_choices.empty()) throw std::invalid_argument("size_choices is empty");
    for (const auto& [size, weight] : cfg.size_choices) {
      if (size < 1 || !(weight > 0.0)) {
        throw std::invalid_argument("size choices need positive sizes and weights");
      }
    }
  } else if (*cfg.fixed_size < 1) {
    throw std::invalid_argument("fixed_size must be positive");
  }
  const auto& tri = cfg.density;
  if (!(tri.low <= tri.mode && tri.mode <= tri.high)) {
    throw std::invalid_argument("triangular density needs low <= mode <= high");
  }
  if (cfg.fixed_density && (*cfg.fixed_density < 0.0 || *cfg.fixed_density >= 1.0)) {
    throw std::invalid_argument("fixed_density must lie in [0, 1)");
  }
}

}  // namespace

std::optional<GridWorld> place_agents(const GridMap& map, int team, std::mt19937_64& rng) {
  const std::vector<int> labels = label_regions(map);
  const int num_regions = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
  std::vector<std::vector<int>> region_cells(num_regions);
  std::vector<int> free_cells;
  for (int i = 0; i < map.num_cells(); ++i) {
    if (labels[i] < 0) continue;
    free_cells.push_back(i);
    region_cells[labels[i]].push_back(i);
  }
  if (static_cast<int>(free_cells.size()) < team) return std::nullopt;

  for (int attempt = 0; attempt < kPlacementAttempts; ++attempt) {
    std::vector<int> starts;
    std::sample(free_cells.begin(), free_cells.end(), std::back_inserter(starts), team, rng);
    std::shuffle(starts.begin(), starts.end(), rng);

    std::vector<std::uint8_t> goal_taken(map.num_cells(), 0);
    std::vector<int> goals;
    bool ok = true;
    for (int s : starts) {
      std::vector<int> options;
      for (int c : region_cells[labels[s]]) {
        if (c != s && !goal_taken[c]) options.push_back(c);
      }
      if (options.empty()) {
        ok = false;
        break;
      }
      std::uniform_int_distribution<std::size_t> pick(0, options.size() - 1);
      const int g = options[pick(rng)];
      goal_taken[g] = 1;
      goals.push_back(g);
    }
    if (!ok) continue;

    std::vector<Cell> start_cells, goal_cells;
    for (int i = 0; i < team; ++i) {
      start_cells.push_back(map.cell(starts[i]));
      goal_cells.push_back(map.cell(goals[i]));
    }
    return GridWorld(map, start_cells, goal_cells);
  }
  return std::nullopt;
}

int draw_size(const SamplerConfig& cfg, std::mt19937_64& rng) {
  if (cfg.fixed_size) return *cfg.fixed_size;
  std::vector<double> weights;
  for (const auto& choice : cfg.size_choices) weights.push_back(choice.second);
  std::discrete_distribution<std::size_t> dist(weights.begin(), weights.end());
  return cfg.size_choices[dist(rng)].first;
}

double draw_density(const TriangularDensity& tri, std::mt19937_64& rng) {
  if (tri.low == tri.high) return tri.low;
  if (tri.mode == tri.low || tri.mode == tri.high) {
    // Peak on an endpoint: a single linear ramp.
    const std::array<double, 2> knots = {tri.low, tri.high};
    const std::array<double, 2> pdf = {tri.mode == tri.low ? 1.0 : 0.0,
                                       tri.mode == tri.high ? 1.0 : 0.0};
    std::piecewise_linear_distribution<double> ramp(knots.begin(), knots.end(), pdf.begin());
    return ramp(rng);
  }
  const std::array<double, 3> knots = {tri.low, tri.mode, tri.high};
  const std::array<double, 3> pdf = {0.0, 1.0, 0.0};
  std::piecewise_linear_distribution<double> dist(knots.begin(), knots.end(), pdf.begin());
  return dist(rng);
}

SampledEnvironment sample_environment(const SamplerConfig& cfg) {
  validate(cfg);
  std::mt19937_64 rng(cfg.seed);
  for (int attempt = 0; attempt <= cfg.max_obstacle_retries; ++attempt) {
    const int size = draw_size(cfg, rng);
    const double density = cfg.fixed_density ? *cfg.fixed_density : draw_density(cfg.density, rng);
    GridMap map(size, size);
    std::bernoulli_distribution obstacle(density);
    for (int r = 0; r < size; ++r) {
      for (int c = 0; c < size; ++c) {
        if (obstacle(rng)) map.set_obstacle({r, c}, true);
      }
    }
    if (auto world = place_agents(map, cfg.team_size, rng)) {
      return {std::move(*world), size, density};
    }
  }
  throw SamplingError("could not place " + std::to_string(cfg.team_size) + " agents after " +
                      std::to_string(cfg.max_obstacle_retries) + " obstacle regenerations");
}

std::vector<int> label_regions(const GridMap& map) {
  std::vector<int> labels(map.num_cells(), -1);
  int next = 0;
  std::deque<int> frontier;
  for (int i = 0; i < map.num_cells(); ++i) {
    if (labels[i] != -1 || map.blocked(map.cell(i))) continue;
    labels[i] = next;
    frontier.push_back(i);
    while (!frontier.empty()) {
      const Cell c = map.cell(frontier.front());
      frontier.pop_front();
      for (Action a : {Action::North, Action::East, Action::South, Action::West}) {
        const Cell n = apply(c, a);
        if (map.blocked(n) || labels[map.index(n)] != -1) continue;
        labels[map.index(n)] = next;
        frontier.push_back(map.index(n));
      }
    }
    ++next;
  }
  return labels;
}

std::vector<Cell> connected_region(const GridMap& map, Cell cell) {
  if (map.blocked(cell)) {
    throw std::invalid_argument("connected_region: " + to_string(cell) + " is not a free cell");
  }
  std::vector<std::uint8_t> seen(map.num_cells(), 0);
  std::deque<Cell> frontier{cell};
  seen[map.index(cell)] = 1;
  std::vector<Cell> region;
  while (!frontier.empty()) {
    const Cell c = frontier.front();
    frontier.pop_front();
    region.push_back(c);
    for (Action a : {Action::North, Action::East, Action::South, Action::West}) {
      const Cell n = apply(c, a);
      if (map.blocked(n) || seen[map.index(n)]) continue;
      seen[map.index(n)] = 1;
      frontier.push_back(n);
    }
  }
  std::sort(region.begin(), region.end());
  return region;
}

}  // namespace gridmapf
