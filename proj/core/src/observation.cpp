#include "gridmapf/observation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace gridmapf {

Observation observe(const GridWorld& world, int agent_id, const FovConfig& cfg,
                    bool training_mode) {
  const AgentState& self = world.agent(agent_id);
  if (cfg.fov < 3) throw std::invalid_argument("fov must be at least 3");

  const int fov = cfg.fov;
  const int center = fov_center(fov);
  const int top = self.position.row - center;
  const int left = self.position.col - center;
  const GridMap& map = world.map();

  Observation obs;
  obs.fov = fov;
  for (auto& ch : obs.channels) ch.assign(static_cast<std::size_t>(fov) * fov, 0);
  auto set = [&](Channel ch, int r, int c) { obs.channels[static_cast<int>(ch)][r * fov + c] = 1; };
  auto inside = [&](Cell world_cell) {
    const int r = world_cell.row - top;
    const int c = world_cell.col - left;
    return r >= 0 && r < fov && c >= 0 && c < fov;
  };

  for (int r = 0; r < fov; ++r) {
    for (int c = 0; c < fov; ++c) {
      const Cell wc{top + r, left + c};
      if (map.blocked(wc)) set(Channel::Obstacles, r, c);
      const int other = world.occupant(wc);
      if (other != -1 && other != agent_id) {
        set(Channel::Agents, r, c);
        const Cell g = world.agent(other).goal;
        set(Channel::AgentGoals, std::clamp(g.row - top, 0, fov - 1),
            std::clamp(g.col - left, 0, fov - 1));
      }
    }
  }
  if (inside(self.goal)) set(Channel::OwnGoal, self.goal.row - top, self.goal.col - left);

  const double dr = self.goal.row - self.position.row;
  const double dc = self.goal.col - self.position.col;
  const double dist = std::hypot(dr, dc);
  if (dist > 0.0) obs.goal_vector = {dr / dist, dc / dist};
  obs.goal_magnitude = cfg.distance_cap ? std::min(dist, *cfg.distance_cap) : dist;

  obs.valid_action_mask = valid_actions(world, agent_id, training_mode);
  return obs;
}

std::vector<double> flatten(const Observation& obs) {
  std::vector<double> flat;
  flat.reserve(flat_size(obs.fov));
  for (const auto& ch : obs.channels) {
    for (std::uint8_t v : ch) flat.push_back(v);
  }
  flat.push_back(obs.goal_vector[0]);
  flat.push_back(obs.goal_vector[1]);
  flat.push_back(obs.goal_magnitude);
  for (bool m : obs.valid_action_mask) flat.push_back(m ? 1.0 : 0.0);
  return flat;
}

namespace {

std::uint8_t binary_entry(double v, std::size_t index) {
  if (v == 0.0) return 0;
  if (v == 1.0) return 1;
  throw std::invalid_argument("observation entry " + std::to_string(index) +
                              " must be 0 or 1, got " + std::to_string(v));
}

}  // namespace

Observation parse_observation(std::span<const double> flat, int fov) {
  if (fov < 3) throw std::invalid_argument("fov must be at least 3");
  if (static_cast<int>(flat.size()) != flat_size(fov)) {
    throw std::invalid_argument("observation has " + std::to_string(flat.size()) +
                                " entries, expected " + std::to_string(flat_size(fov)));
  }
  Observation obs;
  obs.fov = fov;
  std::size_t i = 0;
  for (auto& ch : obs.channels) {
    ch.resize(static_cast<std::size_t>(fov) * fov);
    for (auto& v : ch) {
      v = binary_entry(flat[i], i);
      ++i;
    }
  }
  obs.goal_vector = {flat[i], flat[i + 1]};
  obs.goal_magnitude = flat[i + 2];
  i += 3;
  for (auto& m : obs.valid_action_mask) {
    m = binary_entry(flat[i], i) != 0;
    ++i;
  }
  return obs;
}

}  // namespace gridmapf
