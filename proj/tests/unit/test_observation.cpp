#include "doctest.h"

#include <algorithm>
#include <cmath>
#include <random>

#include "gridmapf/observation.hpp"
#include "gridmapf/sampler.hpp"

using namespace gridmapf;

namespace {

// Direct transcription of the observation rules, cell by cell.
Observation reference(const GridWorld& w, int id, int fov, std::optional<double> cap) {
  Observation o;
  o.fov = fov;
  for (auto& ch : o.channels) ch.assign(fov * fov, 0);
  const int c = (fov - 1) / 2;
  const Cell me = w.agent(id).position;
  const int top = me.row - c;
  const int left = me.col - c;
  for (int r = 0; r < fov; ++r) {
    for (int q = 0; q < fov; ++q) {
      const Cell cell{top + r, left + q};
      if (w.map().blocked(cell)) o.channels[0][r * fov + q] = 1;
    }
  }
  for (const AgentState& a : w.agents()) {
    if (a.id == id) continue;
    const int r = a.position.row - top;
    const int q = a.position.col - left;
    if (r < 0 || r >= fov || q < 0 || q >= fov) continue;
    o.channels[1][r * fov + q] = 1;
    const int gr = std::clamp(a.goal.row - top, 0, fov - 1);
    const int gq = std::clamp(a.goal.col - left, 0, fov - 1);
    o.channels[2][gr * fov + gq] = 1;
  }
  const Cell goal = w.agent(id).goal;
  if (goal.row - top >= 0 && goal.row - top < fov && goal.col - left >= 0 && goal.col - left < fov) {
    o.channels[3][(goal.row - top) * fov + (goal.col - left)] = 1;
  }
  const double dr = goal.row - me.row;
  const double dc = goal.col - me.col;
  const double d = std::hypot(dr, dc);
  if (d > 0) o.goal_vector = {dr / d, dc / d};
  o.goal_magnitude = cap ? std::min(d, *cap) : d;
  o.valid_action_mask = valid_actions(w, id, false);
  return o;
}

GridWorld open_world(int h, int w, std::vector<Cell> starts, std::vector<Cell> goals) {
  return GridWorld(GridMap(h, w), starts, goals);
}

}  // namespace

TEST_CASE("agent in the corner sees the outside as obstacles") {
  const auto w = open_world(10, 10, {{0, 0}}, {{9, 9}});
  const Observation o = observe(w, 0, {}, false);
  CHECK(fov_center(10) == 4);
  for (int r = 0; r < 10; ++r) {
    for (int q = 0; q < 10; ++q) {
      const bool outside = r < 4 || q < 4;
      CHECK(o.at(Channel::Obstacles, r, q) == (outside ? 1 : 0));
    }
  }
}

TEST_CASE("agent on its goal") {
  const auto w = open_world(10, 10, {{5, 5}}, {{5, 5}});
  const Observation o = observe(w, 0, {}, false);
  CHECK(o.goal_vector[0] == 0.0);
  CHECK(o.goal_vector[1] == 0.0);
  CHECK(o.goal_magnitude == 0.0);
  CHECK(o.at(Channel::OwnGoal, 4, 4) == 1);
  CHECK(std::count(o.channels[3].begin(), o.channels[3].end(), 1) == 1);
}

TEST_CASE("goal vector normalisation") {
  const auto w = open_world(10, 10, {{1, 1}}, {{4, 5}});
  const Observation o = observe(w, 0, {}, false);
  CHECK(o.goal_vector[0] == doctest::Approx(0.6));
  CHECK(o.goal_vector[1] == doctest::Approx(0.8));
  CHECK(o.goal_magnitude == doctest::Approx(5.0));
}

TEST_CASE("distance cap") {
  const auto w = open_world(3, 110, {{1, 2}}, {{1, 102}});
  const Observation capped = observe(w, 0, {10, 75.0}, false);
  CHECK(capped.goal_vector[0] == 0.0);
  CHECK(capped.goal_vector[1] == doctest::Approx(1.0));
  CHECK(capped.goal_magnitude == 75.0);
  CHECK(observe(w, 0, {}, false).goal_magnitude == doctest::Approx(100.0));
}

TEST_CASE("other agents and projected goals") {
  // Agent 1 is visible with a goal far to the south-east; agent 2 is outside.
  const auto w = open_world(30, 30, {{10, 10}, {12, 9}, {25, 25}}, {{0, 0}, {29, 29}, {10, 11}});
  const Observation o = observe(w, 0, {}, false);
  CHECK(o.at(Channel::Agents, 6, 3) == 1);
  CHECK(std::count(o.channels[1].begin(), o.channels[1].end(), 1) == 1);
  CHECK(o.at(Channel::AgentGoals, 9, 9) == 1);
  CHECK(std::count(o.channels[2].begin(), o.channels[2].end(), 1) == 1);
  CHECK(std::count(o.channels[3].begin(), o.channels[3].end(), 1) == 0);
}

TEST_CASE("flatten layout") {
  CHECK(flat_size(10) == 408);
  const auto w = open_world(10, 10, {{3, 3}}, {{6, 7}});
  const Observation o = observe(w, 0, {}, false);
  const std::vector<double> flat = flatten(o);
  REQUIRE(flat.size() == 408);
  CHECK(flat[400] == doctest::Approx(0.6));
  CHECK(flat[401] == doctest::Approx(0.8));
  CHECK(flat[402] == doctest::Approx(5.0));
  for (int a = 0; a < 5; ++a) CHECK(flat[403 + a] == 1.0);
  CHECK(parse_observation(flat, 10) == o);

  Observation zero;
  zero.fov = 10;
  for (auto& ch : zero.channels) ch.assign(100, 0);
  zero.valid_action_mask = {true, false, true, false, false};
  const auto z = flatten(zero);
  CHECK(std::count(z.begin(), z.end(), 0.0) == 406);
  CHECK(z[403] == 1.0);
  CHECK(z[405] == 1.0);

  std::vector<double> bad = flat;
  bad[17] = 0.5;
  CHECK_THROWS_AS(parse_observation(bad, 10), std::invalid_argument);
  bad = flat;
  bad.pop_back();
  CHECK_THROWS_AS(parse_observation(bad, 10), std::invalid_argument);
}

TEST_CASE("unknown agent") {
  const auto w = open_world(3, 3, {{0, 0}}, {{2, 2}});
  CHECK_THROWS(observe(w, 1, {}, false));
}

TEST_CASE("observations match the reference on random worlds") {
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    SamplerConfig cfg;
    cfg.fixed_size = 6 + static_cast<int>(seed % 20);
    cfg.team_size = 1 + static_cast<int>(seed % 12);
    cfg.seed = seed;
    const GridWorld w = sample_environment(cfg).world;
    const int fov = 3 + static_cast<int>(seed % 9);
    const std::optional<double> cap =
        seed % 3 == 0 ? std::optional<double>(3.0) : std::optional<double>();
    for (int i = 0; i < w.num_agents(); ++i) {
      const Observation got = observe(w, i, {fov, cap}, false);
      const Observation want = reference(w, i, fov, cap);
      CHECK(got.channels == want.channels);
      CHECK(got.goal_vector[0] == doctest::Approx(want.goal_vector[0]));
      CHECK(got.goal_vector[1] == doctest::Approx(want.goal_vector[1]));
      CHECK(got.goal_magnitude == doctest::Approx(want.goal_magnitude));
      CHECK(got.valid_action_mask == want.valid_action_mask);
      CHECK(observe(w, i, {fov, cap}, true).valid_action_mask == valid_actions(w, i, true));
    }
  }
}

TEST_CASE("translation invariance away from the border") {
  const std::vector<Cell> starts = {{10, 10}, {12, 13}, {8, 9}};
  const std::vector<Cell> goals = {{11, 14}, {9, 9}, {13, 11}};
  GridMap map(40, 40);
  map.set_obstacle({11, 11}, true);
  map.set_obstacle({7, 12}, true);
  const GridWorld a(map, starts, goals);
  GridMap shifted(40, 40);
  shifted.set_obstacle({11 + 9, 11 + 7}, true);
  shifted.set_obstacle({7 + 9, 12 + 7}, true);
  std::vector<Cell> s2, g2;
  for (Cell c : starts) s2.push_back({c.row + 9, c.col + 7});
  for (Cell c : goals) g2.push_back({c.row + 9, c.col + 7});
  const GridWorld b(shifted, s2, g2);
  for (int i = 0; i < 3; ++i) CHECK(observe(a, i, {}, false) == observe(b, i, {}, false));
}
