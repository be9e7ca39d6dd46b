#include "doctest.h"

#include <map>
#include <set>

#include "gridmapf/sampler.hpp"
#include "gridmapf/search.hpp"
#include "oracles.hpp"

using namespace gridmapf;

TEST_CASE("size weights 2:1:1") {
  SamplerConfig cfg;
  std::mt19937_64 rng(7);
  std::map<int, int> counts;
  const int n = 10000;
  for (int i = 0; i < n; ++i) ++counts[draw_size(cfg, rng)];
  CHECK(counts.size() == 3);
  CHECK(counts[10] / double(n) == doctest::Approx(0.5).epsilon(0.04));
  CHECK(counts[40] / double(n) == doctest::Approx(0.25).epsilon(0.08));
  CHECK(counts[70] / double(n) == doctest::Approx(0.25).epsilon(0.08));
}

TEST_CASE("triangular density") {
  std::mt19937_64 rng(11);
  const TriangularDensity tri;
  double sum = 0.0, lo = 1.0, hi = 0.0;
  const int n = 100000;
  for (int i = 0; i < n; ++i) {
    const double d = draw_density(tri, rng);
    sum += d;
    lo = std::min(lo, d);
    hi = std::max(hi, d);
  }
  CHECK(std::abs(sum / n - (0.0 + 0.33 + 0.5) / 3.0) < 0.005);
  CHECK(lo >= 0.0);
  CHECK(hi <= 0.5);

  // Degenerate and edge-peaked shapes.
  CHECK(draw_density({0.2, 0.2, 0.2}, rng) == 0.2);
  double ramp = 0.0;
  for (int i = 0; i < 20000; ++i) ramp += draw_density({0.0, 0.0, 1.0}, rng);
  CHECK(std::abs(ramp / 20000 - 1.0 / 3.0) < 0.01);
}

TEST_CASE("config validation") {
  SamplerConfig cfg;
  cfg.team_size = 0;
  CHECK_THROWS_AS(sample_environment(cfg), std::invalid_argument);
  cfg = {};
  cfg.size_choices = {{10, 0.0}};
  CHECK_THROWS_AS(sample_environment(cfg), std::invalid_argument);
  cfg = {};
  cfg.density = {0.4, 0.3, 0.5};
  CHECK_THROWS_AS(sample_environment(cfg), std::invalid_argument);
}

TEST_CASE("empty grid, single agent") {
  SamplerConfig cfg;
  cfg.fixed_size = 5;
  cfg.fixed_density = 0.0;
  cfg.team_size = 1;
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    cfg.seed = seed;
    const auto env = sample_environment(cfg);
    CHECK(env.world.map().count_obstacles() == 0);
    CHECK(env.world.agent(0).position != env.world.agent(0).goal);
  }
}

TEST_CASE("too dense for the team") {
  SamplerConfig cfg;
  cfg.fixed_size = 2;
  cfg.fixed_density = 0.0;
  cfg.team_size = 5;
  cfg.max_obstacle_retries = 3;
  CHECK_THROWS_AS(sample_environment(cfg), SamplingError);
}

TEST_CASE("sampled worlds are well formed and deterministic") {
  for (std::uint64_t seed = 0; seed < 300; ++seed) {
    SamplerConfig cfg;
    cfg.size_choices = {{8, 1.0}, {15, 1.0}};
    cfg.team_size = 1 + static_cast<int>(seed % 10);
    cfg.seed = seed;
    const auto env = sample_environment(cfg);
    const GridWorld& w = env.world;
    const auto rows = w.map().to_rows();
    std::set<Cell> starts, goals;
    for (const AgentState& a : w.agents()) {
      starts.insert(a.position);
      goals.insert(a.goal);
      CHECK(oracle::bfs(rows, a.position, a.goal) > 0);
    }
    CHECK(static_cast<int>(starts.size()) == cfg.team_size);
    CHECK(static_cast<int>(goals.size()) == cfg.team_size);
    CHECK(env.size == w.map().height());

    const auto again = sample_environment(cfg);
    CHECK(again.world.map() == w.map());
    CHECK(again.density == env.density);
    for (int i = 0; i < w.num_agents(); ++i) {
      CHECK(again.world.agent(i).position == w.agent(i).position);
      CHECK(again.world.agent(i).goal == w.agent(i).goal);
    }
  }
}

TEST_CASE("fixed density override") {
  SamplerConfig cfg;
  cfg.fixed_size = 60;
  cfg.fixed_density = 0.3;
  cfg.team_size = 4;
  double total = 0.0;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    cfg.seed = seed;
    const auto env = sample_environment(cfg);
    CHECK(env.density == 0.3);
    total += env.world.map().count_obstacles() / 3600.0;
  }
  CHECK(std::abs(total / 20 - 0.3) < 0.01);
}

TEST_CASE("connected_region examples") {
  const GridMap empty(4, 4);
  CHECK(connected_region(empty, {2, 1}).size() == 16);

  const GridMap walled = GridMap::from_rows({
      "..@..",
      "..@..",
      "..@..",
      "..@..",
      "..@..",
  });
  const auto left = connected_region(walled, {0, 0});
  CHECK(left.size() == 10);
  for (Cell c : left) CHECK(c.col < 2);

  const GridMap boxed = GridMap::from_rows({
      "@@@",
      "@.@",
      "@@@",
  });
  CHECK(connected_region(boxed, {1, 1}) == std::vector<Cell>{{1, 1}});
  CHECK_THROWS_AS(connected_region(boxed, {0, 0}), std::invalid_argument);
}

TEST_CASE("region labels agree with flood fill") {
  SamplerConfig cfg;
  cfg.fixed_size = 12;
  cfg.fixed_density = 0.4;
  cfg.team_size = 1;
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    cfg.seed = seed;
    const GridMap map = sample_environment(cfg).world.map();
    const auto labels = label_regions(map);
    const auto rows = map.to_rows();
    for (int i = 0; i < map.num_cells(); i += 7) {
      for (int j = 0; j < map.num_cells(); j += 5) {
        const Cell a = map.cell(i), b = map.cell(j);
        if (map.blocked(a) || map.blocked(b)) continue;
        CHECK((labels[i] == labels[j]) == (oracle::bfs(rows, a, b) >= 0));
      }
    }
  }
}
