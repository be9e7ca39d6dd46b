#include "doctest.h"

#include <filesystem>

#include "json.hpp"

#include "gridmapf/cbs.hpp"
#include "gridmapf/io.hpp"
#include "gridmapf/sampler.hpp"

using namespace gridmapf;

TEST_CASE("map text round trip") {
  const GridMap map = GridMap::from_rows({"..@", "@..", "..."});
  CHECK(map_to_text(map) == "..@\n@..\n...\n");
  CHECK(parse_map_text(map_to_text(map)) == map);
  CHECK(parse_map_text("..@\r\n@..\r\n...\r\n") == map);
  CHECK_THROWS_AS(parse_map_text("..\n...\n"), FormatError);
  CHECK_THROWS_AS(parse_map_text(".x.\n"), FormatError);
  CHECK_THROWS_AS(parse_map_text(""), FormatError);
}

TEST_CASE("scenario json round trip") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SamplerConfig cfg;
    cfg.fixed_size = 6 + static_cast<int>(seed);
    cfg.team_size = 1 + static_cast<int>(seed % 5);
    cfg.seed = seed;
    const auto env = sample_environment(cfg);
    Scenario s = scenario_from_world(env.world);
    s.seed = seed;
    s.density = env.density;
    const std::string text = scenario_to_json(s);
    CHECK(parse_scenario_json(text) == s);
    const auto j = nlohmann::json::parse(text);
    CHECK(j.at("format") == "gridmapf-scenario/1");
    CHECK(j.at("agents").size() == s.starts.size());
  }
  const Scenario bare{GridMap(2, 2), {{0, 0}}, {{1, 1}}, std::nullopt, std::nullopt};
  CHECK(parse_scenario_json(scenario_to_json(bare)) == bare);
}

TEST_CASE("scenario json errors") {
  const Scenario s{GridMap(2, 3), {{0, 0}, {0, 1}}, {{1, 2}, {1, 1}}, 4, 0.0};
  const auto good = nlohmann::json::parse(scenario_to_json(s));

  auto broken = good;
  broken["format"] = "something-else/9";
  CHECK_THROWS_AS(parse_scenario_json(broken.dump()), FormatError);
  broken = good;
  broken["width"] = 7;
  CHECK_THROWS_AS(parse_scenario_json(broken.dump()), FormatError);
  broken = good;
  broken["agents"][1]["id"] = 0;
  CHECK_THROWS_AS(parse_scenario_json(broken.dump()), FormatError);
  broken = good;
  broken["agents"][0]["start"] = {0};
  CHECK_THROWS_AS(parse_scenario_json(broken.dump()), FormatError);
  broken = good;
  broken["agents"][0]["goal"] = {5, 5};
  CHECK_THROWS_AS(parse_scenario_json(broken.dump()), FormatError);
  CHECK_THROWS_AS(parse_scenario_json("{"), FormatError);
}

TEST_CASE("plan json round trip") {
  const GridMap map(4, 4);
  const std::vector<Cell> starts = {{0, 0}, {3, 3}}, goals = {{0, 3}, {3, 0}};
  const auto res = cbs_solve(map, starts, goals);
  REQUIRE(res.solved());
  const PlanFile file{*res.plan, "cbs", TransitionMode::Restricted, 0.25};
  const PlanFile back = parse_plan_json(plan_to_json(file));
  CHECK(back.algorithm == "cbs");
  CHECK(back.mode == TransitionMode::Restricted);
  CHECK(back.wall_seconds == 0.25);
  CHECK(back.plan.cost == res.plan->cost);
  CHECK(back.plan.makespan == res.plan->makespan);
  REQUIRE(back.plan.paths.size() == 2);
  for (int i = 0; i < 2; ++i) CHECK(back.plan.paths[i] == res.plan->paths[i]);
  CHECK_THROWS_AS(parse_plan_json("[]"), FormatError);
}

TEST_CASE("render frame") {
  const GridMap map = GridMap::from_rows({"...", ".@.", "..."});
  const std::vector<Cell> pos = {{0, 0}, {2, 2}}, goals = {{0, 0}, {0, 2}};
  CHECK(render_frame(map, pos, goals) == "A.+\n.@.\n..B\n");
  CHECK(agent_symbol(0) == 'A');
  CHECK(agent_symbol(25) == 'Z');
  CHECK(agent_symbol(26) == 'a');
  CHECK(agent_symbol(52) == '0');
  CHECK(agent_symbol(62) == 'A');
}

TEST_CASE("file helpers") {
  const auto dir = std::filesystem::temp_directory_path() / "gridmapf_test_io";
  std::filesystem::create_directories(dir);
  const auto file = dir / "x.txt";
  write_file(file, "hello\n");
  CHECK(read_file(file) == "hello\n");
  CHECK_THROWS_AS(read_file(dir / "missing.txt"), FormatError);
  CHECK_THROWS_AS(write_file(dir / "no" / "such" / "dir.txt", "x"), FormatError);
  std::filesystem::remove_all(dir);
}
