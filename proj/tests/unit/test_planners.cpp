#include "doctest.h"

#include <random>

#include "gridmapf/cbs.hpp"
#include "gridmapf/joint_oracle.hpp"
#include "gridmapf/odrmstar.hpp"
#include "gridmapf/plan.hpp"
#include "gridmapf/sampler.hpp"
#include "gridmapf/world.hpp"
#include "oracles.hpp"

using namespace gridmapf;

namespace {

struct Instance {
  GridMap map;
  std::vector<Cell> starts, goals;
};

Instance pocket() {
  return {GridMap::from_rows({".....", "@@.@@"}), {{0, 0}, {0, 4}}, {{0, 4}, {0, 0}}};
}

Instance ring() {
  // Three agents in a row on the ring of a 4x4 grid, each shifting one cell on.
  return {GridMap::from_rows({"....", ".@@.", ".@@.", "...."}),
          {{0, 0}, {0, 1}, {0, 2}},
          {{0, 1}, {0, 2}, {0, 3}}};
}

Instance random_instance(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const int side = 3 + static_cast<int>(seed % 4);
  const int team = 1 + static_cast<int>(seed / 4 % 3);
  const double density = 0.1 * static_cast<double>(seed / 12 % 4);
  for (;;) {
    GridMap map(side, side);
    std::bernoulli_distribution obstacle(density);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c)
        if (obstacle(rng)) map.set_obstacle({r, c}, true);
    if (auto w = place_agents(map, team, rng)) return {w->map(), w->positions(), w->goals()};
  }
}

TransitionMode mode_of(bool restricted) {
  return restricted ? TransitionMode::Restricted : TransitionMode::Standard;
}

// Executes the plan in GridWorld and reports whether every step was clean.
bool executes_cleanly(const Instance& in, const JointPlan& plan) {
  GridWorld w(in.map, in.starts, in.goals);
  std::mt19937_64 rng(1);
  for (int t = 0; t < plan.makespan; ++t) {
    std::vector<Action> actions;
    for (const Path& p : plan.paths) actions.push_back(*action_between(p.at(t), p.at(t + 1)));
    const StepOutcome out = step(w, actions, rng);
    for (int i = 0; i < w.num_agents(); ++i) {
      if (w.agent(i).position != plan.paths[i].at(t + 1)) return false;
    }
    (void)out;
  }
  return w.all_on_goal();
}

}  // namespace

TEST_CASE("independent joint oracle on hand-built instances") {
  const Instance p = pocket();
  CHECK(oracle::joint_cost(p.map.to_rows(), p.starts, p.goals, false) == 11);
  CHECK(oracle::joint_cost(p.map.to_rows(), p.starts, p.goals, true) == 14);
  const Instance r = ring();
  CHECK(oracle::joint_cost(r.map.to_rows(), r.starts, r.goals, false) == 3);
  CHECK(oracle::joint_cost(r.map.to_rows(), r.starts, r.goals, true) == 6);
  CHECK(oracle::joint_cost({".."}, {{0, 0}, {0, 1}}, {{0, 1}, {0, 0}}, false) == -1);
}

TEST_CASE("joint_oracle examples") {
  const GridMap empty(4, 4);
  const std::vector<Cell> s1 = {{0, 0}}, g1 = {{3, 2}};
  CHECK(joint_oracle(empty, s1, g1, TransitionMode::Standard)->cost == 5);

  const GridMap pair(1, 2);
  const std::vector<Cell> s = {{0, 0}, {0, 1}}, g = {{0, 1}, {0, 0}};
  CHECK_FALSE(joint_oracle(pair, s, g, TransitionMode::Standard));
  CHECK_FALSE(joint_oracle(pair, s, g, TransitionMode::Restricted));

  const Instance r = ring();
  CHECK(joint_oracle(r.map, r.starts, r.goals, TransitionMode::Standard)->cost == 3);
  CHECK(joint_oracle(r.map, r.starts, r.goals, TransitionMode::Restricted)->cost == 6);

  const GridMap big(7, 7);
  CHECK_THROWS_AS(joint_oracle(big, s1, g1, TransitionMode::Standard), std::invalid_argument);
  const std::vector<Cell> four = {{0, 0}, {0, 1}, {0, 2}, {0, 3}};
  CHECK_THROWS_AS(joint_oracle(empty, four, four, TransitionMode::Standard), std::invalid_argument);
}

TEST_CASE("cbs examples") {
  const GridMap open(5, 5);
  const std::vector<Cell> s = {{0, 0}, {4, 0}}, g = {{0, 4}, {4, 3}};
  auto res = cbs_solve(open, s, g);
  REQUIRE(res.solved());
  CHECK(res.plan->cost == 7);

  const Instance p = pocket();
  for (bool restricted : {false, true}) {
    CbsOptions opt;
    opt.mode = mode_of(restricted);
    res = cbs_solve(p.map, p.starts, p.goals, opt);
    REQUIRE(res.solved());
    CHECK(res.plan->cost == (restricted ? 14 : 11));
    CHECK(validate_plan(p.map, p.starts, p.goals, *res.plan, opt.mode).empty());
  }

  const GridMap pair(1, 2);
  const std::vector<Cell> ss = {{0, 0}, {0, 1}}, gs = {{0, 1}, {0, 0}};
  CHECK(cbs_solve(pair, ss, gs).status == SolveStatus::Unsolvable);
}

TEST_CASE("cbs timeout is reported") {
  SamplerConfig cfg;
  cfg.fixed_size = 20;
  cfg.fixed_density = 0.2;
  cfg.team_size = 60;
  cfg.seed = 3;
  const GridWorld w = sample_environment(cfg).world;
  CbsOptions opt;
  opt.timeout_seconds = 0.05;
  const auto res = cbs_solve(w.map(), w.positions(), w.goals(), opt);
  CHECK(res.status != SolveStatus::Unsolvable);
  if (res.solved()) CHECK(validate_plan(w.map(), w.positions(), w.goals(), *res.plan, opt.mode).empty());
}

TEST_CASE("odrmstar examples") {
  const GridMap open(6, 6);
  const std::vector<Cell> s = {{1, 1}}, g = {{5, 4}};
  auto res = odrmstar_solve(open, s, g);
  REQUIRE(res.solved());
  CHECK(res.plan->cost == 7);

  const Instance p = pocket();
  for (bool restricted : {false, true}) {
    OdrmstarOptions opt;
    opt.epsilon = 1.0;
    opt.mode = mode_of(restricted);
    res = odrmstar_solve(p.map, p.starts, p.goals, opt);
    REQUIRE(res.solved());
    CHECK(res.plan->cost == (restricted ? 14 : 11));
  }

  OdrmstarOptions bad;
  bad.epsilon = 0.5;
  CHECK_THROWS_AS(odrmstar_solve(open, s, g, bad), std::invalid_argument);
}

TEST_CASE("planners agree with the independent oracle") {
  for (std::uint64_t seed = 0; seed < 72; ++seed) {
    const Instance in = random_instance(seed);
    for (bool restricted : {false, true}) {
      const TransitionMode mode = mode_of(restricted);
      const int truth = oracle::joint_cost(in.map.to_rows(), in.starts, in.goals, restricted);
      const auto lib = joint_oracle(in.map, in.starts, in.goals, mode);
      CHECK(lib.has_value() == (truth >= 0));
      if (lib) {
        CHECK(lib->cost == truth);
        CHECK(validate_plan(in.map, in.starts, in.goals, *lib, mode).empty());
      }

      CbsOptions copt;
      copt.mode = mode;
      copt.timeout_seconds = 30;
      const auto cbs = cbs_solve(in.map, in.starts, in.goals, copt);
      REQUIRE(cbs.status != SolveStatus::Timeout);
      CHECK(cbs.solved() == (truth >= 0));
      if (cbs.solved()) {
        CHECK(cbs.plan->cost == truth);
        CHECK(validate_plan(in.map, in.starts, in.goals, *cbs.plan, mode).empty());
      }

      for (double eps : {1.0, 2.0}) {
        OdrmstarOptions oopt;
        oopt.mode = mode;
        oopt.epsilon = eps;
        oopt.timeout_seconds = 30;
        const auto od = odrmstar_solve(in.map, in.starts, in.goals, oopt);
        REQUIRE(od.status != SolveStatus::Timeout);
        CHECK(od.solved() == (truth >= 0));
        if (od.solved()) {
          CHECK(od.plan->cost >= truth);
          CHECK(od.plan->cost <= eps * truth);
          CHECK(validate_plan(in.map, in.starts, in.goals, *od.plan, mode).empty());
        }
      }
    }
  }
}

TEST_CASE("odrmstar bound on 10x10 with four agents") {
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    SamplerConfig cfg;
    cfg.fixed_size = 10;
    cfg.fixed_density = 0.1;
    cfg.team_size = 4;
    cfg.seed = seed;
    const GridWorld w = sample_environment(cfg).world;
    const auto cbs = cbs_solve(w.map(), w.positions(), w.goals());
    REQUIRE(cbs.solved());
    OdrmstarOptions opt;
    opt.epsilon = 10.0;
    const auto od = odrmstar_solve(w.map(), w.positions(), w.goals(), opt);
    REQUIRE(od.solved());
    CHECK(od.plan->cost >= cbs.plan->cost);
    CHECK(od.plan->cost <= 10 * cbs.plan->cost);
  }
}

TEST_CASE("restricted plans execute in the world without collisions") {
  for (std::uint64_t seed = 0; seed < 30; ++seed) {
    SamplerConfig cfg;
    cfg.fixed_size = 10;
    cfg.fixed_density = 0.2;
    cfg.team_size = 3 + static_cast<int>(seed % 4);
    cfg.seed = seed + 500;
    const GridWorld w = sample_environment(cfg).world;
    const Instance in{w.map(), w.positions(), w.goals()};
    CbsOptions copt;
    copt.mode = TransitionMode::Restricted;
    const auto cbs = cbs_solve(in.map, in.starts, in.goals, copt);
    if (cbs.solved()) CHECK(executes_cleanly(in, *cbs.plan));
    OdrmstarOptions oopt;
    oopt.mode = TransitionMode::Restricted;
    const auto od = odrmstar_solve(in.map, in.starts, in.goals, oopt);
    if (od.solved()) CHECK(executes_cleanly(in, *od.plan));
  }
}

TEST_CASE("validate_plan examples") {
  const GridMap row(1, 3);
  const std::vector<Cell> s = {{0, 0}, {0, 1}}, g = {{0, 1}, {0, 0}};
  JointPlan swap = make_joint_plan({Path{{{0, 0}, {0, 1}}}, Path{{{0, 1}, {0, 0}}}}, g);
  auto v = validate_plan(row, s, g, swap, TransitionMode::Standard);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::EdgeConflict);

  const std::vector<Cell> fs = {{0, 0}, {0, 1}}, fg = {{0, 1}, {0, 2}};
  JointPlan follow = make_joint_plan({Path{{{0, 0}, {0, 1}}}, Path{{{0, 1}, {0, 2}}}}, fg);
  CHECK(validate_plan(row, fs, fg, follow, TransitionMode::Standard).empty());
  v = validate_plan(row, fs, fg, follow, TransitionMode::Restricted);
  REQUIRE(v.size() == 1);
  CHECK(v[0].kind == ViolationKind::FollowConflict);

  JointPlan jump = make_joint_plan({Path{{{0, 0}, {0, 2}}}}, std::vector<Cell>{{0, 2}});
  v = validate_plan(row, std::vector<Cell>{{0, 0}}, std::vector<Cell>{{0, 2}}, jump,
                    TransitionMode::Standard);
  REQUIRE_FALSE(v.empty());
  CHECK(v[0].kind == ViolationKind::Jump);

  JointPlan short_plan = make_joint_plan({Path{{{0, 0}, {0, 1}}}}, std::vector<Cell>{{0, 1}});
  v = validate_plan(row, std::vector<Cell>{{0, 0}}, std::vector<Cell>{{0, 2}}, short_plan,
                    TransitionMode::Standard);
  REQUIRE_FALSE(v.empty());
  CHECK(v[0].kind == ViolationKind::NotAtGoal);
}

TEST_CASE("make_joint_plan pads and costs") {
  const std::vector<Cell> goals = {{0, 2}, {1, 1}};
  const JointPlan plan =
      make_joint_plan({Path{{{0, 0}, {0, 1}, {0, 2}}}, Path{{{1, 1}, {1, 0}, {1, 1}, {1, 1}}}}, goals);
  CHECK(plan.makespan == 2);
  CHECK(plan.cost == 4);
  CHECK(plan.paths[0].positions.size() == 3);
  CHECK(plan.paths[1].positions.size() == 3);
  CHECK(arrival_time(Path{{{1, 1}, {1, 0}, {1, 1}}}, {1, 1}) == 2);
  CHECK(arrival_time(Path{{{1, 1}}}, {1, 1}) == 0);
  CHECK_FALSE(arrival_time(Path{{{1, 1}}}, {0, 0}));
  CHECK(parse_mode("restricted") == TransitionMode::Restricted);
  CHECK_THROWS_AS(parse_mode("loose"), std::invalid_argument);
}
