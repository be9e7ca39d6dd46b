#include "gridmapf/demos.hpp"

#include <algorithm>
#include <fstream>
#include <numeric>
#include <sstream>

#include "gridmapf/odrmstar.hpp"
#include "json.hpp"

namespace gridmapf {

using nlohmann::json;

std::vector<std::vector<Action>> DemoTrajectory::expert_actions() const {
  std::vector<std::vector<Action>> out(agents.size());
  for (std::size_t i = 0; i < agents.size(); ++i) {
    for (const DemoRecord& r : agents[i]) out[i].push_back(r.expert_action);
  }
  return out;
}

DemoResult generate_demo(const GridWorld& world, const DemoOptions& options) {
  OdrmstarOptions od;
  od.epsilon = options.epsilon;
  od.mode = TransitionMode::Restricted;
  od.timeout_seconds = options.timeout_seconds;
  const std::vector<Cell> starts = world.positions();
  const std::vector<Cell> goals = world.goals();
  SolveResult solved = odrmstar_solve(world.map(), starts, goals, od);
  if (!solved.solved()) return {solved.status, std::nullopt};
  const JointPlan& plan = *solved.plan;

  const int n = world.num_agents();
  DemoTrajectory demo;
  demo.meta.epsilon = options.epsilon;
  demo.meta.size = std::max(world.map().width(), world.map().height());
  demo.meta.density =
      world.map().num_cells() == 0
          ? 0.0
          : static_cast<double>(world.map().count_obstacles()) / world.map().num_cells();
  demo.meta.cost = plan.cost;
  demo.map = world.map();
  demo.starts = starts;
  demo.goals = goals;
  demo.agents.resize(n);

  GridWorld w = world;
  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  StepOptions step_options;
  step_options.evaluate_blocking = false;
  std::vector<Action> actions(n);

  for (int t = 0; t <= plan.makespan; ++t) {
    const std::vector<bool> blocking = blocking_flags(w);
    for (int i = 0; i < n; ++i) {
      const Path& path = plan.paths[i];
      if (w.agent(i).position != path.at(t)) {
        throw DemoReplayError("agent " + std::to_string(i) + " left its plan at t=" +
                              std::to_string(t));
      }
      const auto action = t < plan.makespan ? action_between(path.at(t), path.at(t + 1))
                                            : std::optional<Action>(Action::Stay);
      if (!action) throw DemoReplayError("plan jumps at t=" + std::to_string(t));
      DemoRecord record{observe(w, i, options.fov, false), *action, blocking[i], path.at(t)};
      if (!record.observation.valid_action_mask[to_index(*action)]) {
        throw DemoReplayError("expert action of agent " + std::to_string(i) + " at t=" +
                              std::to_string(t) + " is not valid");
      }
      actions[i] = *action;
      demo.agents[i].push_back(std::move(record));
    }
    if (t == plan.makespan) break;
    const StepOutcome out = step_in_order(w, actions, order, step_options);
    for (int i = 0; i < n; ++i) {
      if (out.agents[i].collided) {
        throw DemoReplayError("agent " + std::to_string(i) + " collided at t=" + std::to_string(t));
      }
    }
  }
  if (!w.all_on_goal()) throw DemoReplayError("plan replay did not finish");
  return {SolveStatus::Solved, std::move(demo)};
}

namespace {

json cells_json(const std::vector<Cell>& cells) {
  json out = json::array();
  for (Cell c : cells) out.push_back({c.row, c.col});
  return out;
}

std::vector<Cell> parse_cells(const json& j) {
  std::vector<Cell> out;
  for (const json& c : j) out.push_back({c.at(0).get<int>(), c.at(1).get<int>()});
  return out;
}

}  // namespace

void write_demos(std::span<const DemoTrajectory> demos, std::ostream& out) {
  for (const DemoTrajectory& d : demos) {
    const int fov = d.length() > 0 ? d.agents.front().front().observation.fov : 0;
    json meta = {{"type", "meta"},
                 {"format", kDemoFormatVersion},
                 {"layout", kObservationLayoutVersion},
                 {"episode", d.meta.episode},
                 {"seed", d.meta.seed},
                 {"epsilon", d.meta.epsilon},
                 {"team", d.team()},
                 {"size", d.meta.size},
                 {"density", d.meta.density},
                 {"cost", d.meta.cost},
                 {"fov", fov},
                 {"length", d.length()},
                 {"backtrack_masked", d.meta.backtrack_masked},
                 {"map", d.map.to_rows()},
                 {"starts", cells_json(d.starts)},
                 {"goals", cells_json(d.goals)}};
    out << meta.dump() << '\n';
    for (int a = 0; a < d.team(); ++a) {
      for (std::size_t t = 0; t < d.agents[a].size(); ++t) {
        const DemoRecord& r = d.agents[a][t];
        json line = {{"episode", d.meta.episode},
                     {"agent", a},
                     {"t", t},
                     {"obs", flatten(r.observation)},
                     {"action", to_index(r.expert_action)},
                     {"blocking", r.blocking ? 1 : 0},
                     {"pos", {r.position.row, r.position.col}}};
        out << line.dump() << '\n';
      }
    }
  }
}

void write_demos(std::span<const DemoTrajectory> demos, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  write_demos(demos, out);
  if (!out) throw std::runtime_error("write to '" + path.string() + "' failed");
}

DemoParseError::DemoParseError(int line, const std::string& what)
    : std::runtime_error("line " + std::to_string(line) + ": " + what), line_(line) {}

std::vector<DemoTrajectory> read_demos(std::istream& in) {
  std::vector<DemoTrajectory> out;
  std::string text;
  int line = 0;
  int fov = 0;
  int expected_length = 0;
  auto finish = [&](int at) {
    if (out.empty()) return;
    for (const auto& records : out.back().agents) {
      if (static_cast<int>(records.size()) != expected_length) {
        throw DemoParseError(at, "episode " + std::to_string(out.back().meta.episode) +
                                     " has missing records");
      }
    }
  };
  while (std::getline(in, text)) {
    ++line;
    if (text.empty()) continue;
    try {
      const json j = json::parse(text);
      if (j.value("type", "") == "meta") {
        finish(line);
        if (j.value("format", std::string(kDemoFormatVersion)) != kDemoFormatVersion) {
          throw DemoParseError(line, "unsupported demo format");
        }
        DemoTrajectory d;
        d.meta.episode = j.at("episode").get<int>();
        d.meta.seed = j.at("seed").get<std::uint64_t>();
        d.meta.epsilon = j.at("epsilon").get<double>();
        d.meta.size = j.at("size").get<int>();
        d.meta.density = j.at("density").get<double>();
        d.meta.cost = j.at("cost").get<int>();
        d.meta.backtrack_masked = j.at("backtrack_masked").get<bool>();
        d.map = GridMap::from_rows(j.at("map").get<std::vector<std::string>>());
        d.starts = parse_cells(j.at("starts"));
        d.goals = parse_cells(j.at("goals"));
        d.agents.resize(j.at("team").get<std::size_t>());
        if (d.starts.size() != d.agents.size() || d.goals.size() != d.agents.size()) {
          throw DemoParseError(line, "team size does not match starts/goals");
        }
        fov = j.at("fov").get<int>();
        expected_length = j.at("length").get<int>();
        out.push_back(std::move(d));
        continue;
      }
      if (out.empty()) throw DemoParseError(line, "record before any meta line");
      DemoTrajectory& d = out.back();
      if (j.at("episode").get<int>() != d.meta.episode) {
        throw DemoParseError(line, "record belongs to a different episode");
      }
      const int agent = j.at("agent").get<int>();
      if (agent < 0 || agent >= d.team()) throw DemoParseError(line, "agent id out of range");
      auto& records = d.agents[agent];
      if (j.at("t").get<std::size_t>() != records.size()) {
        throw DemoParseError(line, "records of an agent must appear in time order");
      }
      const auto obs = j.at("obs").get<std::vector<double>>();
      const json& pos = j.at("pos");
      records.push_back({parse_observation(obs, fov), action_from_index(j.at("action").get<int>()),
                         j.at("blocking").get<int>() != 0,
                         Cell{pos.at(0).get<int>(), pos.at(1).get<int>()}});
    } catch (const DemoParseError&) {
      throw;
    } catch (const std::exception& e) {
      throw DemoParseError(line, e.what());
    }
  }
  finish(line);
  return out;
}

std::vector<DemoTrajectory> read_demos(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return read_demos(in);
}

}  // namespace gridmapf
