// gridmapf command line: generate, solve, demo, run, bench, replay, validate.
//
// Exit codes: 0 success, 1 domain failure (unsolvable, timeout, failed
// episode, invalid plan, bad input file), 2 usage error.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "gridmapf/bench.hpp"
#include "gridmapf/cbs.hpp"
#include "gridmapf/demos.hpp"
#include "gridmapf/io.hpp"
#include "gridmapf/odrmstar.hpp"
#include "gridmapf/runtime.hpp"
#include "gridmapf/sampler.hpp"
#include "gridmapf/transport.hpp"
#include "json.hpp"

using namespace gridmapf;

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Domain failure already reported to the user.
struct Failure {};

struct Common {
  std::uint64_t seed = 1;
  std::string out;
  bool verbose = false;
};

bool g_verbose = false;
std::string g_command = "gridmapf";

void log(const std::string& message) {
  if (g_verbose) std::cerr << "[gridmapf] " << g_command << ": " << message << '\n';
}

[[noreturn]] void fail(const std::string& message) {
  std::cerr << "gridmapf: " << g_command << ": " << message << '\n';
  throw Failure{};
}

void add_common(CLI::App* cmd, Common& c) {
  cmd->add_option("--seed", c.seed, "Random seed");
  cmd->add_option("--out", c.out, "Output file (default: standard output)");
  cmd->add_flag("--verbose,-v", c.verbose, "Log progress to standard error");
}

void emit(const Common& c, const std::string& data) {
  if (c.out.empty() || c.out == "-") {
    std::cout << data;
  } else {
    write_file(c.out, data);
    log("wrote " + c.out);
  }
}

std::string version_text() {
  std::ostringstream ss;
  ss << "gridmapf " << GRIDMAPF_VERSION << '\n'
     << "scenario format: " << kScenarioFormatVersion << '\n'
     << "map format: rows of '.' and '@'\n"
     << "plan format: " << kPlanFormatVersion << '\n'
     << "demo format: " << kDemoFormatVersion << '\n'
     << "observation layout: " << kObservationLayoutVersion << '\n'
     << "wire protocol: " << kProtocolVersion;
  return ss.str();
}

struct SamplerFlags {
  std::optional<int> size;
  std::optional<double> density;
  int agents = 4;

  void add(CLI::App* cmd) {
    cmd->add_option("--size", size, "World side length (default: weighted 10/40/70 draw)")
        ->check(CLI::PositiveNumber);
    cmd->add_option("--density", density, "Obstacle density (default: triangular draw)")
        ->check(CLI::Range(0.0, 0.99));
    cmd->add_option("--agents", agents, "Team size")->check(CLI::PositiveNumber);
  }

  SampledEnvironment sample(std::uint64_t seed) const {
    SamplerConfig cfg;
    cfg.fixed_size = size;
    cfg.fixed_density = density;
    cfg.team_size = agents;
    cfg.seed = seed;
    return sample_environment(cfg);
  }
};

Scenario load_scenario(const std::string& path) { return parse_scenario_json(read_file(path)); }

// generate ------------------------------------------------------------------

struct GenerateArgs {
  Common common;
  SamplerFlags sampler;
  std::string map;
  std::string map_out;
};

void cmd_generate(const GenerateArgs& a) {
  Scenario s;
  if (!a.map.empty()) {
    const GridMap map = parse_map_text(read_file(a.map));
    std::mt19937_64 rng(a.common.seed);
    auto world = place_agents(map, a.sampler.agents, rng);
    if (!world) fail("sampler: cannot place " + std::to_string(a.sampler.agents) + " agents");
    s = scenario_from_world(*world);
  } else {
    const SampledEnvironment env = a.sampler.sample(a.common.seed);
    s = scenario_from_world(env.world);
    s.density = env.density;
  }
  s.seed = a.common.seed;
  log("size " + std::to_string(s.map.height()) + "x" + std::to_string(s.map.width()) + ", " +
      std::to_string(s.starts.size()) + " agents");
  emit(a.common, scenario_to_json(s));
  if (!a.map_out.empty()) write_file(a.map_out, map_to_text(s.map));
}

// solve ---------------------------------------------------------------------

struct SolveArgs {
  Common common;
  std::string scenario;
  std::string algo = "cbs";
  double epsilon = 2.0;
  std::string mode = "standard";
  std::optional<double> timeout;
};

SolveResult solve_independent(const Scenario& s) {
  const auto t0 = std::chrono::steady_clock::now();
  SolveResult r;
  std::vector<Path> paths;
  for (std::size_t i = 0; i < s.starts.size(); ++i) {
    auto p = astar(s.map, s.starts[i], s.goals[i]);
    if (!p) return r;
    paths.push_back(std::move(*p));
  }
  r.status = SolveStatus::Solved;
  r.plan = make_joint_plan(std::move(paths), s.goals);
  r.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

void cmd_solve(const SolveArgs& a) {
  const Scenario s = load_scenario(a.scenario);
  const TransitionMode mode = parse_mode(a.mode);
  SolveResult r;
  if (a.algo == "astar") {
    r = solve_independent(s);
  } else if (a.algo == "cbs") {
    CbsOptions o;
    o.mode = mode;
    if (a.timeout) o.timeout_seconds = *a.timeout;
    r = cbs_solve(s.map, s.starts, s.goals, o);
  } else {
    OdrmstarOptions o;
    o.mode = mode;
    o.epsilon = a.epsilon;
    if (a.timeout) o.timeout_seconds = *a.timeout;
    r = odrmstar_solve(s.map, s.starts, s.goals, o);
  }
  log(std::string(status_name(r.status)) + " in " + std::to_string(r.stats.wall_seconds) + " s, " +
      std::to_string(r.stats.expansions) + " expansions");
  if (!r.solved()) fail(std::string(status_name(r.status)));
  PlanFile file{*r.plan, a.algo, mode, r.stats.wall_seconds};
  emit(a.common, plan_to_json(file));
}

// demo ----------------------------------------------------------------------

struct DemoArgs {
  Common common;
  SamplerFlags sampler;
  int count = 1;
  double epsilon = 2.0;
  int fov = 10;
  double timeout = 60.0;
};

void cmd_demo(const DemoArgs& a) {
  std::vector<DemoTrajectory> demos;
  DemoOptions o;
  o.epsilon = a.epsilon;
  o.fov.fov = a.fov;
  o.timeout_seconds = a.timeout;
  std::uint64_t seed = a.common.seed;
  int skipped = 0;
  while (static_cast<int>(demos.size()) < a.count) {
    if (skipped > 10 * a.count + 100) fail("demos: too many instances without a plan");
    const SampledEnvironment env = a.sampler.sample(seed);
    DemoResult r = generate_demo(env.world, o);
    if (!r.demo) {
      log("seed " + std::to_string(seed) + ": " + std::string(status_name(r.status)) + ", skipped");
      ++skipped;
      ++seed;
      continue;
    }
    r.demo->meta.episode = static_cast<int>(demos.size());
    r.demo->meta.seed = seed;
    r.demo->meta.density = env.density;
    log("episode " + std::to_string(r.demo->meta.episode) + " seed " + std::to_string(seed) +
        " length " + std::to_string(r.demo->length()));
    demos.push_back(std::move(*r.demo));
    ++seed;
  }
  std::ostringstream out;
  write_demos(demos, out);
  emit(a.common, out.str());
}

// run -----------------------------------------------------------------------

struct RunArgs {
  Common common;
  SamplerFlags sampler;
  std::string scenario;
  std::string policy = "greedy";
  std::string command;
  std::string demo;
  int episode = 0;
  std::string plan;
  int steps = 0;
  int fov = 10;
  std::optional<double> cap;
  double deadline = 1.0;
  bool training = false;
};

void cmd_run(const RunArgs& a) {
  std::optional<GridWorld> world;
  std::unique_ptr<Policy> policy;
  if (!a.demo.empty()) {
    const auto demos = read_demos(std::filesystem::path(a.demo));
    const DemoTrajectory* d = nullptr;
    for (const auto& candidate : demos) {
      if (candidate.meta.episode == a.episode) d = &candidate;
    }
    if (d == nullptr) fail("demos: no episode " + std::to_string(a.episode) + " in " + a.demo);
    world.emplace(d->map, d->starts, d->goals);
    policy = scripted_policy(d->expert_actions());
  } else {
    if (!a.scenario.empty()) {
      world = load_scenario(a.scenario).world();
    } else {
      world = a.sampler.sample(a.common.seed).world;
    }
    if (!a.plan.empty()) {
      policy = plan_policy(parse_plan_json(read_file(a.plan)).plan);
    } else if (a.policy == "greedy") {
      policy = greedy_policy();
    } else if (a.policy == "stay") {
      policy = stay_policy();
    } else {
      if (a.command.empty()) throw UsageError("--policy external needs --cmd");
      policy = external_policy(std::make_unique<ProcessTransport>(split_command(a.command)),
                               {a.deadline});
    }
  }
  RuntimeOptions o;
  o.fov.fov = a.fov;
  o.fov.distance_cap = a.cap;
  o.step_cap = a.steps;
  o.seed = a.common.seed;
  o.training_observations = a.training;
  const EpisodeResult r = run_episode(*world, *policy, o);

  nlohmann::json j = {{"success", r.success},       {"steps_used", r.steps_used},
                      {"path_lengths", r.path_lengths}, {"collisions", r.collisions},
                      {"rewards", r.rewards},       {"faults", r.faults},
                      {"invalid_actions", r.invalid_actions}, {"aborted", r.aborted}};
  if (!r.error.empty()) j["error"] = r.error;
  if (!r.fault_messages.empty()) j["fault_messages"] = r.fault_messages;
  emit(a.common, j.dump(2) + '\n');
  for (const std::string& m : r.fault_messages) log("fault: " + m);
  if (r.aborted) fail("runtime: episode aborted: " + r.error);
  if (!r.success) fail("runtime: episode failed after " + std::to_string(r.steps_used) + " steps");
}

// bench ---------------------------------------------------------------------

struct BenchArgs {
  Common common;
  std::vector<int> sizes = {10, 20};
  std::vector<double> densities = {0.0, 0.1, 0.2, 0.3};
  std::vector<int> teams = {4, 8, 16, 32};
  int instances = 25;
  std::vector<std::string> methods = {"cbs", "odrmstar:1.5"};
  double timeout_cbs = 300.0;
  double timeout_mstar = 60.0;
  int workers = 1;
  std::string records;
  std::string mode = "standard";
};

void cmd_bench(const BenchArgs& a) {
  BenchSpec spec;
  spec.sizes = a.sizes;
  spec.densities = a.densities;
  spec.team_sizes = a.teams;
  spec.instances_per_cell = a.instances;
  spec.cbs_timeout_seconds = a.timeout_cbs;
  spec.odrmstar_timeout_seconds = a.timeout_mstar;
  spec.workers = a.workers;
  spec.seed = a.common.seed;
  spec.planner_mode = parse_mode(a.mode);
  std::vector<BenchMethod> methods;
  for (const std::string& m : a.methods) {
    try {
      methods.push_back(parse_method(m));
    } catch (const std::invalid_argument& e) {
      throw UsageError(e.what());
    }
  }
  std::ofstream records;
  if (!a.records.empty()) {
    records.open(a.records, std::ios::trunc);
    if (!records) fail("bench: cannot write '" + a.records + "'");
  }
  const auto rows = summarize(run_bench(spec, methods, [&](const BenchRecord& r) {
    if (records.is_open()) write_record_jsonl(r, records);
    log(r.scenario + " " + r.method + (r.success ? " ok " : " FAIL ") + std::to_string(r.wall_time) +
        " s");
  }));
  std::ostringstream csv;
  export_csv(rows, csv);
  emit(a.common, csv.str());
}

// replay / validate ---------------------------------------------------------

struct ReplayArgs {
  Common common;
  std::string plan;
  std::string demo;
  std::string scenario;
  int episode = 0;
  bool check = false;
  std::optional<std::string> mode;
};

bool fits(const GridMap& map, const JointPlan& plan, std::size_t agents) {
  if (plan.paths.size() != agents) return false;
  for (const Path& p : plan.paths) {
    for (Cell c : p.positions) {
      if (!map.in_bounds(c)) return false;
    }
  }
  return true;
}

void print_violations(const std::vector<Violation>& violations) {
  for (const Violation& v : violations) {
    std::cerr << "  " << violation_name(v.kind) << ": " << v.message << '\n';
  }
}

void cmd_replay(const ReplayArgs& a) {
  std::ostringstream frames;
  if (!a.demo.empty()) {
    const auto demos = read_demos(std::filesystem::path(a.demo));
    const DemoTrajectory* d = nullptr;
    for (const auto& candidate : demos) {
      if (candidate.meta.episode == a.episode) d = &candidate;
    }
    if (d == nullptr) fail("demos: no episode " + std::to_string(a.episode) + " in " + a.demo);
    for (int t = 0; t < d->length(); ++t) {
      std::vector<Cell> positions;
      for (const auto& records : d->agents) positions.push_back(records[t].position);
      frames << "t=" << t << '\n' << render_frame(d->map, positions, d->goals) << '\n';
    }
    emit(a.common, frames.str());
    if (a.check) {
      RuntimeOptions o;
      o.fov.fov = d->length() > 0 ? d->agents.front().front().observation.fov : 10;
      o.record_trace = true;
      auto policy = scripted_policy(d->expert_actions());
      const EpisodeResult r = run_episode(GridWorld(d->map, d->starts, d->goals), *policy, o);
      bool same = r.success && r.steps_used + 1 == d->length();
      for (int t = 0; same && t < d->length(); ++t) {
        for (int i = 0; i < d->team(); ++i) {
          if (r.positions[t][i] != d->agents[i][t].position) same = false;
        }
      }
      if (!same) fail("replay: demo does not reproduce its recorded positions");
      std::cerr << "demo replays to success in " << r.steps_used << " steps\n";
    }
    return;
  }

  const Scenario s = load_scenario(a.scenario);
  const PlanFile file = parse_plan_json(read_file(a.plan));
  if (!fits(s.map, file.plan, s.starts.size())) fail("replay: plan does not fit the scenario map");
  const int frames_count = file.plan.makespan + 1;
  for (int t = 0; t < frames_count; ++t) {
    std::vector<Cell> positions;
    for (const Path& p : file.plan.paths) positions.push_back(p.at(t));
    frames << "t=" << t << '\n' << render_frame(s.map, positions, s.goals) << '\n';
  }
  emit(a.common, frames.str());
  if (a.check) {
    const TransitionMode mode = a.mode ? parse_mode(*a.mode) : file.mode;
    const auto violations = validate_plan(s.map, s.starts, s.goals, file.plan, mode);
    if (!violations.empty()) {
      print_violations(violations);
      fail("replay: plan has " + std::to_string(violations.size()) + " violation(s), first: " +
           violations.front().message);
    }
    std::cerr << "plan valid (" << mode_name(mode) << ")\n";
  }
}

struct ValidateArgs {
  Common common;
  std::string scenario;
  std::string plan;
  std::optional<std::string> mode;
};

void cmd_validate(const ValidateArgs& a) {
  const Scenario s = load_scenario(a.scenario);
  const PlanFile file = parse_plan_json(read_file(a.plan));
  const TransitionMode mode = a.mode ? parse_mode(*a.mode) : file.mode;
  const auto violations = validate_plan(s.map, s.starts, s.goals, file.plan, mode);
  nlohmann::json list = nlohmann::json::array();
  for (const Violation& v : violations) {
    list.push_back({{"kind", violation_name(v.kind)},
                    {"agent", v.agent},
                    {"other", v.other},
                    {"time", v.time},
                    {"message", v.message}});
  }
  emit(a.common, nlohmann::json({{"valid", violations.empty()}, {"mode", mode_name(mode)},
                                 {"violations", list}})
                         .dump(2) +
                     '\n');
  if (!violations.empty()) fail(std::to_string(violations.size()) + " violation(s)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multi-agent path finding toolkit: environments, planners, demos, policies"};
  app.set_version_flag("--version", version_text());
  app.require_subcommand(1);
  app.failure_message(CLI::FailureMessage::help);

  GenerateArgs gen;
  auto* generate = app.add_subcommand("generate", "Sample a world and team, write a scenario");
  add_common(generate, gen.common);
  gen.sampler.add(generate);
  generate->add_option("--map", gen.map, "Place agents on this map text file instead")
      ->check(CLI::ExistingFile);
  generate->add_option("--map-out", gen.map_out, "Also write the map as text");

  SolveArgs solve;
  auto* solve_cmd = app.add_subcommand("solve", "Plan a scenario with a centralized solver");
  add_common(solve_cmd, solve.common);
  solve_cmd->add_option("--scenario", solve.scenario, "Scenario file")->required();
  solve_cmd->add_option("--algo", solve.algo, "astar, cbs or odrmstar")
      ->check(CLI::IsMember({"astar", "cbs", "odrmstar"}));
  solve_cmd->add_option("--epsilon", solve.epsilon, "ODrM* inflation factor")
      ->check(CLI::Range(1.0, 1e9));
  solve_cmd->add_option("--mode", solve.mode, "standard or restricted")
      ->check(CLI::IsMember({"standard", "restricted"}));
  solve_cmd->add_option("--timeout", solve.timeout, "Wall-clock budget in seconds");

  DemoArgs demo;
  auto* demo_cmd = app.add_subcommand("demo", "Generate expert demonstrations (JSON lines)");
  add_common(demo_cmd, demo.common);
  demo.sampler.add(demo_cmd);
  demo_cmd->add_option("--count", demo.count, "Number of demonstrations")
      ->check(CLI::NonNegativeNumber);
  demo_cmd->add_option("--epsilon", demo.epsilon, "ODrM* inflation factor")
      ->check(CLI::Range(1.0, 1e9));
  demo_cmd->add_option("--fov", demo.fov, "Field of view")->check(CLI::Range(3, 1000));
  demo_cmd->add_option("--timeout", demo.timeout, "Planner budget per instance, seconds");

  RunArgs run;
  auto* run_cmd = app.add_subcommand("run", "Execute one decentralized episode");
  add_common(run_cmd, run.common);
  run.sampler.add(run_cmd);
  auto* run_scenario = run_cmd->add_option("--scenario", run.scenario, "Scenario file");
  run_cmd->add_option("--policy", run.policy, "greedy, stay or external")
      ->check(CLI::IsMember({"greedy", "stay", "external"}));
  run_cmd->add_option("--cmd", run.command, "Command of the external policy process");
  auto* run_demo = run_cmd->add_option("--demo", run.demo, "Replay expert actions of a demo file");
  run_cmd->add_option("--episode", run.episode, "Episode within --demo");
  run_cmd->add_option("--plan", run.plan, "Replay a plan file (needs --scenario)")
      ->needs(run_scenario);
  run_demo->excludes(run_scenario);
  run_cmd->add_option("--steps", run.steps, "Step cap (default by world size)");
  run_cmd->add_option("--fov", run.fov, "Field of view")->check(CLI::Range(3, 1000));
  run_cmd->add_option("--distance-cap", run.cap, "Cap on the goal distance magnitude");
  run_cmd->add_option("--deadline", run.deadline, "External policy deadline per step, seconds");
  run_cmd->add_flag("--training", run.training, "Observe with the no-backtrack mask");

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Success-rate benchmark; writes summary CSV");
  add_common(bench_cmd, bench.common);
  bench_cmd->add_option("--sizes", bench.sizes)->delimiter(',');
  bench_cmd->add_option("--densities", bench.densities)->delimiter(',');
  bench_cmd->add_option("--teams", bench.teams)->delimiter(',');
  bench_cmd->add_option("--instances", bench.instances)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--methods", bench.methods,
                        "cbs, odrmstar[:EPS], greedy, external:CMD")
      ->delimiter(',');
  bench_cmd->add_option("--timeout-cbs", bench.timeout_cbs);
  bench_cmd->add_option("--timeout-mstar", bench.timeout_mstar);
  bench_cmd->add_option("--workers", bench.workers)->check(CLI::PositiveNumber);
  bench_cmd->add_option("--records", bench.records, "Per-instance JSON lines, flushed as they finish");
  bench_cmd->add_option("--mode", bench.mode)->check(CLI::IsMember({"standard", "restricted"}));

  ReplayArgs replay;
  auto* replay_cmd = app.add_subcommand("replay", "Print a plan or demo frame by frame");
  add_common(replay_cmd, replay.common);
  auto* replay_plan = replay_cmd->add_option("--plan", replay.plan, "Plan file");
  auto* replay_demo = replay_cmd->add_option("--demo", replay.demo, "Demo file");
  auto* replay_scenario = replay_cmd->add_option("--scenario", replay.scenario, "Scenario of the plan");
  replay_plan->needs(replay_scenario)->excludes(replay_demo);
  replay_cmd->add_option("--episode", replay.episode, "Episode within --demo");
  replay_cmd->add_flag("--check", replay.check, "Also validate the plan / re-run the demo");
  replay_cmd->add_option("--mode", replay.mode, "Override the plan's transition mode")
      ->check(CLI::IsMember({"standard", "restricted"}));

  ValidateArgs validate;
  auto* validate_cmd = app.add_subcommand("validate", "Check a plan against a scenario");
  add_common(validate_cmd, validate.common);
  validate_cmd->add_option("--scenario", validate.scenario)->required();
  validate_cmd->add_option("--plan", validate.plan)->required();
  validate_cmd->add_option("--mode", validate.mode)->check(CLI::IsMember({"standard", "restricted"}));

  try {
    app.parse(argc, argv);
    if (replay_cmd->parsed() && replay.plan.empty() && replay.demo.empty()) {
      throw CLI::RequiredError("--plan or --demo");
    }
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (generate->parsed()) {
      g_command = "generate";
      g_verbose = gen.common.verbose;
      cmd_generate(gen);
    } else if (solve_cmd->parsed()) {
      g_command = "solve";
      g_verbose = solve.common.verbose;
      cmd_solve(solve);
    } else if (demo_cmd->parsed()) {
      g_command = "demo";
      g_verbose = demo.common.verbose;
      cmd_demo(demo);
    } else if (run_cmd->parsed()) {
      g_command = "run";
      g_verbose = run.common.verbose;
      cmd_run(run);
    } else if (bench_cmd->parsed()) {
      g_command = "bench";
      g_verbose = bench.common.verbose;
      cmd_bench(bench);
    } else if (replay_cmd->parsed()) {
      g_command = "replay";
      g_verbose = replay.common.verbose;
      cmd_replay(replay);
    } else if (validate_cmd->parsed()) {
      g_command = "validate";
      g_verbose = validate.common.verbose;
      cmd_validate(validate);
    }
  } catch (const Failure&) {
    return 1;
  } catch (const UsageError& e) {
    std::cerr << "gridmapf: " << g_command << ": " << e.what() << '\n';
    return 2;
  } catch (const FormatError& e) {
    std::cerr << "gridmapf: " << g_command << ": io: " << e.what() << '\n';
    return 1;
  } catch (const DemoParseError& e) {
    std::cerr << "gridmapf: " << g_command << ": demos: " << e.what() << '\n';
    return 1;
  } catch (const SamplingError& e) {
    std::cerr << "gridmapf: " << g_command << ": sampler: " << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "gridmapf: " << g_command << ": " << e.what() << '\n';
    return 1;
  }
  return 0;
}
