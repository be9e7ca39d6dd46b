#include "gridmapf/bench.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <map>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>
#include <tuple>

#include "gridmapf/cbs.hpp"
#include "gridmapf/odrmstar.hpp"
#include "gridmapf/runtime.hpp"
#include "gridmapf/sampler.hpp"
#include "gridmapf/transport.hpp"
#include "json.hpp"

namespace gridmapf {

namespace {

std::uint64_t splitmix(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

std::string format_double(double x) {
  std::ostringstream ss;
  ss << std::setprecision(17) << x;
  return ss.str();
}

struct Task {
  int size;
  double density;
  int team;
  int instance;
};

void fill_from_plan(BenchRecord& r, const SolveResult& solved, const GridWorld& world,
                    TransitionMode mode) {
  r.note = std::string(status_name(solved.status));
  if (!solved.solved()) return;
  const JointPlan& plan = *solved.plan;
  r.success = true;
  r.sum_of_costs = plan.cost;
  r.makespan = plan.makespan;
  const auto goals = world.goals();
  for (int i = 0; i < plan.num_agents(); ++i) {
    r.path_lengths.push_back(arrival_time(plan.paths[i], goals[i]).value_or(-1));
  }
  r.plan_valid = validate_plan(world.map(), world.positions(), goals, plan, mode).empty();
}

void fill_from_episode(BenchRecord& r, const EpisodeResult& ep) {
  r.success = ep.success;
  r.makespan = ep.steps_used;
  r.path_lengths = ep.path_lengths;
  r.faults = ep.faults;
  if (ep.success) {
    r.sum_of_costs = std::accumulate(ep.path_lengths.begin(), ep.path_lengths.end(), 0);
  }
  r.note = ep.aborted ? "aborted: " + ep.error : ep.success ? "success" : "step cap";
}

BenchRecord run_method(const BenchSpec& spec, const BenchMethod& method, const GridWorld& world,
                       std::uint64_t seed) {
  BenchRecord r;
  r.method = method.name();
  const auto t0 = std::chrono::steady_clock::now();
  try {
    switch (method.kind) {
      case BenchMethod::Kind::Cbs: {
        CbsOptions o;
        o.mode = spec.planner_mode;
        o.timeout_seconds = spec.cbs_timeout_seconds;
        fill_from_plan(r, cbs_solve(world.map(), world.positions(), world.goals(), o), world,
                       spec.planner_mode);
        break;
      }
      case BenchMethod::Kind::Odrmstar: {
        OdrmstarOptions o;
        o.epsilon = method.epsilon;
        o.mode = spec.planner_mode;
        o.timeout_seconds = spec.odrmstar_timeout_seconds;
        fill_from_plan(r, odrmstar_solve(world.map(), world.positions(), world.goals(), o), world,
                       spec.planner_mode);
        break;
      }
      case BenchMethod::Kind::Greedy:
      case BenchMethod::Kind::External: {
        RuntimeOptions o;
        o.fov = spec.fov;
        o.step_cap = spec.step_cap;
        o.seed = seed;
        std::unique_ptr<Policy> policy;
        if (method.kind == BenchMethod::Kind::Greedy) {
          policy = greedy_policy();
        } else {
          policy = external_policy(std::make_unique<ProcessTransport>(method.command),
                                   {spec.external_step_deadline_seconds});
        }
        fill_from_episode(r, run_episode(world, *policy, o));
        break;
      }
    }
  } catch (const std::exception& e) {
    r.success = false;
    r.faults += 1;
    r.note = std::string("error: ") + e.what();
  }
  r.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return r;
}

}  // namespace

std::string BenchMethod::name() const {
  switch (kind) {
    case Kind::Cbs: return "cbs";
    case Kind::Odrmstar: {
      std::ostringstream ss;
      ss << "odrmstar(" << epsilon << ")";
      return ss.str();
    }
    case Kind::Greedy: return "greedy";
    case Kind::External: return "external";
  }
  return "unknown";
}

BenchMethod parse_method(const std::string& text) {
  BenchMethod m;
  if (text == "cbs") return m;
  if (text == "greedy") {
    m.kind = BenchMethod::Kind::Greedy;
    return m;
  }
  if (text == "odrmstar" || text.rfind("odrmstar:", 0) == 0) {
    m.kind = BenchMethod::Kind::Odrmstar;
    if (text.size() > 9) {
      std::size_t used = 0;
      try {
        m.epsilon = std::stod(text.substr(9), &used);
      } catch (const std::exception&) {
        used = 0;
      }
      if (used != text.size() - 9 || !(m.epsilon >= 1.0)) {
        throw std::invalid_argument("bad epsilon in method '" + text + "'");
      }
    }
    return m;
  }
  if (text.rfind("external:", 0) == 0) {
    m.kind = BenchMethod::Kind::External;
    m.command = split_command(text.substr(9));
    if (m.command.empty()) throw std::invalid_argument("external method needs a command");
    return m;
  }
  throw std::invalid_argument("unknown method '" + text + "'");
}

int team_cap(int size) {
  if (size <= 10) return 32;
  if (size <= 20) return 128;
  return 1024;
}

std::uint64_t instance_seed(std::uint64_t base, int size, double density, int team, int instance) {
  std::uint64_t h = splitmix(base);
  h = splitmix(h ^ static_cast<std::uint64_t>(size));
  h = splitmix(h ^ static_cast<std::uint64_t>(std::llround(density * 1e6)));
  h = splitmix(h ^ static_cast<std::uint64_t>(team));
  return splitmix(h ^ static_cast<std::uint64_t>(instance));
}

std::vector<BenchRecord> run_bench(const BenchSpec& spec, const std::vector<BenchMethod>& methods,
                                   const std::function<void(const BenchRecord&)>& sink) {
  std::vector<Task> tasks;
  for (int size : spec.sizes) {
    for (double density : spec.densities) {
      for (int team : spec.team_sizes) {
        if (team > team_cap(size)) continue;
        for (int i = 0; i < spec.instances_per_cell; ++i) tasks.push_back({size, density, team, i});
      }
    }
  }

  std::vector<std::vector<BenchRecord>> results(tasks.size());
  std::atomic<std::size_t> next{0};
  std::mutex collector;

  auto worker = [&] {
    for (std::size_t k = next++; k < tasks.size(); k = next++) {
      const Task& task = tasks[k];
      const std::uint64_t seed =
          instance_seed(spec.seed, task.size, task.density, task.team, task.instance);
      std::ostringstream id;
      id << "s" << task.size << "-d" << task.density << "-t" << task.team << "-i" << task.instance;

      std::optional<GridWorld> world;
      std::string failure;
      try {
        SamplerConfig cfg;
        cfg.fixed_size = task.size;
        cfg.fixed_density = task.density;
        cfg.team_size = task.team;
        cfg.seed = seed;
        world = sample_environment(cfg).world;
      } catch (const std::exception& e) {
        failure = std::string("sampling failed: ") + e.what();
      }

      for (const BenchMethod& method : methods) {
        BenchRecord r;
        if (world) {
          r = run_method(spec, method, *world, seed);
        } else {
          r.method = method.name();
          r.faults = 1;
          r.note = failure;
        }
        r.scenario = id.str();
        r.seed = seed;
        r.size = task.size;
        r.density = task.density;
        r.team = task.team;
        {
          std::lock_guard lock(collector);
          if (sink) sink(r);
        }
        results[k].push_back(std::move(r));
      }
    }
  };

  const int workers = std::max(1, std::min<int>(spec.workers, static_cast<int>(tasks.size())));
  if (workers == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int w = 0; w < workers; ++w) pool.emplace_back(worker);
    for (std::thread& t : pool) t.join();
  }

  std::vector<BenchRecord> out;
  for (auto& rs : results) {
    for (auto& r : rs) out.push_back(std::move(r));
  }
  return out;
}

void write_record_jsonl(const BenchRecord& r, std::ostream& out) {
  const nlohmann::json j = {{"scenario", r.scenario},   {"seed", r.seed},
                            {"size", r.size},           {"density", r.density},
                            {"team", r.team},           {"method", r.method},
                            {"success", r.success},     {"wall_time", r.wall_time},
                            {"sum_of_costs", r.sum_of_costs}, {"makespan", r.makespan},
                            {"path_lengths", r.path_lengths}, {"faults", r.faults},
                            {"plan_valid", r.plan_valid}, {"note", r.note}};
  out << j.dump() << '\n';
  out.flush();
}

std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records) {
  using Key = std::tuple<int, double, int, std::string>;
  struct Acc {
    int n = 0, ok = 0;
    double wall = 0.0, cost = 0.0;
  };
  std::map<Key, Acc> cells;
  for (const BenchRecord& r : records) {
    Acc& a = cells[{r.size, r.density, r.team, r.method}];
    ++a.n;
    a.wall += r.wall_time;
    if (r.success) {
      ++a.ok;
      a.cost += r.sum_of_costs;
    }
  }
  std::vector<BenchSummary> out;
  for (const auto& [key, a] : cells) {
    BenchSummary s;
    std::tie(s.size, s.density, s.team, s.method) = key;
    s.instances = a.n;
    s.successes = a.ok;
    s.rate = static_cast<double>(a.ok) / a.n;
    s.mean_wall_time = a.wall / a.n;
    if (a.ok > 0) s.mean_cost = a.cost / a.ok;
    out.push_back(std::move(s));
  }
  return out;
}

void export_csv(const std::vector<BenchSummary>& rows, std::ostream& out) {
  out << kBenchCsvHeader << '\n';
  for (const BenchSummary& s : rows) {
    out << s.size << ',' << format_double(s.density) << ',' << s.team << ',' << s.method << ','
        << s.instances << ',' << s.successes << ',' << format_double(s.rate) << ','
        << format_double(s.mean_wall_time) << ','
        << (s.mean_cost ? format_double(*s.mean_cost) : std::string()) << '\n';
  }
}

void export_csv(const std::vector<BenchSummary>& rows, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write '" + path.string() + "'");
  export_csv(rows, out);
}

std::vector<BenchSummary> import_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kBenchCsvHeader) {
    throw std::invalid_argument("bench csv: missing or unexpected header");
  }
  std::vector<BenchSummary> out;
  int number = 1;
  while (std::getline(in, line)) {
    ++number;
    if (line.empty()) continue;
    std::vector<std::string> f;
    std::size_t start = 0;
    for (;;) {
      const std::size_t comma = line.find(',', start);
      f.push_back(line.substr(start, comma - start));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (f.size() != 9) {
      throw std::invalid_argument("bench csv line " + std::to_string(number) + ": expected 9 fields");
    }
    try {
      BenchSummary s;
      s.size = std::stoi(f[0]);
      s.density = std::stod(f[1]);
      s.team = std::stoi(f[2]);
      s.method = f[3];
      s.instances = std::stoi(f[4]);
      s.successes = std::stoi(f[5]);
      s.rate = std::stod(f[6]);
      s.mean_wall_time = std::stod(f[7]);
      if (!f[8].empty()) s.mean_cost = std::stod(f[8]);
      out.push_back(std::move(s));
    } catch (const std::logic_error&) {
      throw std::invalid_argument("bench csv line " + std::to_string(number) + ": bad number");
    }
  }
  return out;
}

std::vector<BenchSummary> import_csv(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open '" + path.string() + "'");
  return import_csv(in);
}

}  // namespace gridmapf
