#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "gridmapf/observation.hpp"
#include "gridmapf/plan.hpp"

namespace gridmapf {

struct BenchMethod {
  enum class Kind { Cbs, Odrmstar, Greedy, External };
  Kind kind = Kind::Cbs;
  double epsilon = 1.0;              // odrmstar only
  std::vector<std::string> command;  // external only

  /// "cbs", "odrmstar(1.5)", "greedy" or "external".
  std::string name() const;
};

/// Parses "cbs", "odrmstar" (epsilon 1), "odrmstar:E", "greedy" or
/// "external:COMMAND". Throws std::invalid_argument otherwise.
BenchMethod parse_method(const std::string& text);

struct BenchSpec {
  std::vector<int> sizes = {10, 20, 40, 80, 160};
  std::vector<double> densities = {0.0, 0.1, 0.2, 0.3};
  std::vector<int> team_sizes = {4, 8, 16, 32, 64, 128, 256, 512, 1024};
  int instances_per_cell = 25;
  double cbs_timeout_seconds = 300.0;
  double odrmstar_timeout_seconds = 60.0;
  TransitionMode planner_mode = TransitionMode::Standard;
  /// Policy runs observe with this config; the magnitude cap follows the
  /// large-world benchmark setting.
  FovConfig fov{10, 75.0};
  int step_cap = 0;  // 0: per-size default
  double external_step_deadline_seconds = 1.0;
  std::uint64_t seed = 1;
  int workers = 1;
};

/// Largest team evaluated on a world of the given side.
int team_cap(int size);

struct BenchRecord {
  std::string scenario;
  std::uint64_t seed = 0;
  int size = 0;
  double density = 0.0;
  int team = 0;
  std::string method;
  bool success = false;
  double wall_time = 0.0;
  int sum_of_costs = 0;
  int makespan = 0;
  std::vector<int> path_lengths;
  int faults = 0;
  /// Solver plans only: whether validate_plan accepted the plan.
  bool plan_valid = false;
  std::string note;
};

/// Seed of one benchmark instance; identical for every method.
std::uint64_t instance_seed(std::uint64_t base, int size, double density, int team, int instance);

/// Runs every method on identical instances of every admissible cell.
/// `sink`, if set, sees each record as soon as it is complete (from a single
/// thread at a time). Records come back ordered by cell, instance and method.
std::vector<BenchRecord> run_bench(const BenchSpec& spec, const std::vector<BenchMethod>& methods,
                                   const std::function<void(const BenchRecord&)>& sink = {});

void write_record_jsonl(const BenchRecord& record, std::ostream& out);

struct BenchSummary {
  int size = 0;
  double density = 0.0;
  int team = 0;
  std::string method;
  int instances = 0;
  int successes = 0;
  double rate = 0.0;
  double mean_wall_time = 0.0;
  /// Mean sum-of-costs over successful runs; empty when there are none.
  std::optional<double> mean_cost;

  friend bool operator==(const BenchSummary&, const BenchSummary&) = default;
};

/// One row per (size, density, team, method), sorted by that key.
std::vector<BenchSummary> summarize(const std::vector<BenchRecord>& records);

inline constexpr const char* kBenchCsvHeader =
    "size,density,team,method,instances,successes,rate,mean_wall_time,mean_cost";

void export_csv(const std::vector<BenchSummary>& rows, std::ostream& out);
void export_csv(const std::vector<BenchSummary>& rows, const std::filesystem::path& path);
std::vector<BenchSummary> import_csv(std::istream& in);
std::vector<BenchSummary> import_csv(const std::filesystem::path& path);

}  // namespace gridmapf
