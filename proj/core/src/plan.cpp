#include "gridmapf/plan.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_map>

namespace gridmapf {

std::string_view mode_name(TransitionMode mode) {
  return mode == TransitionMode::Standard ? "standard" : "restricted";
}

TransitionMode parse_mode(std::string_view name) {
  if (name == "standard") return TransitionMode::Standard;
  if (name == "restricted") return TransitionMode::Restricted;
  throw std::invalid_argument("unknown transition mode '" + std::string(name) + "'");
}

std::string_view status_name(SolveStatus status) {
  switch (status) {
    case SolveStatus::Solved: return "solved";
    case SolveStatus::Unsolvable: return "unsolvable";
    case SolveStatus::Timeout: return "timeout";
  }
  return "?";
}

std::optional<int> arrival_time(const Path& path, Cell goal) {
  if (path.positions.empty() || path.positions.back() != goal) return std::nullopt;
  int t = static_cast<int>(path.positions.size()) - 1;
  while (t > 0 && path.positions[t - 1] == goal) --t;
  return t;
}

JointPlan make_joint_plan(std::vector<Path> paths, std::span<const Cell> goals) {
  if (paths.size() != goals.size()) throw std::invalid_argument("one goal per path required");
  JointPlan plan;
  for (std::size_t i = 0; i < paths.size(); ++i) {
    if (paths[i].positions.empty()) throw std::invalid_argument("empty path");
    const int arrival = arrival_time(paths[i], goals[i]).value_or(paths[i].length());
    plan.cost += arrival;
    plan.makespan = std::max(plan.makespan, arrival);
  }
  // Everything past the makespan is waiting on the goal.
  for (Path& p : paths) {
    const Cell last = p.positions.back();
    p.positions.resize(plan.makespan + 1, last);
  }
  plan.paths = std::move(paths);
  return plan;
}

Deadline::Deadline(double seconds) {
  if (seconds > 0.0 && std::isfinite(seconds)) {
    limited_ = true;
    end_ = Clock::now() + std::chrono::duration_cast<Clock::duration>(
                              std::chrono::duration<double>(seconds));
  }
}

std::string_view violation_name(ViolationKind kind) {
  switch (kind) {
    case ViolationKind::AgentCount: return "agent-count";
    case ViolationKind::WrongStart: return "wrong-start";
    case ViolationKind::OffMap: return "off-map";
    case ViolationKind::Obstacle: return "obstacle";
    case ViolationKind::Jump: return "jump";
    case ViolationKind::VertexConflict: return "vertex-conflict";
    case ViolationKind::EdgeConflict: return "edge-conflict";
    case ViolationKind::FollowConflict: return "follow-conflict";
    case ViolationKind::NotAtGoal: return "not-at-goal";
    case ViolationKind::LengthMismatch: return "length-mismatch";
    case ViolationKind::CostMismatch: return "cost-mismatch";
  }
  return "?";
}

std::vector<Violation> validate_plan(const GridMap& map, std::span<const Cell> starts,
                                     std::span<const Cell> goals, const JointPlan& plan,
                                     TransitionMode mode) {
  std::vector<Violation> out;
  auto report = [&](ViolationKind kind, int agent, int other, int time, std::string msg) {
    out.push_back({kind, agent, other, time, std::move(msg)});
  };
  const int n = plan.num_agents();
  if (n != static_cast<int>(starts.size()) || starts.size() != goals.size()) {
    report(ViolationKind::AgentCount, -1, -1, -1,
           "plan has " + std::to_string(n) + " paths for " + std::to_string(starts.size()) +
               " agents");
    return out;
  }
  int horizon = 0;
  for (int i = 0; i < n; ++i) {
    const Path& p = plan.paths[i];
    if (p.positions.empty()) {
      report(ViolationKind::WrongStart, i, -1, 0, "empty path");
      return out;
    }
    horizon = std::max(horizon, p.length());
  }

  bool geometry_ok = true;
  for (int i = 0; i < n; ++i) {
    const Path& p = plan.paths[i];
    if (p.length() != plan.paths[0].length()) {
      report(ViolationKind::LengthMismatch, i, -1, -1,
             "path length " + std::to_string(p.length()) + " differs from agent 0's " +
                 std::to_string(plan.paths[0].length()));
    }
    if (p.positions.front() != starts[i]) {
      report(ViolationKind::WrongStart, i, -1, 0,
             "starts at " + to_string(p.positions.front()) + " instead of " + to_string(starts[i]));
    }
    for (int t = 0; t <= p.length(); ++t) {
      const Cell c = p.positions[t];
      if (!map.in_bounds(c)) {
        report(ViolationKind::OffMap, i, -1, t, "leaves the map at " + to_string(c));
        geometry_ok = false;
      } else if (map.blocked(c)) {
        report(ViolationKind::Obstacle, i, -1, t, "enters obstacle " + to_string(c));
      }
      if (t > 0 && !action_between(p.positions[t - 1], c)) {
        report(ViolationKind::Jump, i, -1, t,
               "jumps from " + to_string(p.positions[t - 1]) + " to " + to_string(c));
      }
    }
    if (p.positions.back() != goals[i]) {
      report(ViolationKind::NotAtGoal, i, -1, p.length(),
             "ends at " + to_string(p.positions.back()) + " instead of goal " + to_string(goals[i]));
    }
  }
  if (!geometry_ok) return out;

  std::unordered_map<Cell, int> now, next;
  auto occupancy = [&](int t, std::unordered_map<Cell, int>& table) {
    table.clear();
    for (int i = 0; i < n; ++i) {
      auto [it, inserted] = table.try_emplace(plan.paths[i].at(t), i);
      if (!inserted) {
        report(ViolationKind::VertexConflict, it->second, i, t,
               "agents " + std::to_string(it->second) + " and " + std::to_string(i) + " share " +
                   to_string(plan.paths[i].at(t)) + " at t=" + std::to_string(t));
      }
    }
  };
  occupancy(0, now);
  for (int t = 0; t < horizon; ++t) {
    occupancy(t + 1, next);
    for (int i = 0; i < n; ++i) {
      const Cell from = plan.paths[i].at(t);
      const Cell to = plan.paths[i].at(t + 1);
      if (from == to) continue;
      auto it = now.find(to);
      if (it == now.end() || it->second == i) continue;
      const int j = it->second;
      const bool swap = plan.paths[j].at(t + 1) == from;
      if (swap) {
        if (i < j) {
          report(ViolationKind::EdgeConflict, i, j, t,
                 "agents " + std::to_string(i) + " and " + std::to_string(j) + " swap " +
                     to_string(from) + "<->" + to_string(to) + " at t=" + std::to_string(t));
        }
      } else if (mode == TransitionMode::Restricted) {
        report(ViolationKind::FollowConflict, i, j, t,
               "agent " + std::to_string(i) + " enters " + to_string(to) + " occupied by agent " +
                   std::to_string(j) + " at t=" + std::to_string(t));
      }
    }
    std::swap(now, next);
  }

  const JointPlan recomputed = make_joint_plan(plan.paths, goals);
  if (out.empty() && (recomputed.cost != plan.cost || recomputed.makespan != plan.makespan)) {
    report(ViolationKind::CostMismatch, -1, -1, -1,
           "declared cost/makespan " + std::to_string(plan.cost) + "/" +
               std::to_string(plan.makespan) + " but paths give " +
               std::to_string(recomputed.cost) + "/" + std::to_string(recomputed.makespan));
  }
  return out;
}

}  // namespace gridmapf
