#include "gridmapf/joint_oracle.hpp"

#include <algorithm>
#include <limits>
#include <queue>
#include <stdexcept>

namespace gridmapf {

namespace {

// State = agent cells plus a per-agent "finished" bit. A finished agent has
// arrived for good and no longer accrues cost.
struct OracleState {
  std::array<int, kOracleMaxAgents> cell{};
  unsigned finished = 0;
};

}  // namespace

std::optional<JointPlan> joint_oracle(const GridMap& map, std::span<const Cell> starts,
                                      std::span<const Cell> goals, TransitionMode mode) {
  const int n = static_cast<int>(starts.size());
  if (n > kOracleMaxAgents || map.height() > kOracleMaxSide || map.width() > kOracleMaxSide) {
    throw std::invalid_argument("joint_oracle is limited to 3 agents on maps of side <= 6");
  }
  if (goals.size() != starts.size()) throw std::invalid_argument("one goal per start required");
  for (int i = 0; i < n; ++i) {
    if (map.blocked(starts[i]) || map.blocked(goals[i])) {
      throw std::invalid_argument("joint_oracle: blocked start or goal");
    }
  }
  if (n == 0) return JointPlan{};

  const int cells = map.num_cells();
  auto encode = [&](const OracleState& s) {
    long long key = s.finished;
    for (int i = 0; i < n; ++i) key = key * cells + s.cell[i];
    return key;
  };
  long long num_states = 1LL << n;
  for (int i = 0; i < n; ++i) num_states *= cells;

  std::vector<int> best(num_states, std::numeric_limits<int>::max());
  std::vector<long long> parent(num_states, -1);
  std::vector<OracleState> decoded(num_states);

  OracleState start;
  for (int i = 0; i < n; ++i) start.cell[i] = map.index(starts[i]);
  const unsigned all_finished = (1u << n) - 1;

  using Item = std::pair<int, long long>;
  std::priority_queue<Item, std::vector<Item>, std::greater<>> frontier;
  const long long start_key = encode(start);
  best[start_key] = 0;
  decoded[start_key] = start;
  frontier.emplace(0, start_key);

  long long goal_key = -1;
  while (!frontier.empty()) {
    auto [cost, key] = frontier.top();
    frontier.pop();
    if (cost != best[key]) continue;
    const OracleState s = decoded[key];
    if (s.finished == all_finished) {
      goal_key = key;
      break;
    }

    // Per-agent options: (next cell, finished after the step, step cost).
    struct Option {
      int cell;
      bool finished;
      int cost;
    };
    std::array<std::vector<Option>, kOracleMaxAgents> options;
    for (int i = 0; i < n; ++i) {
      if (s.finished & (1u << i)) {
        options[i].push_back({s.cell[i], true, 0});
        continue;
      }
      const Cell here = map.cell(s.cell[i]);
      if (here == goals[i]) options[i].push_back({s.cell[i], true, 0});
      for (Action a : kAllActions) {
        const Cell there = apply(here, a);
        if (map.passable(there)) options[i].push_back({map.index(there), false, 1});
      }
    }

    std::array<std::size_t, kOracleMaxAgents> pick{};
    while (true) {
      OracleState t;
      int step_cost = 0;
      bool valid = true;
      for (int i = 0; i < n; ++i) {
        const Option& o = options[i][pick[i]];
        t.cell[i] = o.cell;
        if (o.finished) t.finished |= 1u << i;
        step_cost += o.cost;
      }
      for (int i = 0; i < n && valid; ++i) {
        for (int j = i + 1; j < n && valid; ++j) {
          if (t.cell[i] == t.cell[j]) valid = false;
          if (t.cell[i] == s.cell[j] && t.cell[j] == s.cell[i] && s.cell[i] != s.cell[j]) valid = false;
        }
      }
      if (valid && mode == TransitionMode::Restricted) {
        for (int i = 0; i < n && valid; ++i) {
          if (t.cell[i] == s.cell[i]) continue;
          for (int j = 0; j < n && valid; ++j) {
            if (j != i && t.cell[i] == s.cell[j]) valid = false;
          }
        }
      }
      if (valid) {
        const long long tk = encode(t);
        if (cost + step_cost < best[tk]) {
          best[tk] = cost + step_cost;
          parent[tk] = key;
          decoded[tk] = t;
          frontier.emplace(best[tk], tk);
        }
      }
      int i = 0;
      while (i < n && ++pick[i] == options[i].size()) pick[i++] = 0;
      if (i == n) break;
    }
  }
  if (goal_key < 0) return std::nullopt;

  std::vector<Path> paths(n);
  for (long long k = goal_key; k != -1; k = parent[k]) {
    for (int i = 0; i < n; ++i) paths[i].positions.push_back(map.cell(decoded[k].cell[i]));
  }
  for (Path& p : paths) std::reverse(p.positions.begin(), p.positions.end());
  JointPlan plan = make_joint_plan(std::move(paths), goals);
  // The search cost is the sum of arrival times of the chosen plan.
  if (plan.cost != best[goal_key]) {
    throw std::logic_error("joint_oracle: reconstructed cost disagrees with search cost");
  }
  return plan;
}

}  // namespace gridmapf
