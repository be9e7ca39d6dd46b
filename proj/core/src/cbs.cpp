#include "gridmapf/cbs.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <map>
#include <numeric>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace gridmapf {

namespace {

struct Conflict {
  enum class Kind { Vertex, Edge, Follow };
  Kind kind = Kind::Vertex;
  int a = -1;  // Follow: the agent that entered the cell
  int b = -1;  // Follow: the agent that occupied it one step earlier
  int time = 0;  // Vertex: time of co-location; Edge/Follow: arrival time
  Cell cell{};   // Vertex/Follow: contested cell; Edge: a's destination
  Cell from{};   // Edge: a's origin
};

struct ConflictScan {
  std::optional<Conflict> first;
  int count = 0;
};

class ConflictScanner {
 public:
  ConflictScanner(const GridMap& map, TransitionMode mode)
      : map_(map), mode_(mode), now_(map.num_cells(), -1), prev_(map.num_cells(), -1) {}

  ConflictScan scan(const std::vector<Path>& paths, const std::vector<int>& group) {
    ConflictScan out;
    const int n = static_cast<int>(paths.size());
    int horizon = 0;
    for (const Path& p : paths) horizon = std::max(horizon, p.length());

    auto consider = [&](const Conflict& c) {
      ++out.count;
      if (!out.first) {
        out.first = c;
        return;
      }
      const Conflict& f = *out.first;
      auto key = [](const Conflict& x) {
        return std::make_tuple(x.time, std::min(x.a, x.b), std::max(x.a, x.b),
                               static_cast<int>(x.kind));
      };
      if (key(c) < key(f)) out.first = c;
    };

    fill(paths, 0, prev_);
    for (int t = 1; t <= horizon; ++t) {
      for (int i = 0; i < n; ++i) {
        const int idx = map_.index(paths[i].at(t));
        const int j = now_[idx];
        if (j == -1) {
          now_[idx] = i;
        } else if (group[j] != group[i]) {
          consider({Conflict::Kind::Vertex, j, i, t, paths[i].at(t), {}});
        }
      }
      for (int i = 0; i < n; ++i) {
        const Cell from = paths[i].at(t - 1);
        const Cell to = paths[i].at(t);
        if (from == to) continue;
        const int j = prev_[map_.index(to)];
        if (j == -1 || j == i || group[j] == group[i]) continue;
        if (paths[j].at(t) == from) {
          if (i < j) consider({Conflict::Kind::Edge, i, j, t, to, from});
        } else if (mode_ == TransitionMode::Restricted) {
          consider({Conflict::Kind::Follow, i, j, t, to, {}});
        }
      }
      clear(paths, t - 1, prev_);
      std::swap(prev_, now_);
    }
    clear(paths, horizon, prev_);
    return out;
  }

 private:
  void fill(const std::vector<Path>& paths, int t, std::vector<int>& table) {
    for (int i = 0; i < static_cast<int>(paths.size()); ++i) {
      int& slot = table[map_.index(paths[i].at(t))];
      if (slot == -1) slot = i;
    }
  }
  void clear(const std::vector<Path>& paths, int t, std::vector<int>& table) {
    for (const Path& p : paths) table[map_.index(p.at(t))] = -1;
  }

  const GridMap& map_;
  TransitionMode mode_;
  std::vector<int> now_;
  std::vector<int> prev_;
};

struct CtNode {
  std::vector<Constraint> constraints;
  std::vector<int> causes;  // agent whose conflict produced each constraint
  std::vector<Path> paths;
  std::vector<int> group;   // representative (smallest member id) per agent
  int cost = 0;
  int conflicts = 0;
};

struct JointKey {
  std::vector<int> locals;
  int time = 0;
  friend bool operator==(const JointKey&, const JointKey&) = default;
};

struct JointKeyHash {
  std::size_t operator()(const JointKey& k) const noexcept {
    std::size_t h = std::hash<int>{}(k.time);
    for (int v : k.locals) h = h * 1000003u ^ std::hash<int>{}(v);
    return h;
  }
};

struct MemberRules {
  std::unordered_set<long long> vertex;  // cell * kTimeStride + t
  std::set<std::tuple<int, int, int>> edge;
  int last_goal_block = -1;
};

constexpr long long kTimeStride = 1LL << 32;

// Optimal joint plan for a meta-agent under its members' constraints.
// Local state = cell * 2 + done; a done member rests on its goal for good.
class MetaSearch {
 public:
  MetaSearch(const GridMap& map, TransitionMode mode, const Deadline& deadline, SolveStats& stats)
      : map_(map), mode_(mode), deadline_(deadline), stats_(stats) {}

  std::optional<std::vector<Path>> plan(const std::vector<int>& members,
                                        std::span<const Cell> starts, std::span<const Cell> goals,
                                        const std::vector<Constraint>& constraints,
                                        const std::vector<DistanceMap>& dist) {
    const int k = static_cast<int>(members.size());
    std::vector<MemberRules> rules(k);
    int latest = -1;
    for (const Constraint& c : constraints) {
      auto it = std::find(members.begin(), members.end(), c.agent);
      if (it == members.end()) continue;
      MemberRules& r = rules[it - members.begin()];
      latest = std::max(latest, c.time);
      if (c.kind == ConstraintKind::Vertex) {
        r.vertex.insert(map_.index(c.cell) * kTimeStride + c.time);
        if (c.cell == goals[c.agent]) r.last_goal_block = std::max(r.last_goal_block, c.time);
      } else {
        r.edge.emplace(map_.index(c.from), map_.index(c.cell), c.time);
      }
    }
    const int saturation = latest + 1;

    struct Node {
      std::vector<int> locals;
      int time;
      int g;
      int parent;
    };
    std::vector<Node> nodes;
    std::unordered_map<JointKey, int, JointKeyHash> best_g;
    std::unordered_set<JointKey, JointKeyHash> closed;
    using Entry = std::tuple<int, int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

    auto h_of = [&](const std::vector<int>& locals) {
      int h = 0;
      for (int m = 0; m < k; ++m) {
        if (locals[m] & 1) continue;
        const int d = dist[members[m]].at(map_.cell(locals[m] >> 1));
        if (d == kUnreachable) return kUnreachable;
        h += d;
      }
      return h;
    };

    std::vector<int> root(k);
    for (int m = 0; m < k; ++m) {
      const Cell s = starts[members[m]];
      if (rules[m].vertex.contains(map_.index(s) * kTimeStride + 0)) return std::nullopt;
      root[m] = map_.index(s) * 2;
    }
    const int h0 = h_of(root);
    if (h0 == kUnreachable) return std::nullopt;
    nodes.push_back({root, 0, 0, -1});
    best_g[{root, 0}] = 0;
    open.emplace(h0, 0, 0);

    std::vector<int> next(k);
    while (!open.empty()) {
      auto [f, neg_g, id] = open.top();
      open.pop();
      const Node node = nodes[id];
      JointKey key{node.locals, std::min(node.time, saturation)};
      if (closed.contains(key)) continue;
      closed.insert(key);
      if ((++stats_.expansions & 1023) == 0 && deadline_.expired()) throw TimeoutReached{};

      if (std::all_of(node.locals.begin(), node.locals.end(), [](int s) { return s & 1; })) {
        return unwind(nodes, id, members, goals);
      }

      // Depth-first assignment of one option per member.
      auto expand = [&](auto&& self, int m, int step_cost) -> void {
        if (m == k) {
          const int t_next = node.time + 1;
          JointKey nk{next, std::min(t_next, saturation)};
          if (closed.contains(nk)) return;
          const int g = node.g + step_cost;
          auto it = best_g.find(nk);
          if (it != best_g.end() && it->second <= g) return;
          const int h = h_of(next);
          if (h == kUnreachable) return;
          best_g[nk] = g;
          nodes.push_back({next, t_next, g, id});
          ++stats_.generated;
          open.emplace(g + h, -g, static_cast<int>(nodes.size()) - 1);
          return;
        }
        const int cur = node.locals[m];
        const Cell c = map_.cell(cur >> 1);
        if (cur & 1) {
          next[m] = cur;
          if (compatible(m, c, c, node, next)) self(self, m + 1, step_cost);
          return;
        }
        const Cell goal = goals[members[m]];
        if (c == goal && rules[m].last_goal_block <= node.time) {
          next[m] = cur | 1;
          if (compatible(m, c, c, node, next)) self(self, m + 1, step_cost);
        }
        for (Action a : kAllActions) {
          const Cell n = apply(c, a);
          if (map_.blocked(n)) continue;
          if (rules[m].vertex.contains(map_.index(n) * kTimeStride + node.time + 1)) continue;
          if (a != Action::Stay &&
              rules[m].edge.contains({map_.index(c), map_.index(n), node.time})) {
            continue;
          }
          next[m] = map_.index(n) * 2;
          if (compatible(m, c, n, node, next)) self(self, m + 1, step_cost + 1);
        }
      };
      expand(expand, 0, 0);
    }
    return std::nullopt;
  }

 private:
  template <typename NodeT>
  bool compatible(int m, Cell from, Cell to, const NodeT& node, const std::vector<int>& next) const {
    for (int p = 0; p < m; ++p) {
      const Cell p_from = map_.cell(node.locals[p] >> 1);
      const Cell p_to = map_.cell(next[p] >> 1);
      if (p_to == to) return false;
      if (p_to == from && p_from == to) return false;
    }
    if (mode_ == TransitionMode::Restricted && from != to) {
      for (std::size_t p = 0; p < node.locals.size(); ++p) {
        if (static_cast<int>(p) != m && map_.cell(node.locals[p] >> 1) == to) return false;
      }
    }
    return true;
  }

  template <typename NodeT>
  std::vector<Path> unwind(const std::vector<NodeT>& nodes, int id, const std::vector<int>& members,
                           std::span<const Cell> goals) const {
    const int k = static_cast<int>(members.size());
    std::vector<Path> paths(k);
    for (int i = id; i != -1; i = nodes[i].parent) {
      for (int m = 0; m < k; ++m) paths[m].positions.push_back(map_.cell(nodes[i].locals[m] >> 1));
    }
    for (int m = 0; m < k; ++m) {
      std::reverse(paths[m].positions.begin(), paths[m].positions.end());
      const int arrival = arrival_time(paths[m], goals[members[m]]).value_or(paths[m].length());
      paths[m].positions.resize(arrival + 1);
    }
    return paths;
  }

  const GridMap& map_;
  TransitionMode mode_;
  const Deadline& deadline_;
  SolveStats& stats_;
};

class CbsSolver {
 public:
  CbsSolver(const GridMap& map, std::span<const Cell> starts, std::span<const Cell> goals,
            const CbsOptions& options, const Deadline& deadline, SolveStats& stats)
      : map_(map), starts_(starts), goals_(goals), options_(options), deadline_(deadline),
        stats_(stats), scanner_(map, options.mode), meta_(map, options.mode, deadline, stats) {
    for (Cell g : goals) dist_.emplace_back(map, g);
  }

  SolveResult solve() {
    const int n = static_cast<int>(starts_.size());
    SolveResult result;
    for (int i = 0; i < n; ++i) {
      if (dist_[i].at(starts_[i]) == kUnreachable) return result;
    }
    std::set<Cell> distinct_goals(goals_.begin(), goals_.end());
    if (static_cast<int>(distinct_goals.size()) != n) return result;

    CtNode root;
    root.group.resize(n);
    std::iota(root.group.begin(), root.group.end(), 0);
    root.paths.resize(n);
    for (int i = 0; i < n; ++i) {
      if (!replan(root, i)) return result;
    }
    push(std::move(root));

    while (!open_.empty()) {
      auto [cost, conflicts, id] = open_.top();
      open_.pop();
      CtNode node = std::move(nodes_[id]);
      ++stats_.expansions;
      if (deadline_.expired()) throw TimeoutReached{};

      const ConflictScan scan = scanner_.scan(node.paths, node.group);
      if (!scan.first) {
        result.status = SolveStatus::Solved;
        result.plan = make_joint_plan(std::move(node.paths), goals_);
        return result;
      }
      const Conflict& c = *scan.first;
      if (try_merge(node, c.a, c.b)) continue;

      for (auto [agent, other, constraint] : branch_constraints(c)) {
        CtNode child = node;
        child.constraints.push_back(constraint);
        child.causes.push_back(other);
        if (replan(child, agent)) push(std::move(child));
      }
    }
    return result;
  }

 private:
  static std::vector<std::tuple<int, int, Constraint>> branch_constraints(const Conflict& c) {
    switch (c.kind) {
      case Conflict::Kind::Vertex:
        return {{c.a, c.b, Constraint::vertex(c.a, c.cell, c.time)},
                {c.b, c.a, Constraint::vertex(c.b, c.cell, c.time)}};
      case Conflict::Kind::Edge:
        return {{c.a, c.b, Constraint::edge(c.a, c.from, c.cell, c.time - 1)},
                {c.b, c.a, Constraint::edge(c.b, c.cell, c.from, c.time - 1)}};
      case Conflict::Kind::Follow:
        return {{c.a, c.b, Constraint::vertex(c.a, c.cell, c.time)},
                {c.b, c.a, Constraint::vertex(c.b, c.cell, c.time - 1)}};
    }
    return {};
  }

  // Returns true if the node was consumed by a merge (re-queued or pruned).
  bool try_merge(CtNode& node, int a, int b) {
    if (options_.merge_bound < 0) return false;
    const auto key = std::make_pair(std::min(a, b), std::max(a, b));
    if (++pair_conflicts_[key] <= options_.merge_bound) return false;
    const int ga = node.group[a];
    const int gb = node.group[b];
    const int size = static_cast<int>(std::count(node.group.begin(), node.group.end(), ga) +
                                      std::count(node.group.begin(), node.group.end(), gb));
    if (size > options_.max_group_size) return false;
    if (std::pow(static_cast<double>(map_.num_cells()), size) > options_.merge_state_limit) return false;

    const int rep = std::min(ga, gb);
    for (int& g : node.group) {
      if (g == ga || g == gb) g = rep;
    }
    // Constraints between members of the merged group are now handled inside
    // the joint low level.
    std::vector<Constraint> kept;
    std::vector<int> kept_causes;
    for (std::size_t i = 0; i < node.constraints.size(); ++i) {
      const int owner = node.constraints[i].agent;
      const int cause = node.causes[i];
      if (node.group[owner] == rep && node.group[cause] == rep) continue;
      kept.push_back(node.constraints[i]);
      kept_causes.push_back(cause);
    }
    node.constraints = std::move(kept);
    node.causes = std::move(kept_causes);
    if (replan(node, rep)) push(std::move(node));
    return true;
  }

  bool replan(CtNode& node, int agent) {
    std::vector<int> members;
    for (int i = 0; i < static_cast<int>(node.group.size()); ++i) {
      if (node.group[i] == node.group[agent]) members.push_back(i);
    }
    if (members.size() == 1) {
      std::vector<Path> others;
      for (int i = 0; i < static_cast<int>(node.paths.size()); ++i) {
        if (i != agent) others.push_back(node.paths[i]);
      }
      const ConflictTable avoid(map_, others, options_.mode == TransitionMode::Restricted);
      auto path = space_time_astar(map_, agent, starts_[agent], goals_[agent], node.constraints,
                                   lossless_horizon(map_, node.constraints), &dist_[agent], &avoid);
      if (!path) return false;
      node.paths[agent] = std::move(*path);
    } else {
      auto paths = meta_.plan(members, starts_, goals_, node.constraints, dist_);
      if (!paths) return false;
      for (std::size_t m = 0; m < members.size(); ++m) node.paths[members[m]] = std::move((*paths)[m]);
    }
    node.cost = 0;
    for (const Path& p : node.paths) node.cost += p.length();
    return true;
  }

  void push(CtNode node) {
    node.conflicts = scanner_.scan(node.paths, node.group).count;
    ++stats_.generated;
    const int id = static_cast<int>(nodes_.size());
    open_.emplace(node.cost, node.conflicts, id);
    nodes_.push_back(std::move(node));
  }

  const GridMap& map_;
  std::span<const Cell> starts_;
  std::span<const Cell> goals_;
  const CbsOptions& options_;
  const Deadline& deadline_;
  SolveStats& stats_;
  ConflictScanner scanner_;
  MetaSearch meta_;
  std::vector<DistanceMap> dist_;
  std::vector<CtNode> nodes_;
  std::map<std::pair<int, int>, int> pair_conflicts_;
  using Entry = std::tuple<int, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open_;
};

}  // namespace

SolveResult cbs_solve(const GridMap& map, std::span<const Cell> starts,
                      std::span<const Cell> goals, const CbsOptions& options) {
  if (starts.size() != goals.size()) throw std::invalid_argument("one goal per start required");
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (map.blocked(starts[i]) || map.blocked(goals[i])) {
      throw std::invalid_argument("agent " + std::to_string(i) + " has a blocked start or goal");
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Deadline deadline(options.timeout_seconds);
  SolveResult result;
  SolveStats stats;
  try {
    CbsSolver solver(map, starts, goals, options, deadline, stats);
    result = solver.solve();
  } catch (const TimeoutReached&) {
    result = SolveResult{SolveStatus::Timeout, std::nullopt, {}};
  }
  result.stats = stats;
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace gridmapf
