#include "gridmapf/odrmstar.hpp"

#include <algorithm>
#include <chrono>
#include <limits>
#include <map>
#include <memory>
#include <queue>
#include <set>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

namespace gridmapf {

namespace {

// Local state of one agent: cell index * 2 + done flag.
using Config = std::vector<int>;
using Group = std::vector<int>;           // sorted agent indices
using CollisionSet = std::vector<Group>;  // pairwise disjoint groups

constexpr int kInfinity = std::numeric_limits<int>::max();

struct ConfigHash {
  std::size_t operator()(const Config& c) const noexcept {
    std::size_t h = c.size();
    for (int v : c) h = (h ^ static_cast<std::size_t>(v)) * 0x100000001b3ull;
    return h;
  }
};

bool intersects(const Group& a, const Group& b) {
  auto i = a.begin();
  auto j = b.begin();
  while (i != a.end() && j != b.end()) {
    if (*i == *j) return true;
    if (*i < *j) ++i; else ++j;
  }
  return false;
}

void merge_group(CollisionSet& set, Group group) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (auto it = set.begin(); it != set.end(); ++it) {
      if (intersects(*it, group)) {
        Group u;
        std::set_union(it->begin(), it->end(), group.begin(), group.end(), std::back_inserter(u));
        group = std::move(u);
        set.erase(it);
        changed = true;
        break;
      }
    }
  }
  set.push_back(std::move(group));
  std::sort(set.begin(), set.end());
}

bool is_subset(const CollisionSet& inner, const CollisionSet& outer) {
  return std::all_of(inner.begin(), inner.end(), [&](const Group& g) {
    return std::any_of(outer.begin(), outer.end(), [&](const Group& h) {
      return std::includes(h.begin(), h.end(), g.begin(), g.end());
    });
  });
}

inline int cell_of(int local) { return local >> 1; }
inline bool done(int local) { return (local & 1) != 0; }

class Planner;

class Context {
 public:
  Context(const GridMap& map, std::span<const Cell> goals, const OdrmstarOptions& options,
          const Deadline& deadline, SolveStats& stats)
      : map(map), mode(options.mode), epsilon(options.epsilon), deadline(deadline), stats(stats),
        goal_index(goals.size()), policy_next(goals.size()), owner_new(map.num_cells(), -1),
        owner_old(map.num_cells(), -1) {
    static constexpr std::array<Action, 4> kOrder = {Action::North, Action::West, Action::East,
                                                     Action::South};
    for (std::size_t a = 0; a < goals.size(); ++a) {
      goal_index[a] = map.index(goals[a]);
      dist.emplace_back(map, goals[a]);
      auto& next = policy_next[a];
      next.assign(map.num_cells(), -1);
      for (int i = 0; i < map.num_cells(); ++i) {
        const Cell c = map.cell(i);
        const int d = dist[a].at(c);
        if (map.blocked(c) || d == kUnreachable || d == 0) continue;
        for (Action act : kOrder) {
          const Cell n = apply(c, act);
          if (map.passable(n) && dist[a].at(n) == d - 1) {
            next[i] = map.index(n);
            break;
          }
        }
      }
    }
  }

  int heuristic(int agent, int local) const {
    return done(local) ? 0 : dist[agent].at(map.cell(cell_of(local)));
  }

  int policy(int agent, int local) const {
    if (done(local)) return local;
    const int c = cell_of(local);
    if (c == goal_index[agent]) return local | 1;
    return policy_next[agent][c] * 2;
  }

  static int step_cost(int to) { return done(to) ? 0 : 1; }

  void tick() {
    if ((++stats.expansions & 255) == 0 && deadline.expired()) throw TimeoutReached{};
  }

  Planner& planner(const std::vector<int>& agents);

  // Colliding agent pairs for the joint move old -> next (indices into the
  // configs), merged into disjoint groups.
  CollisionSet collisions(const Config& old, const Config& next) {
    CollisionSet out;
    const int k = static_cast<int>(old.size());
    for (int i = 0; i < k; ++i) {
      int& slot = owner_new[cell_of(next[i])];
      if (slot != -1) merge_group(out, {slot, i});
      else slot = i;
    }
    for (int i = 0; i < k; ++i) owner_old[cell_of(old[i])] = i;
    for (int i = 0; i < k; ++i) {
      const int from = cell_of(old[i]);
      const int to = cell_of(next[i]);
      if (from == to) continue;
      const int j = owner_old[to];
      if (j == -1 || j == i) continue;
      if (cell_of(next[j]) == from) {
        if (i < j) merge_group(out, {i, j});
      } else if (mode == TransitionMode::Restricted) {
        merge_group(out, {std::min(i, j), std::max(i, j)});
      }
    }
    for (int i = 0; i < k; ++i) {
      owner_new[cell_of(next[i])] = -1;
      owner_old[cell_of(old[i])] = -1;
    }
    return out;
  }

  const GridMap& map;
  TransitionMode mode;
  double epsilon;
  const Deadline& deadline;
  SolveStats& stats;
  std::vector<DistanceMap> dist;
  std::vector<int> goal_index;
  std::vector<std::vector<int>> policy_next;

 private:
  std::map<std::vector<int>, std::unique_ptr<Planner>> planners_;
  std::vector<int> owner_new;
  std::vector<int> owner_old;
};

// M* over a fixed subset of agents. Collision sets persist across queries;
// search state is per query.
class Planner {
 public:
  Planner(Context& ctx, std::vector<int> agents) : ctx_(ctx), agents_(std::move(agents)) {}

  /// Next configuration on a path from `from` to the all-done configuration.
  std::optional<Config> next(const Config& from) {
    if (all_done(from)) return from;
    if (auto it = successor_.find(from); it != successor_.end()) return it->second.first;
    if (infeasible_.contains(from)) return std::nullopt;
    search(from);
    if (auto it = successor_.find(from); it != successor_.end()) return it->second.first;
    return std::nullopt;
  }

  /// Full path of configurations from `from`, or nullopt if none exists.
  std::optional<std::vector<Config>> search(const Config& from) {
    Query q(*this);
    return q.run(from);
  }

 private:
  static bool all_done(const Config& c) {
    return std::all_of(c.begin(), c.end(), [](int s) { return done(s); });
  }

  int size() const { return static_cast<int>(agents_.size()); }

  CollisionSet& collision_set(const Config& c) { return collisions_[c]; }

  class Query {
   public:
    explicit Query(Planner& p) : p_(p), ctx_(p.ctx_), k_(p.size()) {}

    std::optional<std::vector<Config>> run(const Config& start) {
      const int root = standard_node(start);
      nodes_[root].g = 0;
      push_standard(root);
      while (!open_.empty()) {
        auto [f, neg_g, seq, kind, id, version] = open_.top();
        open_.pop();
        if (kind == 0) {
          if (nodes_[id].version != version) continue;
          ctx_.tick();
          if (all_done(nodes_[id].config)) return finish(id);
          expand_standard(id);
        } else {
          if (od_[id].version != version) continue;
          ctx_.tick();
          const PartialNode node = od_[id];
          expand_partial(node.base, node.partial, node.g);
        }
      }
      for (const StandardNode& n : nodes_) {
        if (n.g != kInfinity) p_.infeasible_.insert(n.config);
      }
      return std::nullopt;
    }

   private:
    struct StandardNode {
      Config config;
      int g = kInfinity;
      int parent = -1;
      std::vector<int> back;
      CollisionSet* coll = nullptr;
      int version = 0;
      int h = 0;
    };
    struct PartialNode {
      int base;
      Config partial;  // new local states of the first partial.size() agents
      int g;
      int version = 0;
    };

    int heuristic(const Config& c) const {
      int h = 0;
      for (int i = 0; i < k_; ++i) h += ctx_.heuristic(p_.agents_[i], c[i]);
      return h;
    }

    int standard_node(const Config& c) {
      auto [it, inserted] = index_.try_emplace(c, static_cast<int>(nodes_.size()));
      if (inserted) {
        StandardNode n;
        n.config = c;
        n.coll = &p_.collision_set(c);
        n.h = heuristic(c);
        nodes_.push_back(std::move(n));
        ++ctx_.stats.generated;
      }
      return it->second;
    }

    void push_standard(int id) {
      StandardNode& n = nodes_[id];
      ++n.version;
      open_.emplace(n.g + ctx_.epsilon * n.h, -n.g, seq_++, 0, id, n.version);
    }

    std::optional<std::vector<Config>> finish(int goal) {
      std::vector<Config> path;
      for (int i = goal; i != -1; i = nodes_[i].parent) path.push_back(nodes_[i].config);
      std::reverse(path.begin(), path.end());
      // Cache successors so later queries can follow this path; the
      // remaining-steps count keeps successor chains acyclic.
      auto& cache = p_.successor_;
      cache.try_emplace(path.back(), path.back(), 0);
      for (int i = static_cast<int>(path.size()) - 2; i >= 0; --i) {
        const int remaining = cache.at(path[i + 1]).second + 1;
        cache.try_emplace(path[i], path[i + 1], remaining);
      }
      return path;
    }

    void expand_standard(int id) {
      const CollisionSet coll = *nodes_[id].coll;
      const bool fully_coupled =
          k_ > 1 && std::any_of(coll.begin(), coll.end(),
                                [&](const Group& g) { return static_cast<int>(g.size()) == k_; });
      if (fully_coupled) {
        expand_partial(id, {}, nodes_[id].g);
        return;
      }
      const Config current = nodes_[id].config;
      Config next(k_);
      std::vector<std::uint8_t> grouped(k_, 0);
      for (const Group& g : coll) {
        std::vector<int> ids;
        Config sub;
        for (int i : g) {
          ids.push_back(p_.agents_[i]);
          sub.push_back(current[i]);
          grouped[i] = 1;
        }
        auto step = ctx_.planner(ids).next(sub);
        if (!step) {
          for (int pred : std::vector<int>(nodes_[id].back)) backprop(pred, *nodes_[id].coll);
          return;
        }
        for (std::size_t j = 0; j < g.size(); ++j) next[g[j]] = (*step)[j];
      }
      int cost = 0;
      for (int i = 0; i < k_; ++i) {
        if (!grouped[i]) next[i] = ctx_.policy(p_.agents_[i], current[i]);
        cost += Context::step_cost(next[i]);
      }
      relax(id, next, cost);
    }

    // Operator decomposition: assign agent partial.size() of base's config.
    void expand_partial(int base, const Config& partial, int g) {
      const Config from_cfg = nodes_[base].config;
      const int m = static_cast<int>(partial.size());
      const int cur = from_cfg[m];
      const int from = cell_of(cur);
      const int agent = p_.agents_[m];

      std::vector<int> options;
      if (done(cur)) {
        options.push_back(cur);
      } else {
        if (from == ctx_.goal_index[agent]) options.push_back(cur | 1);
        const Cell c = ctx_.map.cell(from);
        for (Action a : kAllActions) {
          const Cell n = apply(c, a);
          if (ctx_.map.passable(n)) options.push_back(ctx_.map.index(n) * 2);
        }
      }

      for (int option : options) {
        const int to = cell_of(option);
        bool ok = true;
        for (int p = 0; p < m && ok; ++p) {
          const int p_to = cell_of(partial[p]);
          if (p_to == to || (p_to == from && cell_of(from_cfg[p]) == to)) ok = false;
        }
        if (ok && ctx_.mode == TransitionMode::Restricted && to != from) {
          for (int p = 0; p < k_ && ok; ++p) {
            if (p != m && cell_of(from_cfg[p]) == to) ok = false;
          }
        }
        if (!ok) continue;

        Config extended = partial;
        extended.push_back(option);
        const int ng = g + Context::step_cost(option);
        if (m + 1 == k_) {
          relax(base, extended, ng - nodes_[base].g);
          continue;
        }
        Config key = extended;
        key.push_back(base);
        auto [it, inserted] = od_index_.try_emplace(std::move(key), static_cast<int>(od_.size()));
        if (inserted) {
          od_.push_back({base, std::move(extended), kInfinity, 0});
          ++ctx_.stats.generated;
        }
        PartialNode& node = od_[it->second];
        if (ng >= node.g) continue;
        node.g = ng;
        ++node.version;
        int h = 0;
        for (int p = 0; p < k_; ++p) {
          h += ctx_.heuristic(p_.agents_[p], p <= m ? node.partial[p] : from_cfg[p]);
        }
        open_.emplace(ng + ctx_.epsilon * h, -ng, seq_++, 1, it->second, node.version);
      }
    }

    void relax(int from, const Config& next, int cost) {
      const int to = standard_node(next);
      auto& back = nodes_[to].back;
      if (std::find(back.begin(), back.end(), from) == back.end()) back.push_back(from);

      const CollisionSet found = ctx_.collisions(nodes_[from].config, next);
      if (!found.empty()) {
        // Edge conflicts belong to the move, not to the target configuration.
        CollisionSet merged = *nodes_[to].coll;
        for (const Group& g : found) merge_group(merged, g);
        backprop(from, merged);
        return;
      }
      if (!nodes_[to].coll->empty()) backprop(from, *nodes_[to].coll);
      const int g = nodes_[from].g + cost;
      if (g < nodes_[to].g) {
        nodes_[to].g = g;
        nodes_[to].parent = from;
        push_standard(to);
      }
    }

    void backprop(int start, const CollisionSet& incoming) {
      std::vector<std::pair<int, CollisionSet>> stack{{start, incoming}};
      while (!stack.empty()) {
        auto [id, coll] = std::move(stack.back());
        stack.pop_back();
        CollisionSet& mine = *nodes_[id].coll;
        if (is_subset(coll, mine)) continue;
        for (const Group& g : coll) merge_group(mine, g);
        if (nodes_[id].g != kInfinity) push_standard(id);
        for (int pred : nodes_[id].back) stack.emplace_back(pred, mine);
      }
    }

    Planner& p_;
    Context& ctx_;
    int k_;
    std::vector<StandardNode> nodes_;
    std::unordered_map<Config, int, ConfigHash> index_;
    std::vector<PartialNode> od_;
    std::unordered_map<Config, int, ConfigHash> od_index_;
    long long seq_ = 0;
    using Entry = std::tuple<double, int, long long, int, int, int>;
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open_;
  };

  Context& ctx_;
  std::vector<int> agents_;
  std::unordered_map<Config, CollisionSet, ConfigHash> collisions_;
  std::unordered_map<Config, std::pair<Config, int>, ConfigHash> successor_;
  std::unordered_set<Config, ConfigHash> infeasible_;
};

Planner& Context::planner(const std::vector<int>& agents) {
  auto& slot = planners_[agents];
  if (!slot) slot = std::make_unique<Planner>(*this, agents);
  return *slot;
}

}  // namespace

SolveResult odrmstar_solve(const GridMap& map, std::span<const Cell> starts,
                           std::span<const Cell> goals, const OdrmstarOptions& options) {
  if (starts.size() != goals.size()) throw std::invalid_argument("one goal per start required");
  if (!(options.epsilon >= 1.0)) throw std::invalid_argument("epsilon must be at least 1");
  for (std::size_t i = 0; i < starts.size(); ++i) {
    if (map.blocked(starts[i]) || map.blocked(goals[i])) {
      throw std::invalid_argument("agent " + std::to_string(i) + " has a blocked start or goal");
    }
  }
  const auto t0 = std::chrono::steady_clock::now();
  const Deadline deadline(options.timeout_seconds);
  SolveStats stats;
  SolveResult result;
  try {
    Context ctx(map, goals, options, deadline, stats);
    const int n = static_cast<int>(starts.size());
    bool feasible = std::set<Cell>(goals.begin(), goals.end()).size() == goals.size();
    for (int i = 0; i < n && feasible; ++i) {
      if (ctx.dist[i].at(starts[i]) == kUnreachable) feasible = false;
    }
    if (feasible) {
      std::vector<int> everyone(n);
      Config start(n);
      for (int i = 0; i < n; ++i) {
        everyone[i] = i;
        start[i] = map.index(starts[i]) * 2;
      }
      if (auto configs = ctx.planner(everyone).search(start)) {
        std::vector<Path> paths(n);
        for (const Config& c : *configs) {
          for (int i = 0; i < n; ++i) paths[i].positions.push_back(map.cell(cell_of(c[i])));
        }
        result.status = SolveStatus::Solved;
        result.plan = make_joint_plan(std::move(paths), goals);
      }
    }
  } catch (const TimeoutReached&) {
    result = SolveResult{SolveStatus::Timeout, std::nullopt, {}};
  }
  result.stats = stats;
  result.stats.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

}  // namespace gridmapf
