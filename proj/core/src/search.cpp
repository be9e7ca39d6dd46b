#include "gridmapf/search.hpp"

#include <algorithm>
#include <deque>
#include <queue>
#include <stdexcept>
#include <tuple>
#include <unordered_set>

namespace gridmapf {

namespace {

constexpr std::array<Action, 4> kMoves = {Action::North, Action::West, Action::East,
                                          Action::South};

void require_passable(const GridMap& map, Cell c, const char* what) {
  if (map.blocked(c)) {
    throw std::invalid_argument(std::string(what) + " " + to_string(c) +
                                " is outside the map or on an obstacle");
  }
}

Path unwind(const std::vector<int>& parent, const GridMap& map, int goal_index) {
  Path path;
  for (int i = goal_index; i != -1; i = parent[i]) path.positions.push_back(map.cell(i));
  std::reverse(path.positions.begin(), path.positions.end());
  return path;
}

}  // namespace

DistanceMap::DistanceMap(const GridMap& map, Cell target)
    : width_(map.width()), target_(target), dist_(map.num_cells(), kUnreachable) {
  if (map.blocked(target)) return;
  std::deque<Cell> frontier{target};
  dist_[map.index(target)] = 0;
  while (!frontier.empty()) {
    Cell c = frontier.front();
    frontier.pop_front();
    const int d = dist_[map.index(c)];
    for (Action a : kMoves) {
      Cell n = apply(c, a);
      if (map.blocked(n) || dist_[map.index(n)] != kUnreachable) continue;
      dist_[map.index(n)] = d + 1;
      frontier.push_back(n);
    }
  }
}

std::optional<Path> astar(const GridMap& map, Cell start, Cell goal,
                          std::span<const Cell> extra_obstacles) {
  require_passable(map, start, "start");
  require_passable(map, goal, "goal");
  std::vector<std::uint8_t> mask(map.num_cells(), 0);
  for (Cell c : extra_obstacles) {
    if (map.in_bounds(c)) mask[map.index(c)] = 1;
  }
  return astar_masked(map, start, goal, mask);
}

std::optional<Path> astar_masked(const GridMap& map, Cell start, Cell goal,
                                 std::span<const std::uint8_t> blocked_mask) {
  require_passable(map, start, "start");
  require_passable(map, goal, "goal");
  if (start == goal) return Path{{start}};
  if (!blocked_mask.empty() && blocked_mask[map.index(goal)]) return std::nullopt;

  const int n = map.num_cells();
  std::vector<int> g(n, kUnreachable);
  std::vector<int> parent(n, -1);
  std::vector<std::uint8_t> closed(n, 0);
  // (f, cell index) in a min-heap: equal f resolves to the smaller (row, col).
  using Entry = std::pair<int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  const int s = map.index(start);
  const int goal_index = map.index(goal);
  g[s] = 0;
  open.emplace(manhattan(start, goal), s);
  while (!open.empty()) {
    auto [f, i] = open.top();
    open.pop();
    if (closed[i]) continue;
    closed[i] = 1;
    if (i == goal_index) return unwind(parent, map, goal_index);
    const Cell c = map.cell(i);
    for (Action a : kMoves) {
      const Cell nc = apply(c, a);
      if (map.blocked(nc)) continue;
      const int j = map.index(nc);
      if (closed[j] || (!blocked_mask.empty() && blocked_mask[j])) continue;
      if (g[i] + 1 < g[j]) {
        g[j] = g[i] + 1;
        parent[j] = i;
        open.emplace(g[j] + manhattan(nc, goal), j);
      }
    }
  }
  return std::nullopt;
}

int lossless_horizon(const GridMap& map, std::span<const Constraint> constraints) {
  int latest = -1;
  for (const Constraint& c : constraints) latest = std::max(latest, c.time);
  return latest + 1 + map.num_cells();
}

namespace {

constexpr long long visit_key(int cell, int t) { return (static_cast<long long>(t) << 32) | cell; }
constexpr long long move_key(int from, int to, int t) {
  return (static_cast<long long>(t) << 42) | (static_cast<long long>(from) << 21) | to;
}

}  // namespace

ConflictTable::ConflictTable(const GridMap& map, std::span<const Path> others, bool count_follow)
    : width_(map.width()), count_follow_(count_follow),
      rest_from_(map.num_cells(), std::numeric_limits<int>::max()) {
  const auto index = [&](Cell c) { return c.row * width_ + c.col; };
  for (const Path& p : others) {
    if (p.positions.empty()) continue;
    const int len = p.length();
    horizon_ = std::max(horizon_, len);
    for (int t = 0; t < len; ++t) {
      ++visits_[visit_key(index(p.positions[t]), t)];
      if (p.positions[t] != p.positions[t + 1]) {
        moves_.insert(move_key(index(p.positions[t]), index(p.positions[t + 1]), t));
      }
    }
    int& rest = rest_from_[index(p.positions.back())];
    rest = std::min(rest, len);
  }
}

int ConflictTable::occupied(int cell, int t) const {
  int n = t >= rest_from_[cell] ? 1 : 0;
  if (t < horizon_) {
    if (auto it = visits_.find(visit_key(cell, t)); it != visits_.end()) n += it->second;
  }
  return n;
}

int ConflictTable::count(int from, int to, int t) const {
  int n = occupied(to, t + 1);
  if (from != to) {
    if (t < horizon_ && moves_.contains(move_key(to, from, t))) ++n;
    if (count_follow_) n += occupied(to, t);
  }
  return n;
}

namespace {

struct StateKey {
  int cell;
  int time;
  friend bool operator==(const StateKey&, const StateKey&) = default;
};

struct StateKeyHash {
  std::size_t operator()(const StateKey& k) const noexcept {
    return std::hash<long long>{}((static_cast<long long>(k.time) << 32) ^ k.cell);
  }
};

struct EdgeKey {
  int from;
  int to;
  int time;
  friend bool operator==(const EdgeKey&, const EdgeKey&) = default;
};

struct EdgeKeyHash {
  std::size_t operator()(const EdgeKey& k) const noexcept {
    std::size_t h = std::hash<int>{}(k.from);
    h = h * 1000003u ^ std::hash<int>{}(k.to);
    return h * 1000003u ^ std::hash<int>{}(k.time);
  }
};

}  // namespace

std::optional<Path> space_time_astar(const GridMap& map, int agent, Cell start, Cell goal,
                                     std::span<const Constraint> constraints, int horizon,
                                     const DistanceMap* heuristic, const ConflictTable* avoid) {
  if (map.blocked(start) || map.blocked(goal)) return std::nullopt;

  std::unordered_set<StateKey, StateKeyHash> vertex_forbidden;
  std::unordered_set<EdgeKey, EdgeKeyHash> edge_forbidden;
  int latest = -1;
  int last_goal_block = -1;
  for (const Constraint& c : constraints) {
    if (c.agent != agent) continue;
    latest = std::max(latest, c.time);
    if (c.kind == ConstraintKind::Vertex) {
      if (!map.in_bounds(c.cell)) continue;
      vertex_forbidden.insert({map.index(c.cell), c.time});
      if (c.cell == goal) last_goal_block = std::max(last_goal_block, c.time);
    } else {
      if (!map.in_bounds(c.cell) || !map.in_bounds(c.from)) continue;
      edge_forbidden.insert({map.index(c.from), map.index(c.cell), c.time});
    }
  }
  if (vertex_forbidden.contains({map.index(start), 0})) return std::nullopt;

  DistanceMap local;
  if (heuristic == nullptr || heuristic->target() != goal) {
    local = DistanceMap(map, goal);
    heuristic = &local;
  }
  if (heuristic->at(start) == kUnreachable) return std::nullopt;

  // Past the last constraint time every timestep looks the same, so states
  // collapse onto (cell, saturation).
  const int saturation = std::max(latest, avoid ? avoid->horizon() : -1) + 1;
  const int layers = saturation + 1;
  const auto slot = [&](int cell, int t) {
    return static_cast<std::size_t>(cell) * layers + std::min(t, saturation);
  };

  struct Node {
    int cell;
    int time;
    int parent;
    int conflicts;
  };
  std::vector<Node> nodes;
  std::vector<std::uint8_t> closed(static_cast<std::size_t>(map.num_cells()) * layers, 0);
  // (f, conflicts, -t, insertion order): deeper nodes first among equal f
  // and conflict count.
  using Entry = std::tuple<int, int, int, int>;
  std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

  nodes.push_back({map.index(start), 0, -1, 0});
  open.emplace(heuristic->at(start), 0, 0, 0);
  while (!open.empty()) {
    auto [f, conflicts, neg_t, id] = open.top();
    open.pop();
    const Node node = nodes[id];
    const std::size_t key = slot(node.cell, node.time);
    if (closed[key]) continue;
    closed[key] = 1;

    if (node.cell == map.index(goal) && node.time > last_goal_block) {
      Path path;
      for (int i = id; i != -1; i = nodes[i].parent) path.positions.push_back(map.cell(nodes[i].cell));
      std::reverse(path.positions.begin(), path.positions.end());
      return path;
    }
    if (node.time >= horizon) continue;

    const Cell c = map.cell(node.cell);
    const int t_next = node.time + 1;
    for (Action a : kAllActions) {
      const Cell nc = apply(c, a);
      if (map.blocked(nc)) continue;
      const int j = map.index(nc);
      if (closed[slot(j, t_next)]) continue;
      if (vertex_forbidden.contains({j, t_next})) continue;
      if (a != Action::Stay && edge_forbidden.contains({node.cell, j, node.time})) continue;
      const int h = heuristic->at(nc);
      if (h == kUnreachable) continue;
      const int c_next = node.conflicts + (avoid ? avoid->count(node.cell, j, node.time) : 0);
      nodes.push_back({j, t_next, id, c_next});
      open.emplace(t_next + h, c_next, -t_next, static_cast<int>(nodes.size()) - 1);
    }
  }
  return std::nullopt;
}

}  // namespace gridmapf
