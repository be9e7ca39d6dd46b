#include "gridmapf/runtime.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <random>

#include "gridmapf/search.hpp"
#include "json.hpp"

namespace gridmapf {

using nlohmann::json;

namespace {

constexpr std::size_t kMaxFaultMessages = 16;

class GreedyPolicy final : public Policy {
 public:
  void decide(const StepView& view, std::span<const int> agents, std::span<Decision> out) override {
    const GridMap& map = view.world.map();
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const int id = agents[k];
      const AgentState& me = view.world.agent(id);
      if (me.on_goal()) {
        out[k] = Decision::act(Action::Stay);
        continue;
      }
      const Observation& obs = view.observations[id];
      const int c = fov_center(obs.fov);
      std::vector<Cell> visible;
      for (int r = 0; r < obs.fov; ++r) {
        for (int q = 0; q < obs.fov; ++q) {
          if (obs.at(Channel::Agents, r, q)) {
            visible.push_back({me.position.row + r - c, me.position.col + q - c});
          }
        }
      }
      const auto path = astar(map, me.position, me.goal, visible);
      out[k] = Decision::act(path && path->length() > 0
                                 ? *action_between(path->positions[0], path->positions[1])
                                 : Action::Stay);
    }
  }
  bool mask_compliant() const override { return true; }
};

class StayPolicy final : public Policy {
 public:
  void decide(const StepView&, std::span<const int> agents, std::span<Decision> out) override {
    for (std::size_t k = 0; k < agents.size(); ++k) out[k] = Decision::act(Action::Stay);
  }
  bool mask_compliant() const override { return true; }
};

class ScriptedPolicy final : public Policy {
 public:
  explicit ScriptedPolicy(std::vector<std::vector<Action>> actions) : actions_(std::move(actions)) {}

  void decide(const StepView& view, std::span<const int> agents, std::span<Decision> out) override {
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const int id = agents[k];
      const bool scripted = id < static_cast<int>(actions_.size()) &&
                            view.t < static_cast<int>(actions_[id].size());
      out[k] = Decision::act(scripted ? actions_[id][view.t] : Action::Stay);
    }
  }

 private:
  std::vector<std::vector<Action>> actions_;
};

class ExternalPolicy final : public Policy {
 public:
  ExternalPolicy(std::unique_ptr<Transport> transport, const ExternalOptions& options)
      : transport_(std::move(transport)), options_(options) {}

  void begin_episode(const EpisodeInfo& info) override {
    episode_ = info.episode;
    const json reset = {{"type", "reset"},
                        {"protocol", kProtocolVersion},
                        {"layout", kObservationLayoutVersion},
                        {"episode", info.episode},
                        {"agents", info.num_agents},
                        {"fov", info.fov}};
    send(reset.dump());
  }

  void decide(const StepView& view, std::span<const int> agents, std::span<Decision> out) override {
    std::map<int, std::size_t> pending;  // agent -> slot
    for (std::size_t k = 0; k < agents.size(); ++k) {
      const Observation& obs = view.observations[agents[k]];
      const json request = {{"type", "obs"}, {"episode", view.episode}, {"t", view.t},
                            {"agent", agents[k]}, {"obs", flatten(obs)},  {"fov", obs.fov}};
      send(request.dump());
      pending.emplace(agents[k], k);
    }
    const auto deadline =
        Transport::Clock::now() + std::chrono::duration_cast<Transport::Clock::duration>(
                                      std::chrono::duration<double>(options_.step_deadline_seconds));
    while (!pending.empty()) {
      std::optional<std::string> line;
      try {
        line = transport_->receive(deadline);
      } catch (const TransportClosed& e) {
        throw EpisodeAborted(std::string("external policy: ") + e.what());
      }
      if (!line) break;
      handle_response(*line, view.t, pending, out);
    }
    for (const auto& [agent, slot] : pending) {
      out[slot] = Decision::faulted("agent " + std::to_string(agent) +
                                    ": no response before the step deadline");
    }
  }

  void end_episode(bool success) override {
    try {
      send(json({{"type", "end"}, {"episode", episode_}, {"success", success}}).dump());
    } catch (const EpisodeAborted&) {
      // nothing left to tell a dead client
    }
  }

 private:
  void send(const std::string& line) {
    try {
      transport_->send(line);
    } catch (const TransportClosed& e) {
      throw EpisodeAborted(std::string("external policy: ") + e.what());
    }
  }

  // Unparseable lines are charged to the oldest pending request, since
  // clients answer in order.
  static void handle_response(const std::string& line, int t, std::map<int, std::size_t>& pending,
                              std::span<Decision> out) {
    json j;
    try {
      j = json::parse(line);
    } catch (const json::parse_error&) {
      const auto first = pending.begin();
      out[first->second] = Decision::faulted("malformed response: " + line.substr(0, 80));
      pending.erase(first);
      return;
    }
    if (!j.is_object() || !j.contains("agent") || !j["agent"].is_number_integer()) {
      const auto first = pending.begin();
      out[first->second] = Decision::faulted("response without agent id: " + line.substr(0, 80));
      pending.erase(first);
      return;
    }
    if (j.contains("t") && j["t"] != t) return;  // late answer to an earlier step
    const auto it = pending.find(j["agent"].get<int>());
    if (it == pending.end()) return;
    Decision& d = out[it->second];
    if (j.value("type", "") != "act") {
      d = Decision::faulted("unexpected message type");
    } else if (j.contains("action") && j["action"].is_number_integer() &&
               j["action"].get<int>() >= 0 && j["action"].get<int>() < kNumActions) {
      d = Decision::act(action_from_index(j["action"].get<int>()));
    } else if (j.contains("probs") && j["probs"].is_array() && j["probs"].size() == kNumActions &&
               std::all_of(j["probs"].begin(), j["probs"].end(),
                           [](const json& x) { return x.is_number(); })) {
      ActionDistribution p{};
      for (int a = 0; a < kNumActions; ++a) p[a] = j["probs"][a].get<double>();
      d = Decision::sample(p);
    } else {
      d = Decision::faulted("response has no valid action");
    }
    pending.erase(it);
  }

  std::unique_ptr<Transport> transport_;
  ExternalOptions options_;
  int episode_ = 0;
};

bool proper_distribution(const ActionDistribution& p) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) return false;
    sum += x;
  }
  return std::abs(sum - 1.0) <= 1e-6;
}

}  // namespace

std::unique_ptr<Policy> greedy_policy() { return std::make_unique<GreedyPolicy>(); }
std::unique_ptr<Policy> stay_policy() { return std::make_unique<StayPolicy>(); }

std::unique_ptr<Policy> scripted_policy(std::vector<std::vector<Action>> actions) {
  return std::make_unique<ScriptedPolicy>(std::move(actions));
}

std::unique_ptr<Policy> plan_policy(const JointPlan& plan) {
  std::vector<std::vector<Action>> actions(plan.paths.size());
  for (std::size_t i = 0; i < plan.paths.size(); ++i) {
    const auto& pos = plan.paths[i].positions;
    for (std::size_t t = 0; t + 1 < pos.size(); ++t) {
      const auto a = action_between(pos[t], pos[t + 1]);
      if (!a) throw std::invalid_argument("plan path of agent " + std::to_string(i) + " jumps");
      actions[i].push_back(*a);
    }
  }
  return scripted_policy(std::move(actions));
}

std::unique_ptr<Policy> external_policy(std::unique_ptr<Transport> transport,
                                        const ExternalOptions& options) {
  return std::make_unique<ExternalPolicy>(std::move(transport), options);
}

int default_step_cap(const GridMap& map) {
  const int side = std::max(map.width(), map.height());
  if (side <= 40) return 256;
  if (side <= 80) return 384;
  return 512;
}

EpisodeResult run_episode(GridWorld world, Policy& policy, const RuntimeOptions& options) {
  std::vector<Policy*> all(world.num_agents(), &policy);
  return run_episode(std::move(world), all, options);
}

EpisodeResult run_episode(GridWorld world, std::span<Policy* const> policies,
                          const RuntimeOptions& options) {
  const int n = world.num_agents();
  if (static_cast<int>(policies.size()) != n) {
    throw std::invalid_argument("run_episode: one policy per agent required");
  }
  const int cap = options.step_cap > 0 ? options.step_cap : default_step_cap(world.map());

  // Distinct policies with the agents each one serves, in first-use order.
  std::vector<std::pair<Policy*, std::vector<int>>> served;
  for (int i = 0; i < n; ++i) {
    auto it = std::find_if(served.begin(), served.end(),
                           [&](const auto& s) { return s.first == policies[i]; });
    if (it == served.end()) {
      served.push_back({policies[i], {}});
      it = served.end() - 1;
    }
    it->second.push_back(i);
  }

  EpisodeResult result;
  result.rewards.assign(n, 0.0);
  result.path_lengths.assign(n, -1);
  std::vector<int> arrival(n, 0);
  auto fault = [&](std::string message) {
    ++result.faults;
    if (result.fault_messages.size() < kMaxFaultMessages) {
      result.fault_messages.push_back(std::move(message));
    }
  };
  if (options.record_trace) result.positions.push_back(world.positions());

  std::mt19937_64 order_rng(options.seed);
  std::mt19937_64 sample_rng(options.seed ^ 0x9e3779b97f4a7c15ull);
  StepOptions step_options;
  step_options.training_mode = options.training_observations;
  step_options.rewards = options.rewards;

  const EpisodeInfo info{options.episode, n, options.fov.fov};
  for (auto& [p, agents] : served) p->begin_episode(info);

  bool done = world.all_on_goal();
  std::vector<Observation> observations(n);
  std::vector<Decision> decisions;
  std::vector<Action> actions(n);
  try {
    while (!done && result.steps_used < cap) {
      const int t = result.steps_used;
      for (int i = 0; i < n; ++i) {
        observations[i] = observe(world, i, options.fov, options.training_observations);
      }
      const StepView view{world, observations, t, options.episode};
      for (auto& [p, agents] : served) {
        decisions.assign(agents.size(), Decision::faulted("no decision"));
        p->decide(view, agents, decisions);
        for (std::size_t k = 0; k < agents.size(); ++k) {
          const int id = agents[k];
          const Decision& d = decisions[k];
          const ActionMask& mask = observations[id].valid_action_mask;
          Action a = Action::Stay;
          if (d.action) {
            a = *d.action;
          } else if (d.distribution && proper_distribution(*d.distribution)) {
            ActionDistribution w = *d.distribution;
            if (p->mask_compliant()) {
              for (int j = 0; j < kNumActions; ++j) {
                if (!mask[j]) w[j] = 0.0;
              }
            }
            if (std::any_of(w.begin(), w.end(), [](double x) { return x > 0.0; })) {
              std::discrete_distribution<int> pick(w.begin(), w.end());
              a = action_from_index(pick(sample_rng));
            }
          } else {
            fault(d.fault.empty() ? "agent " + std::to_string(id) + ": improper distribution"
                                  : d.fault);
          }
          if (!mask[to_index(a)]) {
            ++result.invalid_actions;
            a = Action::Stay;
          }
          actions[id] = a;
        }
      }

      StepOutcome out = step(world, actions, order_rng, step_options);
      ++result.steps_used;
      for (int i = 0; i < n; ++i) {
        result.rewards[i] += out.agents[i].reward;
        if (out.agents[i].collided) ++result.collisions;
        if (out.agents[i].executed != Action::Stay && world.agent(i).on_goal()) {
          arrival[i] = result.steps_used;
        }
      }
      done = out.episode_done;
      if (options.record_trace) {
        result.positions.push_back(world.positions());
        result.trace.push_back(std::move(out));
      }
    }
  } catch (const EpisodeAborted& e) {
    result.aborted = true;
    result.error = e.what();
  }
  result.success = done && !result.aborted;
  for (int i = 0; i < n; ++i) {
    if (world.agent(i).on_goal()) result.path_lengths[i] = arrival[i];
  }
  for (auto& [p, agents] : served) p->end_episode(result.success);
  return result;
}

}  // namespace gridmapf
