// Minimal wire-protocol client for tests.
//
//   fake_policy_client stay
//   fake_policy_client uniform            answers with a uniform distribution
//   fake_policy_client malformed          garbage for agent 0, Stay for others
//   fake_policy_client silent             never answers
//   fake_policy_client slow SECONDS       sleeps before every answer
//   fake_policy_client die-after N        exits after N requests
//   fake_policy_client script DEMO EPISODE
//   fake_policy_client follow             moves along the goal vector if valid

#include <chrono>
#include <cmath>
#include <iostream>
#include <string>
#include <thread>

#include "gridmapf/demos.hpp"
#include "json.hpp"

using nlohmann::json;

int main(int argc, char** argv) {
  const std::string mode = argc > 1 ? argv[1] : "stay";
  std::vector<std::vector<gridmapf::Action>> script;
  if (mode == "script") {
    const auto demos = gridmapf::read_demos(std::filesystem::path(argv[2]));
    const int episode = std::stoi(argv[3]);
    for (const auto& d : demos) {
      if (d.meta.episode == episode) script = d.expert_actions();
    }
  }
  const double delay = mode == "slow" ? std::stod(argv[2]) : 0.0;
  const int die_after = mode == "die-after" ? std::stoi(argv[2]) : -1;

  int requests = 0;
  std::string line;
  while (std::getline(std::cin, line)) {
    const json msg = json::parse(line, nullptr, false);
    if (msg.is_discarded() || msg.value("type", "") != "obs") continue;
    if (++requests == die_after + 1 && die_after >= 0) return 0;
    const int agent = msg["agent"].get<int>();
    const int t = msg["t"].get<int>();
    json reply = {{"type", "act"}, {"agent", agent}, {"t", t}};
    if (mode == "silent") continue;
    if (delay > 0) std::this_thread::sleep_for(std::chrono::duration<double>(delay));
    if (mode == "malformed" && agent == 0) {
      std::cout << "{not json" << std::endl;
      continue;
    }
    if (mode == "uniform") {
      reply["probs"] = {0.2, 0.2, 0.2, 0.2, 0.2};
    } else if (mode == "script") {
      const bool have = agent < static_cast<int>(script.size()) &&
                        t < static_cast<int>(script[agent].size());
      reply["action"] = have ? static_cast<int>(script[agent][t]) : 0;
    } else if (mode == "follow") {
      const auto obs = msg["obs"].get<std::vector<double>>();
      const std::size_t n = obs.size();
      const double dr = obs[n - 8], dc = obs[n - 7];
      int action = 0;
      if (std::abs(dr) >= std::abs(dc) && dr != 0) action = dr < 0 ? 1 : 3;
      else if (dc != 0) action = dc > 0 ? 2 : 4;
      reply["action"] = obs[n - 5 + action] > 0.5 ? action : 0;
    } else {
      reply["action"] = 0;
    }
    std::cout << reply.dump() << std::endl;
  }
  return 0;
}
