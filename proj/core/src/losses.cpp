#include "gridmapf/losses.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace gridmapf {

namespace {

void require_same_length(std::size_t a, std::size_t b, const char* what) {
  if (a != b) {
    throw std::invalid_argument(std::string(what) + ": length mismatch (" + std::to_string(a) +
                                " vs " + std::to_string(b) + ")");
  }
}

void check_distribution(const ActionDistribution& p) {
  double sum = 0.0;
  for (double x : p) {
    if (!(x >= 0.0 && x <= 1.0)) throw std::invalid_argument("probability outside [0, 1]");
    sum += x;
  }
  if (std::abs(sum - 1.0) > 1e-9) throw std::invalid_argument("distribution does not sum to 1");
}

double clamped_log(double x, int& clamped) {
  if (x < kLogClamp) {
    ++clamped;
    return std::log(kLogClamp);
  }
  return std::log(x);
}

}  // namespace

std::vector<double> discounted_returns(std::span<const double> rewards, double bootstrap_value,
                                       double gamma) {
  std::vector<double> out(rewards.size());
  double running = bootstrap_value;
  for (std::size_t i = rewards.size(); i-- > 0;) {
    running = rewards[i] + gamma * running;
    out[i] = running;
  }
  return out;
}

double value_loss(std::span<const double> values, std::span<const double> returns) {
  require_same_length(values.size(), returns.size(), "value_loss");
  double sum = 0.0;
  for (std::size_t i = 0; i < values.size(); ++i) {
    const double d = values[i] - returns[i];
    sum += d * d;
  }
  return sum;
}

std::vector<double> advantages(std::span<const double> rewards, std::span<const double> values,
                               double bootstrap_value, double gamma) {
  require_same_length(rewards.size(), values.size(), "advantages");
  std::vector<double> out = discounted_returns(rewards, bootstrap_value, gamma);
  for (std::size_t i = 0; i < out.size(); ++i) out[i] -= values[i];
  return out;
}

double entropy(const ActionDistribution& p) {
  double h = 0.0;
  for (double x : p) {
    if (x > 0.0) h -= x * std::log(x);
  }
  return h;
}

LossResult policy_loss(std::span<const ActionDistribution> policy,
                       std::span<const Action> taken_actions, std::span<const double> advantages,
                       double sigma_h) {
  require_same_length(policy.size(), taken_actions.size(), "policy_loss");
  require_same_length(policy.size(), advantages.size(), "policy_loss");
  LossResult r;
  double h = 0.0;
  double weighted = 0.0;
  for (std::size_t t = 0; t < policy.size(); ++t) {
    check_distribution(policy[t]);
    h += entropy(policy[t]);
    weighted += clamped_log(policy[t][to_index(taken_actions[t])], r.clamped) * advantages[t];
  }
  r.value = sigma_h * h - weighted;
  return r;
}

LossResult bc_loss(std::span<const ActionDistribution> policy,
                   std::span<const Action> expert_actions) {
  require_same_length(policy.size(), expert_actions.size(), "bc_loss");
  if (policy.empty()) throw std::invalid_argument("bc_loss: empty batch");
  LossResult r;
  double sum = 0.0;
  for (std::size_t t = 0; t < policy.size(); ++t) {
    check_distribution(policy[t]);
    sum -= clamped_log(policy[t][to_index(expert_actions[t])], r.clamped);
  }
  r.value = sum / static_cast<double>(policy.size());
  return r;
}

LossResult valid_loss(std::span<const ActionDistribution> policy,
                      std::span<const ActionMask> valid_masks) {
  require_same_length(policy.size(), valid_masks.size(), "valid_loss");
  LossResult r;
  for (std::size_t t = 0; t < policy.size(); ++t) {
    check_distribution(policy[t]);
    double invalid = 0.0;
    for (int a = 0; a < kNumActions; ++a) {
      if (!valid_masks[t][a]) invalid += policy[t][a];
    }
    r.value -= clamped_log(1.0 - invalid, r.clamped);
  }
  return r;
}

LossResult blocking_loss(std::span<const double> predictions, std::span<const int> labels) {
  require_same_length(predictions.size(), labels.size(), "blocking_loss");
  LossResult r;
  for (std::size_t t = 0; t < predictions.size(); ++t) {
    const double p = predictions[t];
    if (!(p >= 0.0 && p <= 1.0)) throw std::invalid_argument("blocking prediction outside [0, 1]");
    if (labels[t] != 0 && labels[t] != 1) throw std::invalid_argument("blocking label must be 0 or 1");
    r.value -= labels[t] == 1 ? clamped_log(p, r.clamped) : clamped_log(1.0 - p, r.clamped);
  }
  return r;
}

}  // namespace gridmapf
