#pragma once

#include <array>
#include <span>
#include <vector>

#include "gridmapf/types.hpp"

namespace gridmapf {

/// A distribution over the five actions, indexed by the action encoding.
using ActionDistribution = std::array<double, kNumActions>;

struct LossConfig {
  double gamma = 0.95;
  double sigma_h = 0.01;
};

/// Probabilities below this are clamped before taking logs.
inline constexpr double kLogClamp = 1e-10;

/// A loss value plus the number of log arguments that had to be clamped.
struct LossResult {
  double value = 0.0;
  int clamped = 0;
};

/// R_t = r_t + gamma * R_{t+1}, closed by R_T = bootstrap_value.
std::vector<double> discounted_returns(std::span<const double> rewards, double bootstrap_value,
                                       double gamma);

/// Sum of squared differences. Throws std::invalid_argument on a length
/// mismatch.
double value_loss(std::span<const double> values, std::span<const double> returns);

/// Bootstrapped returns minus the value baseline, with k running to the end
/// of the batch.
std::vector<double> advantages(std::span<const double> rewards, std::span<const double> values,
                               double bootstrap_value, double gamma);

/// -sum p log p, with 0 log 0 = 0.
double entropy(const ActionDistribution& p);

/// sigma_h * sum_t H(pi_t) - sum_t log pi_t(a_t) * A_t.
LossResult policy_loss(std::span<const ActionDistribution> policy,
                       std::span<const Action> taken_actions, std::span<const double> advantages,
                       double sigma_h);

/// Mean negative log-likelihood of the expert actions. Needs T >= 1.
LossResult bc_loss(std::span<const ActionDistribution> policy,
                   std::span<const Action> expert_actions);

/// -sum_t log(1 - probability mass on invalid actions).
LossResult valid_loss(std::span<const ActionDistribution> policy,
                      std::span<const ActionMask> valid_masks);

/// Binary cross-entropy of blocking predictions against 0/1 labels.
LossResult blocking_loss(std::span<const double> predictions, std::span<const int> labels);

}  // namespace gridmapf
