#include "doctest.h"

#include <cmath>
#include <fstream>
#include <random>

#include "json.hpp"

#include "gridmapf/losses.hpp"

using namespace gridmapf;

namespace {

constexpr ActionDistribution kUniform = {0.2, 0.2, 0.2, 0.2, 0.2};

ActionDistribution random_distribution(std::mt19937_64& rng) {
  std::gamma_distribution<double> g(1.0, 1.0);
  ActionDistribution p{};
  double sum = 0.0;
  for (double& x : p) sum += (x = g(rng));
  for (double& x : p) x /= sum;
  return p;
}

}  // namespace

TEST_CASE("discounted returns") {
  const std::vector<double> r = {-0.3, 20.0};
  const auto ret = discounted_returns(r, 0.0, 0.95);
  REQUIRE(ret.size() == 2);
  CHECK(std::abs(ret[0] - 18.7) <= 1e-12);
  CHECK(ret[1] == 20.0);

  const std::vector<double> ones = {1, 1, 1};
  CHECK(discounted_returns(ones, 0.0, 1.0) == std::vector<double>{3, 2, 1});
  CHECK(discounted_returns({}, 5.0, 0.9).empty());

  std::mt19937_64 rng(3);
  std::normal_distribution<double> n;
  std::vector<double> rewards(50);
  for (double& x : rewards) x = n(rng);
  const double boot = 1.7;
  const auto rr = discounted_returns(rewards, boot, 0.95);
  for (std::size_t t = 0; t < rewards.size(); ++t) {
    const double next = t + 1 < rewards.size() ? rr[t + 1] : boot;
    CHECK(rr[t] == rewards[t] + 0.95 * next);
  }
}

TEST_CASE("value loss") {
  const std::vector<double> v = {1.5, -2.0};
  CHECK(value_loss(v, v) == 0.0);
  CHECK(value_loss(std::vector<double>{0, 0}, std::vector<double>{1, 2}) == 5.0);
  CHECK(value_loss(std::vector<double>{18.7}, std::vector<double>{20}) == doctest::Approx(1.69));
  CHECK_THROWS_AS(value_loss(std::vector<double>{0}, std::vector<double>{1, 2}),
                  std::invalid_argument);
}

TEST_CASE("advantages") {
  const std::vector<double> r = {-0.3, 1.0, 2.0};
  const std::vector<double> zeros(3, 0.0);
  CHECK(advantages(r, zeros, 0.5, 0.9) == discounted_returns(r, 0.5, 0.9));

  const auto a = advantages(std::vector<double>{-0.3}, std::vector<double>{18.0}, 20.0, 0.95);
  CHECK(a[0] == doctest::Approx(0.7));

  const auto ret = discounted_returns(r, 0.5, 0.9);
  for (double x : advantages(r, ret, 0.5, 0.9)) CHECK(x == 0.0);
}

TEST_CASE("entropy and policy loss") {
  CHECK(std::abs(entropy(kUniform) - std::log(5.0)) <= 1e-9);
  CHECK(entropy({1, 0, 0, 0, 0}) == 0.0);

  const std::vector<ActionDistribution> certain = {{0, 1, 0, 0, 0}};
  const std::vector<Action> north = {Action::North};
  CHECK(policy_loss(certain, north, std::vector<double>{2.0}, 0.0).value == 0.0);

  const std::vector<ActionDistribution> half = {{0.5, 0.5, 0, 0, 0}};
  CHECK(policy_loss(half, north, std::vector<double>{1.0}, 0.0).value ==
        doctest::Approx(0.69315).epsilon(1e-5));

  const std::vector<ActionDistribution> uni = {kUniform, kUniform};
  const std::vector<Action> acts = {Action::Stay, Action::West};
  const auto l = policy_loss(uni, acts, std::vector<double>{1.0, -1.0}, 0.01);
  CHECK(l.value == doctest::Approx(0.01 * 2 * std::log(5.0)));

  const std::vector<ActionDistribution> zero = {{1, 0, 0, 0, 0}};
  const auto clamped = policy_loss(zero, north, std::vector<double>{1.0}, 0.0);
  CHECK(clamped.clamped == 1);
  CHECK(std::isfinite(clamped.value));
  CHECK(clamped.value == doctest::Approx(-std::log(kLogClamp)));
}

TEST_CASE("bc loss") {
  const std::vector<Action> experts = {Action::East, Action::South, Action::Stay};
  const std::vector<ActionDistribution> uni(3, kUniform);
  CHECK(std::abs(bc_loss(uni, experts).value - std::log(5.0)) <= 1e-9);

  const std::vector<ActionDistribution> perfect = {
      {0, 0, 1, 0, 0}, {0, 0, 0, 1, 0}, {1, 0, 0, 0, 0}};
  CHECK(bc_loss(perfect, experts).value == 0.0);

  const std::vector<ActionDistribution> two = {{0.5, 0.5, 0, 0, 0}, {0.25, 0.25, 0.25, 0.25, 0}};
  const std::vector<Action> a2 = {Action::Stay, Action::South};
  CHECK(bc_loss(two, a2).value == doctest::Approx(1.03972).epsilon(1e-5));

  CHECK_THROWS_AS(bc_loss({}, {}), std::invalid_argument);
  CHECK_THROWS_AS(bc_loss(uni, a2), std::invalid_argument);
  const std::vector<ActionDistribution> unnormalised = {{0.5, 0.5, 0.5, 0, 0}};
  CHECK_THROWS_AS(bc_loss(unnormalised, std::vector<Action>{Action::Stay}), std::invalid_argument);
}

TEST_CASE("bc loss decreases as the expert action gains mass") {
  std::mt19937_64 rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    ActionDistribution p = random_distribution(rng);
    const int a = trial % 5;
    const std::vector<Action> expert = {action_from_index(a)};
    double previous = bc_loss(std::vector<ActionDistribution>{p}, expert).value;
    for (int k = 0; k < 5; ++k) {
      // Shift 10% of the other mass onto the expert action.
      double moved = 0.0;
      for (int b = 0; b < 5; ++b) {
        if (b == a) continue;
        moved += 0.1 * p[b];
        p[b] *= 0.9;
      }
      p[a] += moved;
      if (moved == 0.0) break;
      const double now = bc_loss(std::vector<ActionDistribution>{p}, expert).value;
      CHECK(now < previous);
      previous = now;
    }
  }
}

TEST_CASE("valid and blocking losses") {
  const std::vector<ActionDistribution> p = {{0.5, 0.5, 0, 0, 0}};
  const std::vector<ActionMask> all_valid = {{true, true, false, false, false}};
  CHECK(valid_loss(p, all_valid).value == 0.0);
  const std::vector<ActionMask> half_invalid = {{true, false, true, true, true}};
  CHECK(valid_loss(p, half_invalid).value == doctest::Approx(0.69315).epsilon(1e-5));

  CHECK(blocking_loss(std::vector<double>{1.0, 0.0}, std::vector<int>{1, 0}).value == 0.0);
  CHECK(blocking_loss(std::vector<double>{0.5}, std::vector<int>{1}).value ==
        doctest::Approx(std::log(2.0)));
  const auto wrong = blocking_loss(std::vector<double>{0.0}, std::vector<int>{1});
  CHECK(wrong.clamped == 1);
  CHECK(std::isfinite(wrong.value));
  CHECK_THROWS_AS(blocking_loss(std::vector<double>{0.5}, std::vector<int>{2}), std::invalid_argument);
}

TEST_CASE("losses are finite and non-negative on random inputs") {
  std::mt19937_64 rng(9);
  std::uniform_int_distribution<int> act(0, 4);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 100; ++trial) {
    const int T = 1 + trial % 20;
    std::vector<ActionDistribution> probs;
    std::vector<Action> actions;
    std::vector<ActionMask> masks;
    std::vector<double> preds;
    std::vector<int> labels;
    for (int t = 0; t < T; ++t) {
      probs.push_back(random_distribution(rng));
      actions.push_back(action_from_index(act(rng)));
      ActionMask m{};
      m[0] = true;
      for (int a = 1; a < 5; ++a) m[a] = unit(rng) < 0.6;
      masks.push_back(m);
      preds.push_back(unit(rng));
      labels.push_back(unit(rng) < 0.3 ? 1 : 0);
    }
    const double bc = bc_loss(probs, actions).value;
    const double vl = valid_loss(probs, masks).value;
    const double bl = blocking_loss(preds, labels).value;
    CHECK((std::isfinite(bc) && bc >= 0));
    CHECK((std::isfinite(vl) && vl >= 0));
    CHECK((std::isfinite(bl) && bl >= 0));
    for (const auto& p : probs) CHECK(entropy(p) >= 0);
  }
}

TEST_CASE("shared bc fixture") {
  std::ifstream in(std::string(GRIDMAPF_TEST_DATA) + "/bc_loss_fixture.json");
  REQUIRE(in);
  const auto j = nlohmann::json::parse(in);
  std::vector<ActionDistribution> probs;
  for (const auto& row : j.at("probs")) {
    ActionDistribution p{};
    for (int a = 0; a < 5; ++a) p[a] = row.at(a).get<double>();
    probs.push_back(p);
  }
  std::vector<Action> actions;
  for (const auto& a : j.at("actions")) actions.push_back(action_from_index(a.get<int>()));
  const double expected = j.at("expected_bc_loss").get<double>();
  CHECK(std::abs(bc_loss(probs, actions).value - expected) <= j.at("tolerance").get<double>());
}
