#include <algorithm>
#include <cmath>
#include <numeric>

#include "doctest.h"
#include "ppoc/advantage.hpp"
#include "ppoc/rng.hpp"

using namespace ppoc;

namespace {

// Brute-force return oracle: direct power-series summation segment by
// segment, no recursion shared with the implementation.
std::vector<double> brute_force_returns(const std::vector<double>& r,
                                        const std::vector<uint8_t>& dones,
                                        const std::vector<double>& next_values, double gamma) {
  const int n = static_cast<int>(r.size());
  std::vector<double> out(n, 0.0);
  for (int t = 0; t < n; ++t) {
    double acc = 0.0, g = 1.0;
    int k = t;
    for (;; ++k) {
      acc += g * r[k];
      g *= gamma;
      if (dones[k] || k == n - 1) {
        acc += g * next_values[k];
        break;
      }
    }
    out[t] = acc;
  }
  return out;
}

struct RandomBatch {
  std::vector<double> r, values, next_values;
  std::vector<uint8_t> dones;
};

RandomBatch random_batch(Rng& rng, int n) {
  RandomBatch b;
  b.r.resize(n);
  b.values.resize(n);
  b.next_values.resize(n);
  b.dones.resize(n);
  for (int t = 0; t < n; ++t) {
    b.r[t] = rng.uniform(-1.0, 1.0);
    b.values[t] = rng.uniform(-1.0, 1.0);
    b.dones[t] = rng.bernoulli(0.15) ? 1 : 0;
    // Boundary values: zero for "terminal", a bootstrap otherwise.
    const bool terminal = rng.bernoulli(0.5);
    b.next_values[t] = (b.dones[t] && terminal) ? 0.0 : rng.uniform(-1.0, 1.0);
  }
  return b;
}

}  // namespace

TEST_CASE("discounted returns, hand cases") {
  std::vector<uint8_t> no_dones = {0, 0, 0};
  std::vector<double> zeros = {0, 0, 0};
  CHECK(discounted_returns({1, 1, 1}, no_dones, zeros, 0.0) == std::vector<double>{1, 1, 1});
  const auto g = discounted_returns({0, 0, 1}, no_dones, zeros, 0.5);
  CHECK(g[0] == doctest::Approx(0.25));
  CHECK(g[1] == doctest::Approx(0.5));
  CHECK(g[2] == doctest::Approx(1.0));
}

TEST_CASE("discounted returns match the brute-force oracle") {
  Rng rng(21, 0);
  for (int trial = 0; trial < 50; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(60));
    RandomBatch b = random_batch(rng, n);
    const double gamma = rng.uniform(0.5, 0.999);
    const auto fast = discounted_returns(b.r, b.dones, b.next_values, gamma);
    const auto slow = brute_force_returns(b.r, b.dones, b.next_values, gamma);
    for (int t = 0; t < n; ++t) CHECK(std::abs(fast[t] - slow[t]) <= 1e-12);
  }
}

TEST_CASE("gae hand case with a terminal tail") {
  // r=[1,1], V=[0.5,0.5], second step terminal, gamma=0.99, lambda=0.95.
  const GaeResult g = gae({1, 1}, {0.5, 0.5}, {0.5, 0.0}, {0, 1}, 0.99, 0.95);
  CHECK(g.advantages[0] == doctest::Approx(1.46525).epsilon(1e-12));
  CHECK(g.advantages[1] == doctest::Approx(0.5).epsilon(1e-12));
  CHECK(g.value_targets[0] == doctest::Approx(1.96525));
}

TEST_CASE("lambda=1 recovers the Monte-Carlo advantage") {
  Rng rng(22, 0);
  for (int trial = 0; trial < 100; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(80));
    RandomBatch b = random_batch(rng, n);
    const double gamma = rng.uniform(0.5, 0.999);
    const GaeResult g = gae(b.r, b.values, b.next_values, b.dones, gamma, 1.0);
    const auto mc = discounted_returns(b.r, b.dones, b.next_values, gamma);
    for (int t = 0; t < n; ++t) {
      CHECK(std::abs(g.advantages[t] - (mc[t] - b.values[t])) <= 1e-10);
      CHECK(std::abs(g.value_targets[t] - mc[t]) <= 1e-10);
    }
  }
}

TEST_CASE("lambda=0 is exactly the one-step residual") {
  Rng rng(23, 0);
  for (int trial = 0; trial < 20; ++trial) {
    const int n = 5 + static_cast<int>(rng.below(40));
    RandomBatch b = random_batch(rng, n);
    const double gamma = rng.uniform(0.5, 0.999);
    const GaeResult g = gae(b.r, b.values, b.next_values, b.dones, gamma, 0.0);
    for (int t = 0; t < n; ++t) {
      const double next = (b.dones[t] || t == n - 1) ? b.next_values[t] : b.values[t + 1];
      const double delta = b.r[t] + gamma * next - b.values[t];
      CHECK(g.advantages[t] == delta);
    }
  }
}

namespace {

OptionAgent forced_critic(int n_options, const std::vector<double>& q_bias) {
  Rng rng(1, 5);
  AgentConfig cfg;
  cfg.obs_dim = 2;
  cfg.action_dim = 1;
  cfg.n_options = n_options;
  cfg.hidden = 4;
  OptionAgent agent(cfg, rng);
  for (auto& p : agent.actor())
    for (double& v : p->value.values) v = 0.0;
  for (auto& p : agent.critic())
    for (double& v : p->value.values) v = 0.0;
  agent.critic().at("critic.q.b").value.values = q_bias;
  return agent;
}

TrajectoryBatch one_transition_batch(int option, int n_options) {
  TrajectoryBatch b;
  b.n_options = n_options;
  b.option_index.assign(n_options, {});
  Transition tr;
  tr.state = {0.0, 0.0};
  tr.next_state = {0.1, 0.2};
  tr.option = option;
  b.option_index[option].push_back(0);
  b.transitions.push_back(tr);
  return b;
}

}  // namespace

TEST_CASE("termination advantage hand cases") {
  // Q(s') = [1,3], uniform options => V(s') = 2.
  OptionAgent agent = forced_critic(2, {1.0, 3.0});
  TrajectoryBatch b = one_transition_batch(0, 2);
  CHECK(termination_advantage(b, agent, 0.0)[0] == doctest::Approx(-1.0));
  CHECK(termination_advantage(b, agent, 0.5)[0] == doctest::Approx(-0.5));

  OptionAgent primitive = forced_critic(1, {0.37});
  TrajectoryBatch b1 = one_transition_batch(0, 1);
  for (double eta : {0.0, 0.2, 1.5})
    CHECK(termination_advantage(b1, primitive, eta)[0] == doctest::Approx(eta));
}

TEST_CASE("option-weighted termination advantages sum to the margin") {
  Rng rng(31, 5);
  AgentConfig cfg;
  cfg.obs_dim = 3;
  cfg.action_dim = 1;
  cfg.n_options = 4;
  cfg.hidden = 12;
  OptionAgent agent(cfg, rng);
  Rng sr(32, 0);
  const double eta = 0.07;
  for (int i = 0; i < 20; ++i) {
    std::vector<double> next_state = {sr.uniform(-1, 1), sr.uniform(-1, 1), sr.uniform(-1, 1)};
    const auto mu = agent.option_distribution(next_state);
    double acc = 0.0;
    for (int o = 0; o < 4; ++o) {
      TrajectoryBatch b;
      b.n_options = 4;
      b.option_index.assign(4, {});
      Transition tr;
      tr.state = next_state;
      tr.next_state = next_state;
      tr.option = o;
      b.option_index[o].push_back(0);
      b.transitions.push_back(tr);
      acc += mu[o] * termination_advantage(b, agent, eta)[0];
    }
    CHECK(std::abs(acc - eta) <= 1e-12);
  }
}

TEST_CASE("advantage computation does not mutate the batch") {
  OptionAgent agent = forced_critic(2, {1.0, 3.0});
  TrajectoryBatch b = one_transition_batch(0, 2);
  b.transitions[0].adjusted_reward = 0.25;
  b.transitions[0].log_prob_old = -1.5;
  termination_advantage(b, agent, 0.3);
  const auto r = batch_rewards(b);
  gae(r, batch_values(b), batch_next_values(b), batch_dones(b), 0.99, 0.95);
  CHECK(b.transitions[0].adjusted_reward == 0.25);
  CHECK(b.transitions[0].log_prob_old == -1.5);
}

TEST_CASE("advantage normalization") {
  const auto n = normalize_advantages({1.0, 2.0, 3.0});
  CHECK(n[0] == doctest::Approx(-1.0));
  CHECK(n[1] == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(n[2] == doctest::Approx(1.0));
  double m = 0;
  for (double v : n) m += v;
  CHECK(std::abs(m) <= 1e-12);

  const auto c = normalize_advantages({4.0, 4.0, 4.0, 4.0});
  for (double v : c) CHECK(v == 0.0);

  const auto single = normalize_advantages({2.0});
  CHECK(single == std::vector<double>{2.0});

  Rng rng(41, 0);
  std::vector<double> raw(50);
  for (double& v : raw) v = rng.uniform(-10, 10);
  const auto z = normalize_advantages(raw);
  std::vector<size_t> order_a(raw.size()), order_b(raw.size());
  std::iota(order_a.begin(), order_a.end(), 0);
  order_b = order_a;
  std::sort(order_a.begin(), order_a.end(), [&](size_t i, size_t j) { return raw[i] < raw[j]; });
  std::sort(order_b.begin(), order_b.end(), [&](size_t i, size_t j) { return z[i] < z[j]; });
  CHECK(order_a == order_b);
}

TEST_CASE("estimator input validation") {
  CHECK_THROWS_AS(gae({1.0}, {1.0, 2.0}, {0.0}, {0}, 0.99, 0.95), ContractViolation);
  CHECK_THROWS_AS(gae({1.0}, {1.0}, {0.0}, {0}, 0.99, 1.5), ContractViolation);
  CHECK_THROWS_AS(discounted_returns({1.0}, {0}, {0.0}, 1.0), ContractViolation);
}
