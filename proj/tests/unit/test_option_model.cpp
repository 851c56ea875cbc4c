#include <cmath>
#include <cstdio>
#include <filesystem>

#include "doctest.h"
#include "ppoc/agent.hpp"
#include "ppoc/checkpoint.hpp"
#include "ppoc/rng.hpp"

using namespace ppoc;

namespace {

OptionAgent make_agent(int obs = 4, int act = 1, int options = 2, int hidden = 16,
                       uint64_t seed = 1) {
  Rng rng(seed, 5);
  AgentConfig cfg;
  cfg.obs_dim = obs;
  cfg.action_dim = act;
  cfg.n_options = options;
  cfg.hidden = hidden;
  return OptionAgent(cfg, rng);
}

void zero_params(ParameterSet& ps) {
  for (auto& p : ps)
    for (double& v : p->value.values) v = 0.0;
}

std::vector<double> random_obs(int dim, Rng& rng) {
  std::vector<double> s(dim);
  for (double& v : s) v = rng.uniform(-1.0, 1.0);
  return s;
}

}  // namespace

TEST_CASE("freshly initialized option distribution is near uniform") {
  Rng rng(9, 0);
  for (uint64_t seed = 0; seed < 8; ++seed) {
    OptionAgent agent = make_agent(4, 1, 2, 64, seed);
    const auto mu = agent.option_distribution(random_obs(4, rng));
    CHECK(mu[0] > 0.3);
    CHECK(mu[0] < 0.7);
  }
}

TEST_CASE("equal logits give the exactly uniform distribution") {
  OptionAgent agent = make_agent();
  for (double& v : agent.actor().at("actor.mu.W").value.values) v = 0.0;
  for (double& v : agent.actor().at("actor.mu.b").value.values) v = 0.0;
  const auto mu = agent.option_distribution({0.3, -0.4, 0.2, 0.9});
  CHECK(mu[0] == 0.5);
  CHECK(mu[1] == 0.5);
}

TEST_CASE("option distribution sums to one") {
  Rng rng(13, 0);
  OptionAgent agent = make_agent(4, 1, 5);
  for (int i = 0; i < 50; ++i) {
    const auto mu = agent.option_distribution(random_obs(4, rng));
    double sum = 0.0;
    for (double p : mu) sum += p;
    CHECK(std::abs(sum - 1.0) <= 1e-12);
  }
}

TEST_CASE("a vanishing deviation collapses sampling onto the mean") {
  OptionAgent agent = make_agent();
  for (double& v : agent.actor().at("actor.log_std0").value.values) v = std::log(1e-8);
  Rng noise(3, 1);
  const std::vector<double> s = {0.1, 0.2, -0.3, 0.4};
  const auto mean = agent.action_mean(s, 0);
  const ActionSample a = agent.sample_action(s, 0, noise);
  CHECK(std::abs(a.raw[0] - mean[0]) <= 1e-6);
}

TEST_CASE("empirical sample mean matches the policy mean") {
  OptionAgent agent = make_agent();
  Rng noise(77, 1);
  const std::vector<double> s = {0.5, -0.5, 0.25, 0.0};
  const auto mean = agent.action_mean(s, 1);
  const double sigma = std::exp(agent.action_log_std(1)[0]);
  const int n = 100000;
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += agent.sample_action(s, 1, noise).raw[0];
  acc /= n;
  CHECK(std::abs(acc - mean[0]) <= 3.0 * sigma / std::sqrt(static_cast<double>(n)));
}

TEST_CASE("stored log probability is reproducible from the raw action") {
  OptionAgent agent = make_agent(4, 3, 2);
  Rng noise(5, 1);
  Rng rng(6, 0);
  for (int i = 0; i < 20; ++i) {
    const auto s = random_obs(4, rng);
    const ActionSample a = agent.sample_action(s, i % 2, noise);
    CHECK(agent.action_log_prob(s, a.option, a.raw) == a.log_prob);
  }
}

TEST_CASE("clamped action respects bounds while raw action is kept") {
  OptionAgent agent = make_agent();
  agent.actor().at("actor.mean0.b").value.values[0] = 5.0;  // push means far outside
  Rng noise(8, 1);
  const ActionSample a = agent.sample_action({0, 0, 0, 0}, 0, noise);
  CHECK(a.clamped[0] == 1.0);
  CHECK(a.raw[0] > 1.0);
}

TEST_CASE("zero termination logits give probability one half") {
  OptionAgent agent = make_agent();
  zero_params(agent.critic());
  CHECK(agent.termination_prob({0.1, 0.2, 0.3, 0.4}, 0) == 0.5);
  CHECK(agent.termination_prob({0.1, 0.2, 0.3, 0.4}, 1) == 0.5);
}

TEST_CASE("termination probability is monotone in its logit") {
  OptionAgent agent = make_agent();
  zero_params(agent.critic());
  double prev = 0.0;
  for (double b : {-3.0, -1.0, 0.0, 1.0, 3.0}) {
    agent.critic().at("critic.beta.b").value.values[0] = b;
    const double beta = agent.termination_prob({0, 0, 0, 0}, 0);
    CHECK(beta > prev);
    CHECK(beta > 0.0);
    CHECK(beta < 1.0);
    prev = beta;
  }
}

TEST_CASE("termination gradient matches finite differences") {
  OptionAgent agent = make_agent(3, 1, 2, 5);
  const std::vector<double> s = {0.4, -0.2, 0.7};
  auto beta_value = [&] {
    Tape t;
    Tensor trunk = agent.critic_trunk(t, t.constant(Tensor::vector(s)));
    return t.gather(agent.termination_all_node(t, trunk), {1}).values[0];
  };
  agent.critic().zero_grad();
  {
    Tape t;
    Tensor trunk = agent.critic_trunk(t, t.constant(Tensor::vector(s)));
    t.backward(t.gather(agent.termination_all_node(t, trunk), {1}));
  }
  const double h = 1e-5;
  for (auto& p : agent.critic()) {
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value.values[i];
      p->value.values[i] = saved + h;
      const double fp = beta_value();
      p->value.values[i] = saved - h;
      const double fm = beta_value();
      p->value.values[i] = saved;
      const double fd = (fp - fm) / (2 * h);
      CHECK(std::abs(p->grad[i] - fd) <=
            1e-4 * std::max({std::abs(fd), std::abs(p->grad[i]), 1e-2}));
    }
  }
}

TEST_CASE("state value is the option-weighted action value") {
  OptionAgent agent = make_agent();
  zero_params(agent.actor());
  zero_params(agent.critic());
  agent.critic().at("critic.q.b").value.values = {1.0, 3.0};
  const std::vector<double> s = {0.2, 0.1, -0.1, 0.0};
  CHECK(agent.q_values(s) == std::vector<double>{1.0, 3.0});
  CHECK(agent.v_value(s) == doctest::Approx(2.0));

  // Option-weighted advantages cancel.
  OptionAgent rnd = make_agent(4, 1, 3, 16, 9);
  Rng rng(31, 0);
  for (int i = 0; i < 20; ++i) {
    const auto obs = random_obs(4, rng);
    const auto q = rnd.q_values(obs);
    const auto mu = rnd.option_distribution(obs);
    const double v = rnd.v_value(obs);
    double acc = 0.0;
    for (size_t o = 0; o < q.size(); ++o) acc += mu[o] * (q[o] - v);
    CHECK(std::abs(acc) <= 1e-12);
  }
}

TEST_CASE("with a single option the state value equals its action value") {
  OptionAgent agent = make_agent(4, 1, 1);
  Rng rng(17, 0);
  const auto s = random_obs(4, rng);
  CHECK(agent.v_value(s) == agent.q_values(s)[0]);
  CHECK(agent.option_distribution(s) == std::vector<double>{1.0});
}

TEST_CASE("checkpoint round trip reproduces outputs bit-exactly") {
  OptionAgent agent = make_agent(4, 2, 3, 24, 4242);
  const std::string path = (std::filesystem::temp_directory_path() / "ppoc_test.ckpt").string();
  save_checkpoint(path, agent, "icecorridor");
  LoadedCheckpoint loaded = load_checkpoint(path);
  CHECK(loaded.env_name == "icecorridor");
  CHECK(loaded.agent.config().n_options == 3);

  Rng rng(55, 0);
  for (int i = 0; i < 100; ++i) {
    const auto s = random_obs(4, rng);
    CHECK(agent.option_distribution(s) == loaded.agent.option_distribution(s));
    CHECK(agent.q_values(s) == loaded.agent.q_values(s));
    for (int o = 0; o < 3; ++o) {
      CHECK(agent.action_mean(s, o) == loaded.agent.action_mean(s, o));
      CHECK(agent.termination_prob(s, o) == loaded.agent.termination_prob(s, o));
    }
  }
  std::filesystem::remove(path);
}

TEST_CASE("actor and critic share no parameters") {
  OptionAgent agent = make_agent();
  for (auto& a : agent.actor())
    for (auto& c : agent.critic()) CHECK(a.get() != c.get());
  CHECK(agent.actor().find("critic.q.W") == nullptr);
  CHECK(agent.critic().find("actor.mu.W") == nullptr);
}

TEST_CASE("out-of-range queries are rejected") {
  OptionAgent agent = make_agent();
  CHECK_THROWS_AS(agent.action_mean({0, 0, 0, 0}, 2), ContractViolation);
  CHECK_THROWS_AS(agent.option_distribution({0, 0}), ContractViolation);
}
