#include "ppoc/agent.hpp"

#include <cmath>

namespace ppoc {

namespace {

Tensor glorot_uniform(int out_dim, int in_dim, Rng& rng, double gain = 1.0) {
  Tensor W = Tensor::matrix(out_dim, in_dim);
  const double limit = gain * std::sqrt(6.0 / static_cast<double>(in_dim + out_dim));
  for (double& w : W.values) w = rng.uniform(-limit, limit);
  return W;
}

void add_trunk(ParameterSet& ps, const std::string& prefix, int obs_dim, int hidden, Rng& rng) {
  ps.add(prefix + ".l1.W", glorot_uniform(hidden, obs_dim, rng));
  ps.add(prefix + ".l1.b", Tensor::vector(std::vector<double>(hidden, 0.0)));
  ps.add(prefix + ".l2.W", glorot_uniform(hidden, hidden, rng));
  ps.add(prefix + ".l2.b", Tensor::vector(std::vector<double>(hidden, 0.0)));
}

}  // namespace

OptionAgent::OptionAgent(const AgentConfig& cfg, Rng& init_rng) : cfg_(cfg) {
  if (cfg.obs_dim < 1 || cfg.action_dim < 1 || cfg.n_options < 1 || cfg.hidden < 1)
    throw ContractViolation("agent: dimensions must be positive");
  add_trunk(actor_, "actor", cfg.obs_dim, cfg.hidden, init_rng);
  actor_.add("actor.mu.W", glorot_uniform(cfg.n_options, cfg.hidden, init_rng));
  actor_.add("actor.mu.b", Tensor::vector(std::vector<double>(cfg.n_options, 0.0)));
  for (int o = 0; o < cfg.n_options; ++o) {
    const std::string tag = std::to_string(o);
    // Small-gain mean head keeps early policies near zero-mean.
    actor_.add("actor.mean" + tag + ".W", glorot_uniform(cfg.action_dim, cfg.hidden, init_rng, 0.01));
    actor_.add("actor.mean" + tag + ".b", Tensor::vector(std::vector<double>(cfg.action_dim, 0.0)));
    actor_.add("actor.log_std" + tag, Tensor::vector(std::vector<double>(cfg.action_dim, 0.0)));
  }
  add_trunk(critic_, "critic", cfg.obs_dim, cfg.hidden, init_rng);
  critic_.add("critic.q.W", glorot_uniform(cfg.n_options, cfg.hidden, init_rng));
  critic_.add("critic.q.b", Tensor::vector(std::vector<double>(cfg.n_options, 0.0)));
  critic_.add("critic.beta.W", glorot_uniform(cfg.n_options, cfg.hidden, init_rng));
  critic_.add("critic.beta.b", Tensor::vector(std::vector<double>(cfg.n_options, 0.0)));
}

void OptionAgent::check_option(int option) const {
  if (option < 0 || option >= cfg_.n_options)
    throw ContractViolation("option id " + std::to_string(option) + " out of range [0," +
                            std::to_string(cfg_.n_options) + ")");
}

void OptionAgent::check_obs(const std::vector<double>& s) const {
  if (static_cast<int>(s.size()) != cfg_.obs_dim)
    throw ContractViolation("observation has " + std::to_string(s.size()) + " entries, expected " +
                            std::to_string(cfg_.obs_dim));
}

namespace {

Tensor trunk_eval(const ParameterSet& ps, const std::string& prefix, const std::vector<double>& s) {
  Tensor x = Tensor::vector(s);
  Tensor h = eval::tanh_act(eval::affine(x, ps.at(prefix + ".l1.W").value, ps.at(prefix + ".l1.b").value));
  return eval::tanh_act(eval::affine(h, ps.at(prefix + ".l2.W").value, ps.at(prefix + ".l2.b").value));
}

}  // namespace

std::vector<double> OptionAgent::option_distribution(const std::vector<double>& s) const {
  check_obs(s);
  const Tensor h = trunk_eval(actor_, "actor", s);
  const Tensor logits = eval::affine(h, actor_.at("actor.mu.W").value, actor_.at("actor.mu.b").value);
  return eval::softmax_act(logits).values;
}

std::vector<double> OptionAgent::action_mean(const std::vector<double>& s, int option) const {
  check_obs(s);
  check_option(option);
  const std::string tag = std::to_string(option);
  const Tensor h = trunk_eval(actor_, "actor", s);
  return eval::affine(h, actor_.at("actor.mean" + tag + ".W").value,
                      actor_.at("actor.mean" + tag + ".b").value)
      .values;
}

const std::vector<double>& OptionAgent::action_log_std(int option) const {
  check_option(option);
  return actor_.at("actor.log_std" + std::to_string(option)).value.values;
}

ActionSample OptionAgent::sample_action(const std::vector<double>& s, int option, Rng& noise) const {
  ActionSample out;
  out.option = option;
  const std::vector<double> mean = action_mean(s, option);
  const std::vector<double>& log_std = action_log_std(option);
  out.raw.resize(mean.size());
  out.clamped.resize(mean.size());
  for (size_t i = 0; i < mean.size(); ++i) {
    out.raw[i] = mean[i] + std::exp(log_std[i]) * noise.normal();
    out.clamped[i] = clamp(out.raw[i], cfg_.action_low, cfg_.action_high);
  }
  out.log_prob = eval::gaussian_log_prob(out.raw, mean, log_std);
  return out;
}

double OptionAgent::action_log_prob(const std::vector<double>& s, int option,
                                    const std::vector<double>& raw_action) const {
  return eval::gaussian_log_prob(raw_action, action_mean(s, option), action_log_std(option));
}

double OptionAgent::termination_prob(const std::vector<double>& s, int option) const {
  check_obs(s);
  check_option(option);
  const Tensor h = trunk_eval(critic_, "critic", s);
  const Tensor logits = eval::affine(h, critic_.at("critic.beta.W").value, critic_.at("critic.beta.b").value);
  return eval::sigmoid_act(logits).values[option];
}

std::vector<double> OptionAgent::q_values(const std::vector<double>& s) const {
  check_obs(s);
  const Tensor h = trunk_eval(critic_, "critic", s);
  return eval::affine(h, critic_.at("critic.q.W").value, critic_.at("critic.q.b").value).values;
}

double OptionAgent::v_value(const std::vector<double>& s) const {
  const std::vector<double> q = q_values(s);
  const std::vector<double> mu = option_distribution(s);
  double v = 0.0;
  for (size_t o = 0; o < q.size(); ++o) v += mu[o] * q[o];
  return v;
}

Tensor OptionAgent::actor_trunk(Tape& t, const Tensor& obs) {
  Tensor h = t.tanh(t.affine(obs, t.parameter(actor_.at("actor.l1.W")), t.parameter(actor_.at("actor.l1.b"))));
  return t.tanh(t.affine(h, t.parameter(actor_.at("actor.l2.W")), t.parameter(actor_.at("actor.l2.b"))));
}

Tensor OptionAgent::option_logits(Tape& t, const Tensor& trunk) {
  return t.affine(trunk, t.parameter(actor_.at("actor.mu.W")), t.parameter(actor_.at("actor.mu.b")));
}

Tensor OptionAgent::action_mean_node(Tape& t, const Tensor& trunk, int option) {
  check_option(option);
  const std::string tag = std::to_string(option);
  return t.affine(trunk, t.parameter(actor_.at("actor.mean" + tag + ".W")),
                  t.parameter(actor_.at("actor.mean" + tag + ".b")));
}

Tensor OptionAgent::log_std_node(Tape& t, int option) {
  check_option(option);
  return t.parameter(actor_.at("actor.log_std" + std::to_string(option)));
}

Tensor OptionAgent::critic_trunk(Tape& t, const Tensor& obs) {
  Tensor h = t.tanh(t.affine(obs, t.parameter(critic_.at("critic.l1.W")), t.parameter(critic_.at("critic.l1.b"))));
  return t.tanh(t.affine(h, t.parameter(critic_.at("critic.l2.W")), t.parameter(critic_.at("critic.l2.b"))));
}

Tensor OptionAgent::q_all_node(Tape& t, const Tensor& trunk) {
  return t.affine(trunk, t.parameter(critic_.at("critic.q.W")), t.parameter(critic_.at("critic.q.b")));
}

Tensor OptionAgent::termination_all_node(Tape& t, const Tensor& trunk) {
  return t.sigmoid(
      t.affine(trunk, t.parameter(critic_.at("critic.beta.W")), t.parameter(critic_.at("critic.beta.b"))));
}

}  // namespace ppoc
