#include "ppoc/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>

namespace ppoc {

namespace {

std::vector<double> gather_column(const std::vector<double>& full, const std::vector<int>& idx) {
  std::vector<double> out(idx.size());
  for (size_t i = 0; i < idx.size(); ++i) out[i] = full[idx[i]];
  return out;
}

void check_single_option(const TrajectoryBatch& batch, const std::vector<int>& idx, int option,
                         const char* who) {
  for (int t : idx)
    if (batch.transitions[t].option != option)
      throw ContractViolation(std::string(who) + ": slice mixes options");
}

constexpr double kHalfLog2PiPlus1 = 1.4189385332046727;  // (1 + ln 2*pi) / 2

}  // namespace

Tensor slice_states(const TrajectoryBatch& batch, const std::vector<int>& idx, bool next_state) {
  const int obs_dim = static_cast<int>(
      (next_state ? batch.transitions[idx[0]].next_state : batch.transitions[idx[0]].state).size());
  Tensor X = Tensor::matrix(static_cast<int>(idx.size()), obs_dim);
  for (size_t r = 0; r < idx.size(); ++r) {
    const Transition& tr = batch.transitions[idx[r]];
    const std::vector<double>& s = next_state ? tr.next_state : tr.state;
    for (int j = 0; j < obs_dim; ++j) X.at(static_cast<int>(r), j) = s[j];
  }
  return X;
}

SurrogateResult clipped_surrogate(Tape& tape, OptionAgent& agent, const TrajectoryBatch& batch,
                                  const std::vector<int>& idx, int option,
                                  const std::vector<double>& advantages, double clip_eps,
                                  double entropy_coef) {
  if (idx.empty()) throw ContractViolation("clipped_surrogate: empty slice");
  check_single_option(batch, idx, option, "clipped_surrogate");
  const int B = static_cast<int>(idx.size());
  const int act_dim = agent.config().action_dim;

  Tensor actions = Tensor::matrix(B, act_dim);
  std::vector<double> logp_old(B);
  for (int r = 0; r < B; ++r) {
    const Transition& tr = batch.transitions[idx[r]];
    for (int j = 0; j < act_dim; ++j) actions.at(r, j) = tr.action_raw[j];
    logp_old[r] = tr.log_prob_old;
  }

  Tensor obs = tape.constant(slice_states(batch, idx, false));
  Tensor trunk = agent.actor_trunk(tape, obs);
  Tensor mean = agent.action_mean_node(tape, trunk, option);
  Tensor log_std = agent.log_std_node(tape, option);
  Tensor logp_new = gaussian_log_prob(tape, tape.constant(std::move(actions)), mean, log_std);
  Tensor ratio = tape.exp(tape.sub(logp_new, tape.constant(Tensor::vector(std::move(logp_old)))));

  SurrogateResult out;
  out.kl_proxy = 0.0;
  for (double r : ratio.values) out.kl_proxy += (r - 1.0) - std::log(r);
  out.kl_proxy /= B;

  Tensor adv = tape.constant(Tensor::vector(gather_column(advantages, idx)));
  Tensor unclipped = tape.mul(ratio, adv);
  Tensor clipped = tape.mul(tape.clip(ratio, 1.0 - clip_eps, 1.0 + clip_eps), adv);
  out.loss = tape.neg(tape.mean(tape.min(unclipped, clipped)));
  if (entropy_coef != 0.0) {
    Tensor entropy = tape.add_scalar(tape.sum(log_std), kHalfLog2PiPlus1 * act_dim);
    out.loss = tape.sub(out.loss, tape.scale(entropy, entropy_coef));
  }
  return out;
}

Tensor termination_loss(Tape& tape, OptionAgent& agent, const TrajectoryBatch& batch,
                        const std::vector<int>& idx, int option,
                        const std::vector<double>& adv_plus_eta) {
  if (idx.empty()) throw ContractViolation("termination_loss: empty slice");
  check_single_option(batch, idx, option, "termination_loss");
  Tensor next_obs = tape.constant(slice_states(batch, idx, true));
  Tensor trunk = agent.critic_trunk(tape, next_obs);
  Tensor betas = agent.termination_all_node(tape, trunk);
  Tensor beta_o = tape.gather(betas, std::vector<int>(idx.size(), option));
  Tensor adv = tape.constant(Tensor::vector(gather_column(adv_plus_eta, idx)));
  return tape.mean(tape.mul(beta_o, adv));
}

Tensor option_policy_loss(Tape& tape, OptionAgent& agent, const TrajectoryBatch& batch,
                          const std::vector<int>& idx, const std::vector<double>& advantages) {
  if (idx.empty()) throw ContractViolation("option_policy_loss: empty slice");
  Tensor obs = tape.constant(slice_states(batch, idx, false));
  Tensor trunk = agent.actor_trunk(tape, obs);
  Tensor probs = tape.softmax(agent.option_logits(tape, trunk));
  std::vector<int> options(idx.size());
  for (size_t r = 0; r < idx.size(); ++r) options[r] = batch.transitions[idx[r]].option;
  Tensor log_mu = tape.log(tape.gather(probs, std::move(options)));
  Tensor adv = tape.constant(Tensor::vector(gather_column(advantages, idx)));
  return tape.neg(tape.mean(tape.mul(log_mu, adv)));
}

Tensor value_loss(Tape& tape, OptionAgent& agent, const TrajectoryBatch& batch,
                  const std::vector<int>& idx, int option, const std::vector<double>& targets) {
  if (idx.empty()) throw ContractViolation("value_loss: empty slice");
  check_single_option(batch, idx, option, "value_loss");
  Tensor obs = tape.constant(slice_states(batch, idx, false));
  Tensor trunk = agent.critic_trunk(tape, obs);
  Tensor q_o = tape.gather(agent.q_all_node(tape, trunk), std::vector<int>(idx.size(), option));
  Tensor g = tape.constant(Tensor::vector(gather_column(targets, idx)));
  return tape.mean(tape.square(tape.sub(g, q_o)));
}

IterationReport train_iteration(OptionAgent& agent, Environment& env, const TrainerConfig& cfg,
                                RunRngs& rngs) {
  const auto t_start = std::chrono::steady_clock::now();
  const int n_options = agent.config().n_options;
  if (cfg.clip_eps <= 0.0) throw ContractViolation("trainer: clip_eps must be positive");
  if (cfg.eta < 0.0) throw ContractViolation("trainer: eta must be non-negative");
  if (cfg.minibatch < n_options)
    throw ContractViolation("trainer: minibatch must be at least the option count");
  if (cfg.epochs < 0) throw ContractViolation("trainer: epochs must be non-negative");

  TrajectoryBatch batch = collect(agent, env, cfg.horizon, cfg.eta, cfg.reward_scale, rngs);

  // Advantage estimates, value targets and termination advantages are all
  // computed once here and stay frozen through every optimizer pass.
  const GaeResult est = gae(batch_rewards(batch), batch_values(batch), batch_next_values(batch),
                            batch_dones(batch), cfg.gamma, cfg.lambda);
  const std::vector<double> adv_norm = normalize_advantages(est.advantages);
  std::vector<double> term_adv;
  if (n_options > 1) term_adv = termination_advantage(batch, agent, cfg.eta);

  const int mb_size = std::max(1, cfg.minibatch / n_options);

  IterationReport rep;
  double loss_updates = 0.0;
  Tape tape;
  for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
    for (int o = 0; o < n_options; ++o) {
      std::vector<int> order = batch.option_index[o];
      if (order.empty()) continue;
      fisher_yates_shuffle(order, rngs.shuffle);
      for (size_t start = 0; start < order.size(); start += mb_size) {
        const size_t stop = std::min(start + mb_size, order.size());
        const std::vector<int> idx(order.begin() + start, order.begin() + stop);

        tape.clear();
        SurrogateResult surr =
            clipped_surrogate(tape, agent, batch, idx, o, adv_norm, cfg.clip_eps, cfg.entropy_coef);
        Tensor actor_total = surr.loss;
        Tensor vloss = value_loss(tape, agent, batch, idx, o, est.value_targets);
        Tensor critic_total = vloss;
        double mu_loss_value = 0.0, term_loss_value = 0.0;
        if (n_options > 1) {
          Tensor mu_loss = option_policy_loss(tape, agent, batch, idx, adv_norm);
          Tensor term = termination_loss(tape, agent, batch, idx, o, term_adv);
          mu_loss_value = mu_loss.values[0];
          term_loss_value = term.values[0];
          actor_total = tape.add(actor_total, mu_loss);
          critic_total = tape.add(critic_total, term);
        }
        Tensor total = tape.add(actor_total, critic_total);

        agent.actor().zero_grad();
        agent.critic().zero_grad();
        tape.backward(total);
        adam_step(agent.actor(), cfg.lr_actor);
        adam_step(agent.critic(), cfg.lr_critic);

        rep.surrogate_loss += surr.loss.values[0];
        rep.value_loss += vloss.values[0];
        rep.option_policy_loss += mu_loss_value;
        rep.termination_loss += term_loss_value;
        rep.kl_proxy += surr.kl_proxy;
        loss_updates += 1.0;
      }
    }
  }
  if (loss_updates > 0) {
    rep.surrogate_loss /= loss_updates;
    rep.value_loss /= loss_updates;
    rep.option_policy_loss /= loss_updates;
    rep.termination_loss /= loss_updates;
    rep.kl_proxy /= loss_updates;
  }

  rep.episodes = static_cast<int>(batch.completed_returns.size());
  if (rep.episodes > 0) {
    rep.mean_return = mean_of(batch.completed_returns);
    rep.std_return = stddev_of(batch.completed_returns);
  } else {
    rep.mean_return = batch.partial_return;  // nothing finished; report the open episode
    rep.std_return = 0.0;
  }
  const OptionUsageStats usage = option_usage_stats(batch);
  rep.switch_rate = usage.switch_rate;
  rep.option_change_rate = usage.option_change_rate;
  rep.option_usage = usage.frequencies;
  rep.has_terrain = usage.has_terrain;
  rep.usage_on_ice = usage.freq_on_ice;
  rep.usage_off_ice = usage.freq_off_ice;
  rep.wall_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t_start).count();

  if (!std::isfinite(rep.mean_return) || !std::isfinite(rep.surrogate_loss) ||
      !std::isfinite(rep.value_loss) || !std::isfinite(rep.termination_loss) ||
      !std::isfinite(rep.option_policy_loss))
    throw ContractViolation("train_iteration: non-finite report value");
  return rep;
}

}  // namespace ppoc
