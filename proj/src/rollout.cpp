#include "ppoc/rollout.hpp"

namespace ppoc {

TrajectoryBatch collect(OptionAgent& agent, Environment& env, int horizon, double eta,
                        bool scale_rewards, RunRngs& rngs) {
  if (horizon < 1) throw ContractViolation("collect: horizon must be >= 1");
  const int n_options = agent.config().n_options;
  const bool apply_cost = n_options > 1;
  const double reward_factor = (scale_rewards && n_options > 1) ? 0.1 : 1.0;

  TrajectoryBatch batch;
  batch.n_options = n_options;
  batch.has_terrain = env.has_terrain_flag();
  batch.transitions.reserve(horizon);
  batch.option_index.assign(n_options, {});

  std::vector<double> obs = env.reset(rngs.env);
  int option = rngs.option.categorical(agent.option_distribution(obs));
  int episode_id = 0;
  double episode_return_raw = 0.0;

  for (int t = 0; t < horizon; ++t) {
    Transition tr;
    tr.state = obs;
    tr.option = option;
    tr.episode_id = episode_id;
    tr.on_ice = env.on_ice();
    tr.option_prob_old = agent.option_distribution(obs)[option];
    tr.value = agent.q_values(obs)[option];

    ActionSample a = agent.sample_action(obs, option, rngs.action);
    tr.action_raw = a.raw;
    tr.log_prob_old = a.log_prob;

    StepResult sr = env.step(a.clamped);
    episode_return_raw += sr.reward;
    tr.env_reward = sr.reward * reward_factor;
    tr.adjusted_reward = tr.env_reward;
    tr.next_state = sr.observation;
    tr.episode_done = sr.done;

    if (sr.done) {
      batch.completed_returns.push_back(episode_return_raw);
      batch.completed_success.push_back(sr.info.success);
      episode_return_raw = 0.0;
      ++episode_id;
      // Timeouts bootstrap with the critic; genuine terminal states do not.
      tr.next_value = sr.info.timeout ? agent.q_values(sr.observation)[option] : 0.0;
      obs = env.reset(rngs.env);
      option = rngs.option.categorical(agent.option_distribution(obs));
    } else {
      const double beta = agent.termination_prob(sr.observation, option);
      if (rngs.termination.bernoulli(beta)) {
        tr.terminated_option = true;
        ++batch.termination_events;
        const int next_option = rngs.option.categorical(agent.option_distribution(sr.observation));
        tr.switched = next_option != option;
        if (tr.switched) ++batch.option_changes;
        option = next_option;
        if (apply_cost) tr.adjusted_reward -= eta;
      }
      obs = sr.observation;
      if (t == horizon - 1) tr.next_value = agent.q_values(obs)[option];
    }

    batch.option_index[tr.option].push_back(t);
    batch.transitions.push_back(std::move(tr));
  }
  batch.partial_return = episode_return_raw;

  // Interior steps take the next transition's stored value, so the value
  // sequence along an episode is Q(s_t, o_t) throughout.
  for (int t = 0; t + 1 < horizon; ++t)
    if (!batch.transitions[t].episode_done)
      batch.transitions[t].next_value = batch.transitions[t + 1].value;

  return batch;
}

OptionUsageStats option_usage_stats(const TrajectoryBatch& batch) {
  if (batch.transitions.empty())
    throw ContractViolation("option_usage_stats: empty batch");
  const int n = batch.n_options;
  const double total = static_cast<double>(batch.length());

  OptionUsageStats s;
  s.frequencies.assign(n, 0.0);
  s.has_terrain = batch.has_terrain;

  std::vector<double> ice_counts(n, 0.0), ground_counts(n, 0.0);
  double ice_total = 0.0, ground_total = 0.0;
  for (const Transition& tr : batch.transitions) {
    s.frequencies[tr.option] += 1.0;
    if (batch.has_terrain) {
      if (tr.on_ice) {
        ice_counts[tr.option] += 1.0;
        ice_total += 1.0;
      } else {
        ground_counts[tr.option] += 1.0;
        ground_total += 1.0;
      }
    }
  }
  for (double& f : s.frequencies) f /= total;
  s.switch_rate = batch.termination_events / total;
  s.option_change_rate = batch.option_changes / total;

  if (batch.has_terrain) {
    s.freq_on_ice.assign(n, 0.0);
    s.freq_off_ice.assign(n, 0.0);
    for (int o = 0; o < n; ++o) {
      if (ice_total > 0) s.freq_on_ice[o] = ice_counts[o] / ice_total;
      if (ground_total > 0) s.freq_off_ice[o] = ground_counts[o] / ground_total;
    }
  }
  return s;
}

}  // namespace ppoc
