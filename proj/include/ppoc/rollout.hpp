#ifndef PPOC_ROLLOUT_HPP_
#define PPOC_ROLLOUT_HPP_

#include <vector>

#include "ppoc/agent.hpp"
#include "ppoc/env.hpp"
#include "ppoc/rng.hpp"

namespace ppoc {

// One environment step with option bookkeeping.
struct Transition {
  std::vector<double> state, next_state;
  std::vector<double> action_raw;
  int option = 0;
  double env_reward = 0.0;       // after reward scaling, before deliberation cost
  double adjusted_reward = 0.0;  // env_reward minus the deliberation cost
  double log_prob_old = 0.0;     // log pi(a|s,o) at collection time
  double option_prob_old = 0.0;  // mu(o|s) at collection time
  double value = 0.0;            // Q(s,o) at collection time
  double next_value = 0.0;       // value used for the next state (0 at terminal states)
  bool terminated_option = false;  // the termination draw fired at next_state
  bool switched = false;           // and a different option was then chosen
  bool episode_done = false;
  bool on_ice = false;  // terrain of `state` (false where not applicable)
  int episode_id = 0;
};

struct TrajectoryBatch {
  std::vector<Transition> transitions;
  std::vector<std::vector<int>> option_index;  // per-option lists partitioning 0..T-1
  int n_options = 1;
  bool has_terrain = false;

  // Episode statistics for logging; returns are always unscaled.
  std::vector<double> completed_returns;
  std::vector<bool> completed_success;
  double partial_return = 0.0;  // return of the episode still open at batch end
  int termination_events = 0;
  int option_changes = 0;

  int length() const { return static_cast<int>(transitions.size()); }
};

// Independent random streams owned by one run. Each consumer draws from
// its own stream so the streams stay aligned across configurations that
// branch differently.
struct RunRngs {
  Rng env, action, termination, option, shuffle;
  static RunRngs for_seed(uint64_t seed) {
    return RunRngs{Rng(seed, 0), Rng(seed, 1), Rng(seed, 2), Rng(seed, 3), Rng(seed, 4)};
  }
};

// Collect exactly `horizon` on-policy transitions under call-and-return
// option execution. The environment is reset at the start of the call; a
// fresh option is drawn at every episode start. After each step the
// termination of the active option is sampled at the new state; if it
// fires, a new option is drawn and the deliberation cost eta is charged
// against this transition's reward (skipped entirely with one option,
// where terminations cannot change behavior). Rewards are scaled by 0.1
// before cost subtraction when scale_rewards is set and the agent has
// more than one option. Episode ends reset with no cost; timeout episodes
// carry Q(s',o) as their boundary value, terminal ones carry 0.
TrajectoryBatch collect(OptionAgent& agent, Environment& env, int horizon, double eta,
                        bool scale_rewards, RunRngs& rngs);

struct OptionUsageStats {
  std::vector<double> frequencies;  // sums to 1
  double switch_rate = 0.0;         // termination events per step
  double option_change_rate = 0.0;  // option-id changes per step
  bool has_terrain = false;
  std::vector<double> freq_on_ice, freq_off_ice;  // each sums to 1 when samples exist
};

OptionUsageStats option_usage_stats(const TrajectoryBatch& batch);

}  // namespace ppoc

#endif  // PPOC_ROLLOUT_HPP_
