#ifndef PPOC_TRAINER_HPP_
#define PPOC_TRAINER_HPP_

#include <vector>

#include "ppoc/advantage.hpp"
#include "ppoc/agent.hpp"
#include "ppoc/env.hpp"
#include "ppoc/rollout.hpp"
#include "ppoc/tensor.hpp"

namespace ppoc {

struct TrainerConfig {
  double gamma = 0.99;
  double lambda = 0.95;
  double clip_eps = 0.2;
  double eta = 0.0;  // deliberation cost, in (scaled) reward units
  int n_options = 1;
  int epochs = 10;       // optimizer passes over each collected batch
  int horizon = 2000;    // transitions collected per iteration
  int minibatch = 64;    // before division by the option count
  double lr_actor = 3e-4;
  double lr_critic = 1e-3;
  double entropy_coef = 0.0;
  int iterations = 200;
  bool reward_scale = true;  // x0.1 when more than one option is in play
  int hidden = 64;
};

struct IterationReport {
  int episodes = 0;          // episodes completed inside this iteration
  double mean_return = 0.0;  // unscaled environment return
  double std_return = 0.0;
  double surrogate_loss = 0.0;
  double value_loss = 0.0;
  double termination_loss = 0.0;
  double option_policy_loss = 0.0;
  double kl_proxy = 0.0;
  double switch_rate = 0.0;
  double option_change_rate = 0.0;
  std::vector<double> option_usage;
  bool has_terrain = false;
  std::vector<double> usage_on_ice, usage_off_ice;
  double wall_seconds = 0.0;
};

// --- loss builders (exposed for gradient verification) ---
// Each builds a scalar node on the tape from a minibatch slice of the
// batch. Slices for the surrogate, termination and value losses must be
// single-option (the per-option optimization loop guarantees this).

struct SurrogateResult {
  Tensor loss;
  double kl_proxy = 0.0;  // mean (ratio - 1) - log ratio over the slice
};

// -mean min(ratio*A, clip(ratio, 1-eps, 1+eps)*A) - entropy_coef * entropy.
// `advantages` is indexed by transition id (normalized, full batch).
SurrogateResult clipped_surrogate(Tape& tape, OptionAgent& agent, const TrajectoryBatch& batch,
                                  const std::vector<int>& idx, int option,
                                  const std::vector<double>& advantages, double clip_eps,
                                  double entropy_coef);

// mean beta(next_state, o) * (termination advantage + eta); the advantage
// values are fixed inputs, so the gradient only reaches the termination
// parameters (and the critic trunk below them).
Tensor termination_loss(Tape& tape, OptionAgent& agent, const TrajectoryBatch& batch,
                        const std::vector<int>& idx, int option,
                        const std::vector<double>& adv_plus_eta);

// -mean log mu(o_t|s_t) * A_t with fixed advantages.
Tensor option_policy_loss(Tape& tape, OptionAgent& agent, const TrajectoryBatch& batch,
                          const std::vector<int>& idx, const std::vector<double>& advantages);

// mean (G_t - Q(s_t,o_t))^2 with fixed targets.
Tensor value_loss(Tape& tape, OptionAgent& agent, const TrajectoryBatch& batch,
                  const std::vector<int>& idx, int option, const std::vector<double>& targets);

// One full iteration: collect `horizon` transitions, compute advantages
// and targets once, then run `epochs` passes of per-option minibatch
// updates (minibatch size divided by the option count). With one option
// the termination and option-policy updates vanish and the iteration is a
// plain clipped-surrogate actor-critic update, untouched by eta.
IterationReport train_iteration(OptionAgent& agent, Environment& env, const TrainerConfig& cfg,
                                RunRngs& rngs);

// Helper shared with evaluation code: a state matrix from a batch slice.
Tensor slice_states(const TrajectoryBatch& batch, const std::vector<int>& idx, bool next_state);

}  // namespace ppoc

#endif  // PPOC_TRAINER_HPP_
