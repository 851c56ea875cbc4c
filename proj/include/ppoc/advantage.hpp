#ifndef PPOC_ADVANTAGE_HPP_
#define PPOC_ADVANTAGE_HPP_

#include <cstdint>
#include <vector>

#include "ppoc/agent.hpp"
#include "ppoc/rollout.hpp"

namespace ppoc {

// Discounted return targets. `next_values` supplies the value used where
// the recursion is cut: at done steps (0 for terminal states, a critic
// bootstrap for timeouts) and at the final step of a truncated batch.
std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       const std::vector<uint8_t>& dones,
                                       const std::vector<double>& next_values, double gamma);

struct GaeResult {
  std::vector<double> advantages;
  std::vector<double> value_targets;  // advantage + value, the regression target
};

// Generalized advantage estimation over the option trajectory:
//   delta_t = r_t + gamma * V_{t+1} - value_t
//   A_t     = delta_t + gamma * lambda * A_{t+1}   (reset at episode ends)
// where V_{t+1} is values[t+1] along an episode and next_values[t] at cut
// points. lambda = 1 recovers the Monte-Carlo advantage, lambda = 0 the
// one-step TD residual.
GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values,
              const std::vector<double>& next_values, const std::vector<uint8_t>& dones,
              double gamma, double lambda);

// Per-transition termination advantage with margin:
//   Q(s', o) - V(s') + eta, evaluated with the current critic at the
// state where the termination was sampled. Pure read of the agent.
std::vector<double> termination_advantage(const TrajectoryBatch& batch, const OptionAgent& agent,
                                          double eta);

// Zero-mean unit-deviation copy (sample deviation, 1e-8 guard). Sequences
// shorter than two entries come back unchanged.
std::vector<double> normalize_advantages(const std::vector<double>& a);

// Column extractors for feeding the estimators from a batch.
std::vector<double> batch_rewards(const TrajectoryBatch& b);
std::vector<double> batch_values(const TrajectoryBatch& b);
std::vector<double> batch_next_values(const TrajectoryBatch& b);
std::vector<uint8_t> batch_dones(const TrajectoryBatch& b);

}  // namespace ppoc

#endif  // PPOC_ADVANTAGE_HPP_
