#include "ppoc/advantage.hpp"

#include <cmath>

namespace ppoc {

namespace {
void check_lengths(size_t a, size_t b, size_t c, size_t d) {
  if (a != b || a != c || a != d)
    throw ContractViolation("advantage estimation: input sequences differ in length");
}
}  // namespace

std::vector<double> discounted_returns(const std::vector<double>& rewards,
                                       const std::vector<uint8_t>& dones,
                                       const std::vector<double>& next_values, double gamma) {
  check_lengths(rewards.size(), dones.size(), next_values.size(), rewards.size());
  if (gamma < 0.0 || gamma >= 1.0)
    throw ContractViolation("discounted_returns: gamma must lie in [0,1)");
  const int n = static_cast<int>(rewards.size());
  std::vector<double> out(n, 0.0);
  double carry = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const double next = (dones[t] || t == n - 1) ? next_values[t] : carry;
    carry = rewards[t] + gamma * next;
    out[t] = carry;
  }
  return out;
}

GaeResult gae(const std::vector<double>& rewards, const std::vector<double>& values,
              const std::vector<double>& next_values, const std::vector<uint8_t>& dones,
              double gamma, double lambda) {
  check_lengths(rewards.size(), values.size(), next_values.size(), dones.size());
  if (lambda < 0.0 || lambda > 1.0) throw ContractViolation("gae: lambda must lie in [0,1]");
  const int n = static_cast<int>(rewards.size());
  GaeResult out;
  out.advantages.assign(n, 0.0);
  out.value_targets.assign(n, 0.0);
  double carry = 0.0;
  for (int t = n - 1; t >= 0; --t) {
    const bool cut = dones[t] || t == n - 1;
    const double next = cut ? next_values[t] : values[t + 1];
    const double delta = rewards[t] + gamma * next - values[t];
    carry = delta + gamma * lambda * (cut ? 0.0 : carry);
    out.advantages[t] = carry;
    out.value_targets[t] = carry + values[t];
  }
  return out;
}

std::vector<double> termination_advantage(const TrajectoryBatch& batch, const OptionAgent& agent,
                                          double eta) {
  std::vector<double> out(batch.transitions.size());
  for (size_t t = 0; t < batch.transitions.size(); ++t) {
    const Transition& tr = batch.transitions[t];
    const std::vector<double> q = agent.q_values(tr.next_state);
    const double v = agent.v_value(tr.next_state);
    out[t] = q[tr.option] - v + eta;
  }
  return out;
}

std::vector<double> normalize_advantages(const std::vector<double>& a) {
  if (a.size() < 2) return a;
  const double m = mean_of(a);
  const double sd = stddev_of(a);
  std::vector<double> out(a.size());
  for (size_t i = 0; i < a.size(); ++i) out[i] = (a[i] - m) / (sd + 1e-8);
  return out;
}

std::vector<double> batch_rewards(const TrajectoryBatch& b) {
  std::vector<double> out(b.transitions.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = b.transitions[i].adjusted_reward;
  return out;
}
std::vector<double> batch_values(const TrajectoryBatch& b) {
  std::vector<double> out(b.transitions.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = b.transitions[i].value;
  return out;
}
std::vector<double> batch_next_values(const TrajectoryBatch& b) {
  std::vector<double> out(b.transitions.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = b.transitions[i].next_value;
  return out;
}
std::vector<uint8_t> batch_dones(const TrajectoryBatch& b) {
  std::vector<uint8_t> out(b.transitions.size());
  for (size_t i = 0; i < out.size(); ++i) out[i] = b.transitions[i].episode_done ? 1 : 0;
  return out;
}

}  // namespace ppoc
