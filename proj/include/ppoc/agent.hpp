#ifndef PPOC_AGENT_HPP_
#define PPOC_AGENT_HPP_

#include <string>
#include <vector>

#include "ppoc/optimizer.hpp"
#include "ppoc/rng.hpp"
#include "ppoc/tensor.hpp"

namespace ppoc {

struct AgentConfig {
  int obs_dim = 0;
  int action_dim = 0;
  int n_options = 1;
  int hidden = 64;
  double action_low = -1.0;
  double action_high = 1.0;
};

struct ActionSample {
  std::vector<double> raw;      // used for log-probabilities
  std::vector<double> clamped;  // sent to the environment
  double log_prob = 0.0;
  int option = 0;
};

// Two independent networks, each a two-layer tanh trunk:
//   actor:  softmax head for the option distribution, one linear mean head
//           and one state-independent log-std vector per option;
//   critic: linear per-option value head and sigmoid per-option
//           termination head.
class OptionAgent {
 public:
  OptionAgent(const AgentConfig& cfg, Rng& init_rng);

  const AgentConfig& config() const { return cfg_; }
  ParameterSet& actor() { return actor_; }
  ParameterSet& critic() { return critic_; }
  const ParameterSet& actor() const { return actor_; }
  const ParameterSet& critic() const { return critic_; }

  // --- untracked evaluation ---
  std::vector<double> option_distribution(const std::vector<double>& s) const;
  std::vector<double> action_mean(const std::vector<double>& s, int option) const;
  const std::vector<double>& action_log_std(int option) const;
  ActionSample sample_action(const std::vector<double>& s, int option, Rng& noise) const;
  double action_log_prob(const std::vector<double>& s, int option,
                         const std::vector<double>& raw_action) const;
  double termination_prob(const std::vector<double>& s, int option) const;
  std::vector<double> q_values(const std::vector<double>& s) const;
  // V(s) = sum_o mu(o|s) Q(s,o); the option distribution is treated as a
  // constant here, so nothing differentiates through it.
  double v_value(const std::vector<double>& s) const;

  // --- tape builders for training (obs already lifted onto the tape) ---
  Tensor actor_trunk(Tape& t, const Tensor& obs);
  Tensor option_logits(Tape& t, const Tensor& trunk);
  Tensor action_mean_node(Tape& t, const Tensor& trunk, int option);
  Tensor log_std_node(Tape& t, int option);
  Tensor critic_trunk(Tape& t, const Tensor& obs);
  Tensor q_all_node(Tape& t, const Tensor& trunk);
  Tensor termination_all_node(Tape& t, const Tensor& trunk);  // sigmoid applied

 private:
  void check_option(int option) const;
  void check_obs(const std::vector<double>& s) const;

  AgentConfig cfg_;
  ParameterSet actor_, critic_;
};

}  // namespace ppoc

#endif  // PPOC_AGENT_HPP_
