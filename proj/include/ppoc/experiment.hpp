#ifndef PPOC_EXPERIMENT_HPP_
#define PPOC_EXPERIMENT_HPP_

#include <functional>
#include <string>
#include <vector>

#include "ppoc/agent.hpp"
#include "ppoc/trainer.hpp"

namespace ppoc {

struct ExperimentConfig {
  std::string env = "pointmass1d";
  TrainerConfig trainer;
  int n_seeds = 12;
  uint64_t base_seed = 1;
  std::string out_dir = "runs/out";
  int jobs = 0;  // 0 = one worker per hardware thread, capped at n_seeds
};

// Flat `key = value` file; '#' starts a comment. Keys match the
// ExperimentConfig fields (env, n_options, eta, gamma, lambda, clip_eps,
// epochs, horizon, minibatch, lr_actor, lr_critic, entropy_coef,
// iterations, reward_scale, hidden, n_seeds, base_seed, out_dir, jobs).
ExperimentConfig parse_experiment_config(const std::string& path);
void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& where);

// Shortest representation that round-trips the double exactly.
std::string format_double(double v);

// Runs one seeded training run; the callback sees every iteration (1-based)
// and may return false to stop early. Returns the trained agent.
// The run owns six derived random streams: env, action noise, termination,
// option choice, minibatch shuffling, and weight initialization.
using IterationCallback = std::function<bool(int iteration, const IterationReport&, OptionAgent&)>;
OptionAgent train_run(const std::string& env_name, const TrainerConfig& cfg, uint64_t seed,
                      const IterationCallback& cb);

struct SeedOutcome {
  uint64_t seed = 0;
  std::vector<IterationReport> reports;
  std::string csv_path, checkpoint_path;
};

struct ExperimentResult {
  std::vector<SeedOutcome> seeds;
  std::string summary_path;
};

// Trains n_seeds independent agents (seeds base .. base+n-1), writes one
// CSV per seed, one checkpoint per seed and a cross-seed summary CSV.
// Fails before training when the output directory is not writable. Seeds
// run in parallel; each owns its agent, environment and streams, so the
// logged bytes do not depend on scheduling.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

struct EvalReport {
  int episodes = 0;
  double mean_return = 0.0;  // unscaled
  double std_return = 0.0;
  double success_rate = 0.0;
  double switch_rate = 0.0;
  std::vector<double> option_usage;
  bool has_terrain = false;
  std::vector<double> usage_on_ice, usage_off_ice;
};

// Rolls out `episodes` evaluation episodes. Deterministic mode takes the
// mean action, the argmax option and terminates where beta >= 0.5, so a
// repeated call with the same seed (or any seed) reproduces the report.
EvalReport evaluate_policy(const OptionAgent& agent, Environment& env, int episodes,
                           bool deterministic, uint64_t seed);

// Same protocol driven by the scripted reference controller.
EvalReport evaluate_scripted(Environment& env, int episodes, uint64_t seed);

// |on-ice frequency - off-ice frequency| of the option that dominates on
// the ice. Zero when terrain statistics are absent.
double terrain_dominance_gap(const EvalReport& rep);

// One-sided sign test: probability of at least `wins` successes in
// wins+losses fair coin flips (ties dropped).
double sign_test_p_value(int wins, int losses);

std::string csv_path_for_seed(const std::string& out_dir, uint64_t seed);
std::string checkpoint_path_for_seed(const std::string& out_dir, uint64_t seed);

}  // namespace ppoc

#endif  // PPOC_EXPERIMENT_HPP_
