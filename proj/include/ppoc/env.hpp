#ifndef PPOC_ENV_HPP_
#define PPOC_ENV_HPP_

#include <memory>
#include <string>
#include <vector>

#include "ppoc/common.hpp"
#include "ppoc/rng.hpp"

namespace ppoc {

struct EnvironmentSpec {
  std::string name;
  int observation_dim = 0;
  int action_dim = 0;
  int max_episode_steps = 0;
  double action_low = -1.0;
  double action_high = 1.0;
};

struct EnvInfo {
  bool success = false;
  bool on_ice = false;
  bool timeout = false;  // episode ended by step limit, not by a terminal state
};

struct StepResult {
  std::vector<double> observation;
  double reward = 0.0;
  bool done = false;
  EnvInfo info;
};

// Deterministic-dynamics continuous-control task. One instance is owned by
// one run; reset() consumes draws only from the stream it is given.
class Environment {
 public:
  virtual ~Environment() = default;
  virtual const EnvironmentSpec& spec() const = 0;
  virtual std::vector<double> reset(Rng& rng) = 0;
  // Actions are clamped to the spec bounds before use. Stepping a finished
  // episode is a contract violation.
  virtual StepResult step(const std::vector<double>& action) = 0;
  // Terrain indicator of the current state; false where the concept does
  // not apply.
  virtual bool on_ice() const { return false; }
  virtual bool has_terrain_flag() const { return false; }
};

// 1-D point mass on the segment [-2, 2]. Start near -1, goal at +1.
//   v <- clamp(v + 0.1 a, -1, 1);  p <- clamp(p + 0.1 v, -2, 2)
//   reward = -|p - 1| - 0.001 a^2; episode ends after 200 steps (timeout).
class PointMass1D final : public Environment {
 public:
  PointMass1D();
  const EnvironmentSpec& spec() const override { return spec_; }
  std::vector<double> reset(Rng& rng) override;
  StepResult step(const std::vector<double>& action) override;

  // Test/inspection hook: place the mass directly.
  void set_state(double p, double v);
  double position() const { return p_; }
  double velocity() const { return v_; }

 private:
  std::vector<double> observe() const { return {p_, v_}; }
  EnvironmentSpec spec_;
  double p_ = 0.0, v_ = 0.0;
  int steps_ = 0;
  bool active_ = false;
};

// Length-10 corridor with friction everywhere except two slippery ice
// blocks covering [3,4) and [7,8). Dynamics per step (action a in [-1,1]):
//   normal ground: v <- 0.9 v + 0.1 a        (strong control, friction)
//   on ice:        v <- v + 0.01 a           (weak control, no friction)
//   p <- p + 0.1 v;  reward = (p_new - p_old) - 0.01 a^2
// The episode ends with +10 and success when p >= 10, with -1 when the
// agent is on ice moving slower than |v| = 0.05 (stuck), or after 400
// steps (timeout). Terrain for the velocity update is taken at the old
// position; the stuck check uses the new position and new velocity.
// Observation: [p/10, v, clamp(dist to next ice start, 0, 2)/2, on_ice].
class IceCorridor final : public Environment {
 public:
  IceCorridor();
  const EnvironmentSpec& spec() const override { return spec_; }
  std::vector<double> reset(Rng& rng) override;
  StepResult step(const std::vector<double>& action) override;
  bool on_ice() const override { return ice_at(p_); }
  bool has_terrain_flag() const override { return true; }

  void set_state(double p, double v);
  double position() const { return p_; }
  double velocity() const { return v_; }

  static bool ice_at(double p) { return (p >= 3.0 && p < 4.0) || (p >= 7.0 && p < 8.0); }

 private:
  std::vector<double> observe() const;
  EnvironmentSpec spec_;
  double p_ = 0.0, v_ = 0.0;
  int steps_ = 0;
  bool active_ = false;
};

// Environment registry, keyed by the names accepted in configs.
std::unique_ptr<Environment> make_environment(const std::string& name);

// Hand-written reference controllers. They prove the tasks solvable and
// set the return bar used by the experiment checks.
double pointmass_oracle_action(const std::vector<double>& obs);
double icecorridor_oracle_action(const std::vector<double>& obs);
double scripted_oracle_action(const std::string& env_name, const std::vector<double>& obs);

struct OracleRollout {
  double total_reward = 0.0;
  bool success = false;
  int steps = 0;
};
OracleRollout run_scripted_oracle(Environment& env, Rng& rng);

}  // namespace ppoc

#endif  // PPOC_ENV_HPP_
