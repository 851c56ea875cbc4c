#include "ppoc/env.hpp"

#include <cmath>

namespace ppoc {

PointMass1D::PointMass1D() {
  spec_ = {"pointmass1d", 2, 1, 200, -1.0, 1.0};
}

std::vector<double> PointMass1D::reset(Rng& rng) {
  p_ = rng.uniform(-1.2, -0.8);
  v_ = 0.0;
  steps_ = 0;
  active_ = true;
  return observe();
}

void PointMass1D::set_state(double p, double v) {
  p_ = p;
  v_ = v;
  steps_ = 0;
  active_ = true;
}

StepResult PointMass1D::step(const std::vector<double>& action) {
  if (!active_) throw ContractViolation("pointmass1d: step on a finished episode");
  const double a = clamp(action.at(0), spec_.action_low, spec_.action_high);
  v_ = clamp(v_ + 0.1 * a, -1.0, 1.0);
  p_ = clamp(p_ + 0.1 * v_, -2.0, 2.0);
  ++steps_;
  StepResult r;
  r.observation = observe();
  r.reward = -std::abs(p_ - 1.0) - 0.001 * a * a;
  if (steps_ >= spec_.max_episode_steps) {
    r.done = true;
    r.info.timeout = true;
    active_ = false;
  }
  return r;
}

IceCorridor::IceCorridor() {
  spec_ = {"icecorridor", 4, 1, 400, -1.0, 1.0};
}

std::vector<double> IceCorridor::reset(Rng&) {
  p_ = 0.0;
  v_ = 0.0;
  steps_ = 0;
  active_ = true;
  return observe();
}

void IceCorridor::set_state(double p, double v) {
  p_ = p;
  v_ = v;
  steps_ = 0;
  active_ = true;
}

std::vector<double> IceCorridor::observe() const {
  // Distance to the next ice block starting strictly ahead of p.
  double dist = 2.0;
  if (p_ < 3.0)
    dist = 3.0 - p_;
  else if (p_ < 7.0)
    dist = 7.0 - p_;
  dist = clamp(dist, 0.0, 2.0);
  return {p_ / 10.0, v_, dist / 2.0, ice_at(p_) ? 1.0 : 0.0};
}

StepResult IceCorridor::step(const std::vector<double>& action) {
  if (!active_) throw ContractViolation("icecorridor: step on a finished episode");
  const double a = clamp(action.at(0), spec_.action_low, spec_.action_high);
  if (ice_at(p_))
    v_ = v_ + 0.01 * a;
  else
    v_ = 0.9 * v_ + 0.1 * a;
  const double p_old = p_;
  p_ += 0.1 * v_;
  ++steps_;

  StepResult r;
  r.reward = (p_ - p_old) - 0.01 * a * a;
  r.info.on_ice = ice_at(p_);
  if (p_ >= 10.0) {
    r.reward += 10.0;
    r.done = true;
    r.info.success = true;
    active_ = false;
  } else if (ice_at(p_) && std::abs(v_) < 0.05) {
    r.reward -= 1.0;
    r.done = true;
    active_ = false;
  } else if (steps_ >= spec_.max_episode_steps) {
    r.done = true;
    r.info.timeout = true;
    active_ = false;
  }
  r.observation = observe();
  return r;
}

std::unique_ptr<Environment> make_environment(const std::string& name) {
  if (name == "pointmass1d") return std::make_unique<PointMass1D>();
  if (name == "icecorridor") return std::make_unique<IceCorridor>();
  throw ContractViolation("unknown environment: " + name +
                          " (expected pointmass1d or icecorridor)");
}

double pointmass_oracle_action(const std::vector<double>& obs) {
  // Proportional-derivative push toward the goal at p = 1; the gains make
  // it floor the accelerator from the start region and brake into the goal.
  const double p = obs.at(0);
  const double v = obs.at(1);
  return clamp(8.0 * (1.0 - p) - 12.0 * v, -1.0, 1.0);
}

double icecorridor_oracle_action(const std::vector<double>& obs) {
  // Hold cruise speed 0.8 on normal ground and coast over the ice. On
  // friction ground the steady state of v <- 0.9 v + 0.1 a is v = a, so
  // a = 8 - 9 v steers v toward 0.8.
  const double v = obs.at(1);
  const bool on_ice = obs.at(3) > 0.5;
  if (on_ice) return 0.0;
  return clamp(8.0 - 9.0 * v, -1.0, 1.0);
}

double scripted_oracle_action(const std::string& env_name, const std::vector<double>& obs) {
  if (env_name == "pointmass1d") return pointmass_oracle_action(obs);
  if (env_name == "icecorridor") return icecorridor_oracle_action(obs);
  throw ContractViolation("no scripted controller for environment: " + env_name);
}

OracleRollout run_scripted_oracle(Environment& env, Rng& rng) {
  OracleRollout out;
  std::vector<double> obs = env.reset(rng);
  const std::string& name = env.spec().name;
  for (;;) {
    const double a = scripted_oracle_action(name, obs);
    StepResult sr = env.step({a});
    out.total_reward += sr.reward;
    ++out.steps;
    if (sr.done) {
      out.success = sr.info.success;
      break;
    }
    obs = std::move(sr.observation);
  }
  return out;
}

}  // namespace ppoc
