#include "ppoc/experiment.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include "ppoc/checkpoint.hpp"
#include "ppoc/env.hpp"

namespace ppoc {

namespace fs = std::filesystem;

std::string format_double(double v) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

namespace {

bool parse_bool(const std::string& v, const std::string& where) {
  if (v == "true" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "0" || v == "no") return false;
  throw ContractViolation(where + ": expected a boolean, got '" + v + "'");
}

double parse_double(const std::string& v, const std::string& where) {
  try {
    size_t used = 0;
    const double d = std::stod(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return d;
  } catch (const std::exception&) {
    throw ContractViolation(where + ": expected a number, got '" + v + "'");
  }
}

long long parse_int(const std::string& v, const std::string& where) {
  try {
    size_t used = 0;
    const long long i = std::stoll(v, &used);
    if (used != v.size()) throw std::invalid_argument(v);
    return i;
  } catch (const std::exception&) {
    throw ContractViolation(where + ": expected an integer, got '" + v + "'");
  }
}

std::string trim(const std::string& s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  size_t e = s.find_last_not_of(" \t\r\n");
  return b == std::string::npos ? "" : s.substr(b, e - b + 1);
}

}  // namespace

void apply_config_entry(ExperimentConfig& cfg, const std::string& key, const std::string& value,
                        const std::string& where) {
  TrainerConfig& t = cfg.trainer;
  if (key == "env") cfg.env = value;
  else if (key == "gamma") t.gamma = parse_double(value, where);
  else if (key == "lambda") t.lambda = parse_double(value, where);
  else if (key == "clip_eps") t.clip_eps = parse_double(value, where);
  else if (key == "eta") t.eta = parse_double(value, where);
  else if (key == "n_options") t.n_options = static_cast<int>(parse_int(value, where));
  else if (key == "epochs") t.epochs = static_cast<int>(parse_int(value, where));
  else if (key == "horizon") t.horizon = static_cast<int>(parse_int(value, where));
  else if (key == "minibatch") t.minibatch = static_cast<int>(parse_int(value, where));
  else if (key == "lr_actor") t.lr_actor = parse_double(value, where);
  else if (key == "lr_critic") t.lr_critic = parse_double(value, where);
  else if (key == "entropy_coef") t.entropy_coef = parse_double(value, where);
  else if (key == "iterations") t.iterations = static_cast<int>(parse_int(value, where));
  else if (key == "reward_scale") t.reward_scale = parse_bool(value, where);
  else if (key == "hidden") t.hidden = static_cast<int>(parse_int(value, where));
  else if (key == "n_seeds") cfg.n_seeds = static_cast<int>(parse_int(value, where));
  else if (key == "base_seed") cfg.base_seed = static_cast<uint64_t>(parse_int(value, where));
  else if (key == "out_dir") cfg.out_dir = value;
  else if (key == "jobs") cfg.jobs = static_cast<int>(parse_int(value, where));
  else throw ContractViolation(where + ": unknown key '" + key + "'");
}

ExperimentConfig parse_experiment_config(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw ContractViolation("cannot open config file: " + path);
  ExperimentConfig cfg;
  std::string line;
  int lineno = 0;
  while (std::getline(is, line)) {
    ++lineno;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    const std::string where = path + ":" + std::to_string(lineno);
    if (eq == std::string::npos)
      throw ContractViolation(where + ": expected 'key = value'");
    apply_config_entry(cfg, trim(line.substr(0, eq)), trim(line.substr(eq + 1)), where);
  }
  return cfg;
}

OptionAgent train_run(const std::string& env_name, const TrainerConfig& cfg, uint64_t seed,
                      const IterationCallback& cb) {
  std::unique_ptr<Environment> env = make_environment(env_name);
  RunRngs rngs = RunRngs::for_seed(seed);
  Rng init_rng(seed, 5);

  AgentConfig acfg;
  acfg.obs_dim = env->spec().observation_dim;
  acfg.action_dim = env->spec().action_dim;
  acfg.n_options = cfg.n_options;
  acfg.hidden = cfg.hidden;
  acfg.action_low = env->spec().action_low;
  acfg.action_high = env->spec().action_high;
  OptionAgent agent(acfg, init_rng);

  for (int it = 1; it <= cfg.iterations; ++it) {
    IterationReport rep = train_iteration(agent, *env, cfg, rngs);
    if (cb && !cb(it, rep, agent)) break;
  }
  return agent;
}

namespace {

std::string csv_header(int n_options, bool terrain) {
  std::string h =
      "iteration,steps,episodes,mean_return,std_return,surrogate_loss,value_loss,"
      "termination_loss,option_policy_loss,kl_proxy,switch_rate,option_change_rate";
  for (int o = 0; o < n_options; ++o) h += ",usage_" + std::to_string(o);
  if (terrain) {
    for (int o = 0; o < n_options; ++o) h += ",ice_usage_" + std::to_string(o);
    for (int o = 0; o < n_options; ++o) h += ",ground_usage_" + std::to_string(o);
  }
  return h;
}

void append_csv_row(std::string& out, int iteration, long long steps, const IterationReport& r) {
  out += std::to_string(iteration);
  out += ',';
  out += std::to_string(steps);
  out += ',';
  out += std::to_string(r.episodes);
  for (double v : {r.mean_return, r.std_return, r.surrogate_loss, r.value_loss,
                   r.termination_loss, r.option_policy_loss, r.kl_proxy, r.switch_rate,
                   r.option_change_rate}) {
    out += ',';
    out += format_double(v);
  }
  for (double v : r.option_usage) {
    out += ',';
    out += format_double(v);
  }
  if (r.has_terrain) {
    for (double v : r.usage_on_ice) {
      out += ',';
      out += format_double(v);
    }
    for (double v : r.usage_off_ice) {
      out += ',';
      out += format_double(v);
    }
  }
  out += '\n';
}

}  // namespace

std::string csv_path_for_seed(const std::string& out_dir, uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seed_%03llu.csv", static_cast<unsigned long long>(seed));
  return (fs::path(out_dir) / buf).string();
}

std::string checkpoint_path_for_seed(const std::string& out_dir, uint64_t seed) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "seed_%03llu.ckpt", static_cast<unsigned long long>(seed));
  return (fs::path(out_dir) / buf).string();
}

ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  if (cfg.n_seeds < 1) throw ContractViolation("run_experiment: n_seeds must be >= 1");
  std::error_code ec;
  fs::create_directories(cfg.out_dir, ec);
  {
    // Probe writability up front so a bad output directory fails fast.
    const fs::path probe = fs::path(cfg.out_dir) / ".write_probe";
    std::ofstream p(probe);
    if (!p) throw ContractViolation("output directory is not writable: " + cfg.out_dir);
    p.close();
    fs::remove(probe, ec);
  }

  ExperimentResult result;
  result.seeds.resize(cfg.n_seeds);

  int jobs = cfg.jobs > 0 ? cfg.jobs
                          : static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  jobs = std::min(jobs, cfg.n_seeds);

  std::atomic<int> next{0};
  std::vector<std::string> errors(cfg.n_seeds);
  auto worker = [&]() {
    for (;;) {
      const int k = next.fetch_add(1);
      if (k >= cfg.n_seeds) return;
      const uint64_t seed = cfg.base_seed + static_cast<uint64_t>(k);
      SeedOutcome& out = result.seeds[k];
      out.seed = seed;
      out.csv_path = csv_path_for_seed(cfg.out_dir, seed);
      out.checkpoint_path = checkpoint_path_for_seed(cfg.out_dir, seed);
      try {
        std::string csv = "# ppoc-csv-v1 env=" + cfg.env +
                          " options=" + std::to_string(cfg.trainer.n_options) +
                          " seed=" + std::to_string(seed) + "\n";
        const bool terrain = make_environment(cfg.env)->has_terrain_flag();
        csv += csv_header(cfg.trainer.n_options, terrain) + "\n";
        long long steps = 0;
        OptionAgent agent = train_run(
            cfg.env, cfg.trainer, seed,
            [&](int it, const IterationReport& rep, OptionAgent&) {
              steps += cfg.trainer.horizon;
              append_csv_row(csv, it, steps, rep);
              out.reports.push_back(rep);
              return true;
            });
        std::ofstream os(out.csv_path, std::ios::binary);
        if (!os) throw ContractViolation("cannot write " + out.csv_path);
        os << csv;
        save_checkpoint(out.checkpoint_path, agent, cfg.env);
      } catch (const std::exception& e) {
        errors[k] = e.what();
      }
    }
  };
  std::vector<std::thread> pool;
  for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
  for (auto& th : pool) th.join();
  for (const std::string& err : errors)
    if (!err.empty()) throw ContractViolation("run failed: " + err);

  // Cross-seed summary: per-iteration mean and deviation of the mean return.
  size_t iters = result.seeds.empty() ? 0 : result.seeds[0].reports.size();
  for (const auto& s : result.seeds) iters = std::min(iters, s.reports.size());
  std::string summary = "# ppoc-summary-v1 env=" + cfg.env +
                        " seeds=" + std::to_string(cfg.n_seeds) + "\n";
  summary += "iteration,steps,return_mean,return_std\n";
  for (size_t i = 0; i < iters; ++i) {
    std::vector<double> returns;
    returns.reserve(result.seeds.size());
    for (const auto& s : result.seeds) returns.push_back(s.reports[i].mean_return);
    summary += std::to_string(i + 1) + "," +
               std::to_string(static_cast<long long>(i + 1) * cfg.trainer.horizon) + "," +
               format_double(mean_of(returns)) + "," + format_double(stddev_of(returns)) + "\n";
  }
  result.summary_path = (fs::path(cfg.out_dir) / "summary.csv").string();
  std::ofstream os(result.summary_path, std::ios::binary);
  if (!os) throw ContractViolation("cannot write " + result.summary_path);
  os << summary;
  return result;
}

namespace {

struct EvalAccumulator {
  std::vector<double> returns;
  int successes = 0;
  long long steps = 0;
  long long terminations = 0;
  std::vector<double> usage, usage_ice, usage_ground;
  double ice_steps = 0.0, ground_steps = 0.0;

  explicit EvalAccumulator(int n_options)
      : usage(n_options, 0.0), usage_ice(n_options, 0.0), usage_ground(n_options, 0.0) {}

  EvalReport finish(bool has_terrain) const {
    EvalReport rep;
    rep.episodes = static_cast<int>(returns.size());
    if (rep.episodes == 0) return rep;
    rep.mean_return = mean_of(returns);
    rep.std_return = stddev_of(returns);
    rep.success_rate = static_cast<double>(successes) / rep.episodes;
    rep.switch_rate = steps > 0 ? static_cast<double>(terminations) / steps : 0.0;
    rep.option_usage = usage;
    const double total = static_cast<double>(steps);
    if (total > 0)
      for (double& u : rep.option_usage) u /= total;
    rep.has_terrain = has_terrain;
    if (has_terrain) {
      rep.usage_on_ice = usage_ice;
      rep.usage_off_ice = usage_ground;
      if (ice_steps > 0)
        for (double& u : rep.usage_on_ice) u /= ice_steps;
      if (ground_steps > 0)
        for (double& u : rep.usage_off_ice) u /= ground_steps;
    }
    return rep;
  }
};

int argmax(const std::vector<double>& v) {
  int best = 0;
  for (size_t i = 1; i < v.size(); ++i)
    if (v[i] > v[best]) best = static_cast<int>(i);
  return best;
}

}  // namespace

EvalReport evaluate_policy(const OptionAgent& agent, Environment& env, int episodes,
                           bool deterministic, uint64_t seed) {
  if (static_cast<int>(env.spec().observation_dim) != agent.config().obs_dim ||
      static_cast<int>(env.spec().action_dim) != agent.config().action_dim)
    throw ContractViolation("evaluate_policy: agent dims (" +
                            std::to_string(agent.config().obs_dim) + "," +
                            std::to_string(agent.config().action_dim) + ") do not match " +
                            env.spec().name);
  RunRngs rngs = RunRngs::for_seed(seed);
  EvalAccumulator acc(agent.config().n_options);
  for (int ep = 0; ep < episodes; ++ep) {
    std::vector<double> obs = env.reset(rngs.env);
    int option = deterministic ? argmax(agent.option_distribution(obs))
                               : rngs.option.categorical(agent.option_distribution(obs));
    double ep_return = 0.0;
    for (;;) {
      acc.usage[option] += 1.0;
      if (env.has_terrain_flag()) {
        if (env.on_ice()) {
          acc.usage_ice[option] += 1.0;
          acc.ice_steps += 1.0;
        } else {
          acc.usage_ground[option] += 1.0;
          acc.ground_steps += 1.0;
        }
      }
      std::vector<double> action;
      if (deterministic) {
        action = agent.action_mean(obs, option);
        for (double& a : action) a = clamp(a, agent.config().action_low, agent.config().action_high);
      } else {
        action = agent.sample_action(obs, option, rngs.action).clamped;
      }
      StepResult sr = env.step(action);
      ep_return += sr.reward;
      ++acc.steps;
      if (sr.done) {
        acc.returns.push_back(ep_return);
        if (sr.info.success) ++acc.successes;
        break;
      }
      const double beta = agent.termination_prob(sr.observation, option);
      const bool fired = deterministic ? beta >= 0.5 : rngs.termination.bernoulli(beta);
      if (fired) {
        ++acc.terminations;
        option = deterministic ? argmax(agent.option_distribution(sr.observation))
                               : rngs.option.categorical(agent.option_distribution(sr.observation));
      }
      obs = std::move(sr.observation);
    }
  }
  return acc.finish(env.has_terrain_flag());
}

EvalReport evaluate_scripted(Environment& env, int episodes, uint64_t seed) {
  RunRngs rngs = RunRngs::for_seed(seed);
  EvalAccumulator acc(1);
  for (int ep = 0; ep < episodes; ++ep) {
    OracleRollout roll = run_scripted_oracle(env, rngs.env);
    acc.returns.push_back(roll.total_reward);
    acc.steps += roll.steps;
    acc.usage[0] += roll.steps;
    if (roll.success) ++acc.successes;
  }
  return acc.finish(false);
}

double terrain_dominance_gap(const EvalReport& rep) {
  if (!rep.has_terrain || rep.usage_on_ice.empty()) return 0.0;
  const int o = argmax(rep.usage_on_ice);
  return std::abs(rep.usage_on_ice[o] - rep.usage_off_ice[o]);
}

double sign_test_p_value(int wins, int losses) {
  const int n = wins + losses;
  if (n == 0) return 1.0;
  // P[X >= wins], X ~ Binomial(n, 1/2), via log factorials.
  auto log_fact = [](int k) {
    double s = 0.0;
    for (int i = 2; i <= k; ++i) s += std::log(static_cast<double>(i));
    return s;
  };
  double p = 0.0;
  for (int k = wins; k <= n; ++k) {
    const double log_c = log_fact(n) - log_fact(k) - log_fact(n - k);
    p += std::exp(log_c - n * std::log(2.0));
  }
  return std::min(1.0, p);
}

}  // namespace ppoc
