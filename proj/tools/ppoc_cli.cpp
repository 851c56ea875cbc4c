// Command-line front end: train / eval / plot / gradcheck.
#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "ppoc/checkpoint.hpp"
#include "ppoc/env.hpp"
#include "ppoc/experiment.hpp"
#include "ppoc/gradcheck.hpp"
#include "ppoc/plot.hpp"

namespace {

void print_eval_report(const ppoc::EvalReport& rep) {
  std::printf("episodes:        %d\n", rep.episodes);
  if (rep.episodes == 0) return;
  std::printf("mean return:     %.6f\n", rep.mean_return);
  std::printf("std return:      %.6f\n", rep.std_return);
  std::printf("success rate:    %.3f\n", rep.success_rate);
  std::printf("switch rate:     %.4f\n", rep.switch_rate);
  std::printf("option usage:   ");
  for (double u : rep.option_usage) std::printf(" %.3f", u);
  std::printf("\n");
  if (rep.has_terrain) {
    std::printf("usage on ice:   ");
    for (double u : rep.usage_on_ice) std::printf(" %.3f", u);
    std::printf("\nusage off ice:  ");
    for (double u : rep.usage_off_ice) std::printf(" %.3f", u);
    std::printf("\ndominant-option terrain gap: %.3f\n", ppoc::terrain_dominance_gap(rep));
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"option-critic training with clipped-surrogate updates on toy control tasks"};
  app.require_subcommand(1);

  // ---- train ----
  auto* train = app.add_subcommand("train", "run a multi-seed training experiment");
  std::string config_path;
  ppoc::ExperimentConfig cfg;
  train->add_option("--config", config_path, "flat key = value config file");
  auto* env_opt = train->add_option("--env", cfg.env, "pointmass1d or icecorridor");
  auto* options_opt = train->add_option("--options", cfg.trainer.n_options, "number of options");
  auto* eta_opt = train->add_option("--eta", cfg.trainer.eta, "deliberation cost");
  auto* seeds_opt = train->add_option("--seeds", cfg.n_seeds, "number of seeds");
  auto* base_seed_opt = train->add_option("--base-seed", cfg.base_seed, "first seed value");
  auto* out_opt = train->add_option("--out", cfg.out_dir, "output directory");
  auto* gamma_opt = train->add_option("--gamma", cfg.trainer.gamma, "discount factor");
  auto* lambda_opt = train->add_option("--lambda", cfg.trainer.lambda, "advantage estimator mix");
  auto* clip_opt = train->add_option("--clip-eps", cfg.trainer.clip_eps, "surrogate clip range");
  auto* epochs_opt = train->add_option("--epochs", cfg.trainer.epochs, "optimizer passes per batch");
  auto* horizon_opt = train->add_option("--horizon", cfg.trainer.horizon, "steps per iteration");
  auto* minibatch_opt = train->add_option("--minibatch", cfg.trainer.minibatch,
                                          "minibatch size (divided by the option count)");
  auto* lr_actor_opt = train->add_option("--lr-actor", cfg.trainer.lr_actor, "actor step size");
  auto* lr_critic_opt = train->add_option("--lr-critic", cfg.trainer.lr_critic, "critic step size");
  auto* entropy_opt = train->add_option("--entropy-coef", cfg.trainer.entropy_coef, "entropy bonus");
  auto* iters_opt = train->add_option("--iterations", cfg.trainer.iterations, "training iterations");
  auto* hidden_opt = train->add_option("--width", cfg.trainer.hidden, "hidden layer width");
  auto* scale_opt = train->add_flag("--reward-scale,!--no-reward-scale", cfg.trainer.reward_scale,
                                    "scale rewards by 0.1 when options > 1");
  auto* jobs_opt = train->add_option("--jobs", cfg.jobs, "parallel seed workers (0 = auto)");

  // ---- eval ----
  auto* eval = app.add_subcommand("eval", "evaluate a checkpoint");
  std::string ckpt_path, eval_env_name;
  int eval_episodes = 20;
  bool deterministic = false;
  uint64_t eval_seed = 12345;
  eval->add_option("--checkpoint", ckpt_path, "checkpoint file")->required();
  eval->add_option("--env", eval_env_name, "environment override (defaults to the checkpoint's)");
  eval->add_option("--episodes", eval_episodes, "number of evaluation episodes");
  eval->add_flag("--deterministic", deterministic, "mean actions, argmax options");
  eval->add_option("--seed", eval_seed, "evaluation seed");

  // ---- plot ----
  auto* plot = app.add_subcommand("plot", "render learning curves from summary CSVs");
  std::vector<std::string> plot_inputs;
  std::string plot_out = "curves.svg";
  plot->add_option("--inputs", plot_inputs, "summary.csv files")->required();
  plot->add_option("--out", plot_out, "output SVG path");

  // ---- gradcheck ----
  auto* gradcheck = app.add_subcommand("gradcheck", "finite-difference audit of all four losses");
  int gc_seeds = 20;
  gradcheck->add_option("--seeds", gc_seeds, "number of randomized configurations");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*train) {
      if (!config_path.empty()) {
        ppoc::ExperimentConfig from_file = ppoc::parse_experiment_config(config_path);
        // Explicit flags win over file values.
        if (!*env_opt) cfg.env = from_file.env;
        if (!*options_opt) cfg.trainer.n_options = from_file.trainer.n_options;
        if (!*eta_opt) cfg.trainer.eta = from_file.trainer.eta;
        if (!*seeds_opt) cfg.n_seeds = from_file.n_seeds;
        if (!*base_seed_opt) cfg.base_seed = from_file.base_seed;
        if (!*out_opt) cfg.out_dir = from_file.out_dir;
        if (!*gamma_opt) cfg.trainer.gamma = from_file.trainer.gamma;
        if (!*lambda_opt) cfg.trainer.lambda = from_file.trainer.lambda;
        if (!*clip_opt) cfg.trainer.clip_eps = from_file.trainer.clip_eps;
        if (!*epochs_opt) cfg.trainer.epochs = from_file.trainer.epochs;
        if (!*horizon_opt) cfg.trainer.horizon = from_file.trainer.horizon;
        if (!*minibatch_opt) cfg.trainer.minibatch = from_file.trainer.minibatch;
        if (!*lr_actor_opt) cfg.trainer.lr_actor = from_file.trainer.lr_actor;
        if (!*lr_critic_opt) cfg.trainer.lr_critic = from_file.trainer.lr_critic;
        if (!*entropy_opt) cfg.trainer.entropy_coef = from_file.trainer.entropy_coef;
        if (!*iters_opt) cfg.trainer.iterations = from_file.trainer.iterations;
        if (!*hidden_opt) cfg.trainer.hidden = from_file.trainer.hidden;
        if (!*scale_opt) cfg.trainer.reward_scale = from_file.trainer.reward_scale;
        if (!*jobs_opt) cfg.jobs = from_file.jobs;
      }
      ppoc::ExperimentResult res = ppoc::run_experiment(cfg);
      for (const auto& s : res.seeds) {
        const ppoc::IterationReport& last = s.reports.back();
        std::printf("seed %llu: %zu iterations, final mean return %.4f -> %s\n",
                    static_cast<unsigned long long>(s.seed), s.reports.size(), last.mean_return,
                    s.csv_path.c_str());
      }
      std::printf("summary: %s\n", res.summary_path.c_str());
    } else if (*eval) {
      ppoc::LoadedCheckpoint loaded = ppoc::load_checkpoint(ckpt_path);
      const std::string env_name = eval_env_name.empty() ? loaded.env_name : eval_env_name;
      auto env = ppoc::make_environment(env_name);
      ppoc::EvalReport rep =
          ppoc::evaluate_policy(loaded.agent, *env, eval_episodes, deterministic, eval_seed);
      std::printf("environment:     %s\n", env_name.c_str());
      print_eval_report(rep);
    } else if (*plot) {
      ppoc::plot_curves(plot_inputs, plot_out);
      std::printf("wrote %s\n", plot_out.c_str());
    } else if (*gradcheck) {
      ppoc::GradCheckReport rep = ppoc::run_gradcheck(gc_seeds);
      std::fputs(rep.to_string().c_str(), stdout);
      return rep.pass ? 0 : 1;
    }
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return 1;
  }
  return 0;
}
