#include "ppoc/gradcheck.hpp"

#include <cmath>
#include <sstream>

#include "ppoc/trainer.hpp"

namespace ppoc {

TrajectoryBatch synthetic_batch(const AgentConfig& cfg, const OptionAgent& agent, int length,
                                Rng& rng) {
  TrajectoryBatch batch;
  batch.n_options = cfg.n_options;
  batch.option_index.assign(cfg.n_options, {});
  for (int t = 0; t < length; ++t) {
    Transition tr;
    tr.option = static_cast<int>(rng.below(cfg.n_options));
    tr.state.resize(cfg.obs_dim);
    tr.next_state.resize(cfg.obs_dim);
    for (auto& x : tr.state) x = rng.uniform(-1.0, 1.0);
    for (auto& x : tr.next_state) x = rng.uniform(-1.0, 1.0);
    ActionSample a = agent.sample_action(tr.state, tr.option, rng);
    tr.action_raw = a.raw;
    // Offset the stored log-probability so importance ratios land strictly
    // inside (0.86, 1.17), clear of the clip kinks where one-sided
    // derivatives would defeat central differencing.
    tr.log_prob_old = a.log_prob - rng.uniform(-0.15, 0.15);
    tr.option_prob_old = agent.option_distribution(tr.state)[tr.option];
    tr.value = rng.uniform(-1.0, 1.0);
    tr.next_value = rng.uniform(-1.0, 1.0);
    tr.episode_done = rng.bernoulli(0.1);
    tr.episode_id = 0;
    batch.option_index[tr.option].push_back(t);
    batch.transitions.push_back(std::move(tr));
  }
  return batch;
}

namespace {

enum class LossKind { kSurrogate, kTermination, kOptionPolicy, kValue };

double eval_loss(LossKind kind, OptionAgent& agent, const TrajectoryBatch& batch,
                 const std::vector<int>& idx, int option, const std::vector<double>& aux,
                 double clip_eps) {
  Tape tape;
  switch (kind) {
    case LossKind::kSurrogate:
      return clipped_surrogate(tape, agent, batch, idx, option, aux, clip_eps, 0.01).loss.values[0];
    case LossKind::kTermination:
      return termination_loss(tape, agent, batch, idx, option, aux).values[0];
    case LossKind::kOptionPolicy:
      return option_policy_loss(tape, agent, batch, idx, aux).values[0];
    case LossKind::kValue:
      return value_loss(tape, agent, batch, idx, option, aux).values[0];
  }
  return 0.0;
}

// Largest per-coordinate mismatch between the tape gradient and central
// finite differences over every parameter of `params`.
double max_fd_error(LossKind kind, OptionAgent& agent, ParameterSet& params,
                    const TrajectoryBatch& batch, const std::vector<int>& idx, int option,
                    const std::vector<double>& aux, double clip_eps, double step, double abs_floor,
                    double tolerance) {
  agent.actor().zero_grad();
  agent.critic().zero_grad();
  {
    Tape tape;
    Tensor loss;
    switch (kind) {
      case LossKind::kSurrogate:
        loss = clipped_surrogate(tape, agent, batch, idx, option, aux, clip_eps, 0.01).loss;
        break;
      case LossKind::kTermination:
        loss = termination_loss(tape, agent, batch, idx, option, aux);
        break;
      case LossKind::kOptionPolicy:
        loss = option_policy_loss(tape, agent, batch, idx, aux);
        break;
      case LossKind::kValue:
        loss = value_loss(tape, agent, batch, idx, option, aux);
        break;
    }
    tape.backward(loss);
  }

  double worst = 0.0;
  for (auto& p : params) {
    for (size_t i = 0; i < p->value.size(); ++i) {
      const double saved = p->value.values[i];
      p->value.values[i] = saved + step;
      const double f_plus = eval_loss(kind, agent, batch, idx, option, aux, clip_eps);
      p->value.values[i] = saved - step;
      const double f_minus = eval_loss(kind, agent, batch, idx, option, aux, clip_eps);
      p->value.values[i] = saved;
      const double numeric = (f_plus - f_minus) / (2.0 * step);
      const double analytic = p->grad[i];
      const double scale = std::max(std::abs(analytic), std::abs(numeric));
      const double err = std::abs(analytic - numeric) / std::max(scale * tolerance, abs_floor);
      // err is measured in units of the acceptance bound; record the raw
      // normalized mismatch so the report shows margin.
      worst = std::max(worst, err * tolerance);
    }
  }
  return worst;
}

}  // namespace

GradCheckReport run_gradcheck(int seeds, double step, double tolerance, double abs_floor) {
  GradCheckReport rep;
  rep.seeds = seeds;
  rep.tolerance = tolerance;
  rep.abs_floor = abs_floor;

  for (int s = 0; s < seeds; ++s) {
    Rng rng(0x5eedULL + s, 7);
    AgentConfig cfg;
    cfg.obs_dim = 3;
    cfg.action_dim = 2;
    cfg.n_options = 2;
    cfg.hidden = 6;
    OptionAgent agent(cfg, rng);
    TrajectoryBatch batch = synthetic_batch(cfg, agent, 12, rng);

    std::vector<double> adv(batch.transitions.size());
    std::vector<double> adv_eta(batch.transitions.size());
    std::vector<double> targets(batch.transitions.size());
    for (auto& x : adv) x = rng.uniform(-2.0, 2.0);
    for (auto& x : adv_eta) x = rng.uniform(-1.5, 1.5);
    for (auto& x : targets) x = rng.uniform(-2.0, 2.0);

    std::vector<int> all_idx(batch.transitions.size());
    for (size_t i = 0; i < all_idx.size(); ++i) all_idx[i] = static_cast<int>(i);

    for (int o = 0; o < cfg.n_options; ++o) {
      const std::vector<int>& idx = batch.option_index[o];
      if (idx.empty()) continue;
      rep.max_err_surrogate =
          std::max(rep.max_err_surrogate,
                   max_fd_error(LossKind::kSurrogate, agent, agent.actor(), batch, idx, o, adv, 0.2,
                                step, abs_floor, tolerance));
      rep.max_err_termination =
          std::max(rep.max_err_termination,
                   max_fd_error(LossKind::kTermination, agent, agent.critic(), batch, idx, o,
                                adv_eta, 0.2, step, abs_floor, tolerance));
      rep.max_err_value =
          std::max(rep.max_err_value, max_fd_error(LossKind::kValue, agent, agent.critic(), batch,
                                                   idx, o, targets, 0.2, step, abs_floor, tolerance));
    }
    rep.max_err_option_policy =
        std::max(rep.max_err_option_policy,
                 max_fd_error(LossKind::kOptionPolicy, agent, agent.actor(), batch, all_idx, 0, adv,
                              0.2, step, abs_floor, tolerance));
  }

  rep.pass = rep.max_err_surrogate < tolerance && rep.max_err_termination < tolerance &&
             rep.max_err_option_policy < tolerance && rep.max_err_value < tolerance;
  return rep;
}

std::string GradCheckReport::to_string() const {
  std::ostringstream os;
  os << "gradient audit over " << seeds << " seeds (tolerance " << tolerance << ", floor "
     << abs_floor << ")\n";
  auto line = [&](const char* name, double err) {
    os << "  " << name << ": max relative error " << err << (err < tolerance ? "  ok" : "  FAIL")
       << "\n";
  };
  line("clipped surrogate ", max_err_surrogate);
  line("termination       ", max_err_termination);
  line("option policy     ", max_err_option_policy);
  line("value regression  ", max_err_value);
  os << (pass ? "PASS" : "FAIL") << "\n";
  return os.str();
}

}  // namespace ppoc
