#ifndef PPOC_GRADCHECK_HPP_
#define PPOC_GRADCHECK_HPP_

#include <string>
#include <vector>

#include "ppoc/agent.hpp"
#include "ppoc/rollout.hpp"

namespace ppoc {

// Central-difference audit of the four training losses on randomized
// small agents and synthetic batches. A coordinate passes when
//   |analytic - numeric| <= max(tol * max(|analytic|, |numeric|), floor).
struct GradCheckReport {
  int seeds = 0;
  double tolerance = 1e-4;
  double abs_floor = 1e-6;
  double max_err_surrogate = 0.0;
  double max_err_termination = 0.0;
  double max_err_option_policy = 0.0;
  double max_err_value = 0.0;
  bool pass = false;

  std::string to_string() const;
};

GradCheckReport run_gradcheck(int seeds = 20, double step = 1e-5, double tolerance = 1e-4,
                              double abs_floor = 1e-6);

// A synthetic batch with ratios kept away from the clip kinks, suitable
// for finite differencing. Shared with the test suite.
TrajectoryBatch synthetic_batch(const AgentConfig& cfg, const OptionAgent& agent, int length,
                                Rng& rng);

}  // namespace ppoc

#endif  // PPOC_GRADCHECK_HPP_
