#pragma once

#include "hrl/envs.hpp"
#include "hrl/rng.hpp"

namespace hrl::harness {

// Anything that can drive a two-level rollout.
class HierarchicalController {
 public:
  virtual ~HierarchicalController() = default;
  virtual envs::Goal subgoal(const envs::State& s, const envs::Goal& task_goal, Rng& rng) = 0;
  virtual envs::Action action(const envs::State& s, const envs::Goal& subgoal, Rng& rng) = 0;
};

struct EvalResult {
  double success_rate = 0.0;
  double mean_return = 0.0;
  // Mean reachability over every subtask of every episode.
  double mean_reachability = 0.0;
  int episodes = 0;
  int successes = 0;
};

// Runs `n_episodes` full episodes from the fixed start state, re-planning the
// subgoal every `k` steps. Task goals come from envs::evaluation_goal.
EvalResult evaluate(HierarchicalController& controller, const envs::EnvSpec& env, int n_episodes,
                    int k, envs::DistanceMetric metric, Rng& rng);

}  // namespace hrl::harness
