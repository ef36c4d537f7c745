#include "hrl/evaluate.hpp"

#include "hrl/errors.hpp"
#include "hrl/reachability.hpp"

namespace hrl::harness {

EvalResult evaluate(HierarchicalController& controller, const envs::EnvSpec& env, int n_episodes,
                    int k, envs::DistanceMetric metric, Rng& rng) {
  require(n_episodes >= 1, "evaluate: n_episodes must be at least 1");
  require(k >= 1, "evaluate: k must be positive");
  EvalResult out;
  out.episodes = n_episodes;
  double return_sum = 0.0;
  double reach_sum = 0.0;
  long subtasks = 0;
  for (int ep = 0; ep < n_episodes; ++ep) {
    const envs::Goal task = envs::evaluation_goal(env, ep, rng);
    envs::State s = envs::start_state(env);
    bool done = false;
    while (!done) {
      const envs::Goal g = controller.subgoal(s, task, rng);
      brhpo::SubtaskTrace trace(s, g, k, metric);
      while (!trace.full() && !done) {
        const envs::Action a = controller.action(s, g, rng);
        const envs::StepResult r = envs::step(env, s, a, task, rng);
        trace.append(s, a, r.reward, r.state);
        return_sum += r.reward;
        s = r.state;
        done = r.done;
      }
      reach_sum += brhpo::reachability(trace);
      ++subtasks;
    }
    if (envs::success(env, s, task)) ++out.successes;
  }
  out.success_rate = static_cast<double>(out.successes) / n_episodes;
  out.mean_return = return_sum / n_episodes;
  out.mean_reachability = subtasks > 0 ? reach_sum / static_cast<double>(subtasks) : 0.0;
  return out;
}

}  // namespace hrl::harness
