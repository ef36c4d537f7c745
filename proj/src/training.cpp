#include "hrl/training.hpp"

#include <algorithm>

#include "hrl/errors.hpp"

namespace hrl::brhpo {

namespace {

struct LossTally {
  double high_actor = 0.0, high_critic = 0.0, low_actor = 0.0, low_critic = 0.0;
  long n_high = 0, n_low = 0;

  void add_high(const LossPair& l) {
    high_actor += l.actor;
    high_critic += l.critic;
    ++n_high;
  }
  void add_low(const LossPair& l) {
    low_actor += l.actor;
    low_critic += l.critic;
    ++n_low;
  }
  void fill(harness::MetricsRow& row) const {
    if (n_high > 0) {
      row.high_actor_loss = high_actor / n_high;
      row.high_critic_loss = high_critic / n_high;
    }
    if (n_low > 0) {
      row.low_actor_loss = low_actor / n_low;
      row.low_critic_loss = low_critic / n_low;
    }
  }
};

}  // namespace

TrainingResult run_training(const BrhpoConfig& cfg, const envs::EnvSpec& env, std::uint64_t seed,
                            const TrainingOptions& opts, harness::MetricsSink* sink) {
  require(opts.total_steps >= 1, "run_training: total_steps must be positive");
  require(opts.eval_interval >= 1, "run_training: eval_interval must be positive");
  require(opts.eval_episodes >= 1, "run_training: eval_episodes must be positive");

  TrainingResult result;
  result.agent = std::make_unique<HierAgent>(cfg, env, seed);
  HierAgent& agent = *result.agent;
  RunSummary& summary = result.summary;

  Rng env_rng = Rng::substream(seed, "env");
  Rng high_rng = Rng::substream(seed, "high_actor");
  Rng low_rng = Rng::substream(seed, "low_actor");
  Rng eval_rng = Rng::substream(seed, "eval");
  Rng replay_rng = Rng::substream(seed, "replay");
  Rng explore_rng = Rng::substream(seed, "explore");

  sac::ReplayBuffer<HighTransition> high_buffer(static_cast<std::size_t>(cfg.sac.high_buffer));
  sac::ReplayBuffer<LowTransition> low_buffer(static_cast<std::size_t>(cfg.sac.low_buffer));
  const std::size_t batch = static_cast<std::size_t>(cfg.sac.batch_size);
  const double lambda2 = cfg.lambda2_effective();

  LossTally tally;
  long step = 0;
  int episode = 0;

  const auto evaluate_now = [&] {
    harness::EvalResult ev =
        harness::evaluate(agent, env, opts.eval_episodes, cfg.k, cfg.metric, eval_rng);
    harness::MetricsRow row;
    row.env_step = step;
    row.episode = episode;
    row.eval_success_rate = ev.success_rate;
    row.eval_return = ev.mean_return;
    row.mean_reachability = ev.mean_reachability;
    tally.fill(row);
    tally = LossTally{};
    summary.rows.push_back(row);
    summary.final_success_rate = ev.success_rate;
    summary.final_mean_reachability = ev.mean_reachability;
    if (sink) sink->emit(row);
  };

  try {
    while (step < opts.total_steps) {
      auto [s, task] = envs::reset(env, env_rng);
      ++episode;
      bool done = false;
      while (!done && step < opts.total_steps) {
        const bool warmup = step < cfg.sac.start_steps;
        const Goal g = warmup ? agent.random_subgoal(s, explore_rng)
                              : agent.propose(s, task, high_rng, false);
        SubtaskTrace trace(s, g, cfg.k, cfg.metric);
        while (!trace.full() && !done && step < opts.total_steps) {
          const Action a = step < cfg.sac.start_steps ? agent.random_action(explore_rng)
                                                      : agent.act(s, g, low_rng, false);
          const envs::StepResult r = envs::step(env, s, a, task, env_rng);
          trace.append(s, a, r.reward, r.state);
          s = r.state;
          done = r.done;
          ++step;

          if (step >= cfg.sac.start_steps && low_buffer.size() >= batch) {
            for (int u = 0; u < cfg.sac.updates_per_step; ++u) {
              tally.add_low(agent.update_low(low_buffer.sample(batch, replay_rng), low_rng));
              ++summary.low_updates;
            }
          }
          if (step % opts.eval_interval == 0) evaluate_now();
          if (opts.on_checkpoint && opts.checkpoint_interval > 0 &&
              step % opts.checkpoint_interval == 0 && step < opts.total_steps) {
            opts.on_checkpoint(agent, step);
          }
        }
        if (!trace.full()) trace.mark_truncated();

        const double reach = reachability_from_rewards(trace, cfg.eps_denom);
        const std::vector<double> r_hat =
            surrogate_low_rewards(trace, reach, lambda2, cfg.metric, cfg.reach_clip);
        std::vector<LowTransition> lows;
        lows.reserve(trace.steps().size());
        for (std::size_t j = 0; j < trace.steps().size(); ++j) {
          const TraceStep& st = trace.steps()[j];
          lows.push_back(LowTransition{st.state, g, st.action, r_hat[j], st.next_state, false});
        }
        const HighTransition high{trace.start_state(), task, g, high_reward(trace),
                                  trace.final_state(), reach, done};
        if (opts.on_subtask) opts.on_subtask(trace, high, lows);
        for (auto& t : lows) low_buffer.push(std::move(t));
        high_buffer.push(high);

        if (step >= cfg.sac.start_steps && high_buffer.size() >= batch) {
          tally.add_high(agent.update_high(high_buffer.sample(batch, replay_rng), high_rng));
          ++summary.high_updates;
        }
      }
    }
    if (summary.rows.empty() || summary.rows.back().env_step != step) evaluate_now();
  } catch (const NumericalError& e) {
    summary.aborted = true;
    summary.diagnostic = std::string(e.what()) + " at env_step " + std::to_string(step);
  }
  summary.env_steps = step;
  summary.episodes = episode;
  if (!summary.aborted && opts.on_checkpoint) opts.on_checkpoint(agent, step);
  return result;
}

}  // namespace hrl::brhpo
