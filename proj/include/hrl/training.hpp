#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "hrl/agent.hpp"
#include "hrl/metrics.hpp"

namespace hrl::brhpo {

struct TrainingOptions {
  long total_steps = 300000;
  long eval_interval = 5000;
  int eval_episodes = 10;
  long checkpoint_interval = 50000;
  // Called every checkpoint_interval steps and once at the end of the run.
  std::function<void(const HierAgent&, long env_step)> on_checkpoint;
  // Sees every finished subtask with the transitions pushed for it.
  std::function<void(const SubtaskTrace&, const HighTransition&, const std::vector<LowTransition>&)>
      on_subtask;
};

struct RunSummary {
  long env_steps = 0;
  int episodes = 0;
  std::vector<harness::MetricsRow> rows;
  double final_success_rate = 0.0;
  double final_mean_reachability = 0.0;
  bool aborted = false;
  std::string diagnostic;  // set when aborted
  long low_updates = 0;
  long high_updates = 0;
};

struct TrainingResult {
  std::unique_ptr<HierAgent> agent;
  RunSummary summary;
};

// The full two-level training loop. A non-finite loss stops the run and is
// reported through summary.aborted / summary.diagnostic.
TrainingResult run_training(const BrhpoConfig& cfg, const envs::EnvSpec& env, std::uint64_t seed,
                            const TrainingOptions& opts, harness::MetricsSink* sink);

}  // namespace hrl::brhpo
