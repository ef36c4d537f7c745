#pragma once

#include <filesystem>
#include <memory>

#include "hrl/config.hpp"
#include "hrl/training.hpp"

namespace hrl::harness {

struct RunOutcome {
  brhpo::RunSummary summary;
  std::filesystem::path dir;
};

// One training run into `out_dir`: config.json (resolved), metrics.csv
// (recreated), checkpoints/step_<n>/ every checkpoint_interval steps,
// checkpoints/final/, and summary.json.
RunOutcome execute_run(const RunConfig& cfg, const std::filesystem::path& out_dir);

void save_checkpoint(const brhpo::HierAgent& agent, const RunConfig& cfg, long env_step,
                     const std::filesystem::path& dir);
// Rebuilds an agent from a checkpoint directory; the stored config is
// returned through `cfg_out` when given.
std::unique_ptr<brhpo::HierAgent> load_checkpoint(const std::filesystem::path& dir,
                                                  RunConfig* cfg_out = nullptr);

}  // namespace hrl::harness
