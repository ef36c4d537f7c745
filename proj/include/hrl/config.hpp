#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <json.hpp>

#include "hrl/agent.hpp"
#include "hrl/envs.hpp"

namespace hrl::harness {

struct RunConfig {
  envs::EnvName env = envs::EnvName::PointMaze;
  envs::RewardMode reward_mode = envs::RewardMode::Dense;
  double noise_sigma = 0.0;
  brhpo::BrhpoConfig brhpo;
  long total_steps = 300000;
  long eval_interval = 5000;
  int eval_episodes = 10;
  long checkpoint_interval = 50000;
  std::uint64_t seed = 0;
  std::string output_dir = "runs";

  envs::EnvSpec env_spec() const;
};

// Defaults for one environment: the hyperparameter table plus per-task
// horizon, bonus weight and reward mode.
RunConfig default_run_config(envs::EnvName env);

// Flat dotted keys ("brhpo.lambda1", "sac.hidden", ...). Unspecified keys keep
// their defaults; unknown keys, wrong types and broken invariants throw
// ConfigError naming the key.
RunConfig config_from_json(const nlohmann::json& doc);
RunConfig parse_config(const std::filesystem::path& path);
// Round-trips through config_from_json.
nlohmann::json to_json(const RunConfig& cfg);
void validate(const RunConfig& cfg);

}  // namespace hrl::harness
