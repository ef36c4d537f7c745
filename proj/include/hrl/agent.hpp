#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "hrl/envs.hpp"
#include "hrl/evaluate.hpp"
#include "hrl/reachability.hpp"
#include "hrl/sac.hpp"

namespace hrl::brhpo {

enum class Variant { Full, Vanilla, NoReg, NoBonus };
Variant parse_variant(const std::string& s);
std::string to_string(Variant v);

// Discount used by the high-level critic across one subtask transition.
enum class HighDiscount { Gamma, GammaPowK };

struct SacSettings {
  double gamma = 0.99;
  double tau = 0.005;
  double critic_lr = 1e-3;
  double actor_lr = 1e-4;
  double alpha = 0.2;
  int batch_size = 128;
  int updates_per_step = 1;
  int target_update_interval = 2;
  long high_buffer = 100000;
  long low_buffer = 1000000;
  long start_steps = 5000;
  double reward_scale = 1.0;
  std::vector<int> hidden{256, 256};
  double grad_clip = 10.0;
  HighDiscount high_discount = HighDiscount::Gamma;
};

struct BrhpoConfig {
  int k = 20;
  double lambda1 = 2.0;
  double lambda2 = 10.0;
  envs::DistanceMetric metric = envs::DistanceMetric::L2;
  Variant variant = Variant::Full;
  double reach_clip = kDefaultReachClip;
  double eps_denom = kDenomEps;
  // Half-width of the subgoal offset box; <= 0 selects k * dt * v_max.
  double subgoal_range = 0.0;
  SacSettings sac;

  // Responsive factors after the variant has been applied.
  double lambda1_effective() const;
  double lambda2_effective() const;
  double high_gamma() const;
};

// Defaults for one environment (k and lambda2 differ between the maze and
// sparse tasks).
BrhpoConfig default_config(envs::EnvName env);

struct HighTransition {
  State s;
  Goal task_goal;
  Goal g;
  double r_h = 0.0;
  State s_next;
  double reach = 0.0;
  bool done = false;  // the episode ended with this subtask
};

struct LowTransition {
  State s;
  Goal g;
  Action a;
  double r_hat = 0.0;
  State s_next;
  bool done = false;
};

// Network input: position and the goal's offset from it, both scaled by the
// workspace half-extent, and velocity scaled by v_max. Layout
// [pos.x, pos.y, vel.x, vel.y, goal.x - pos.x, goal.y - pos.y].
class ObsEncoder {
 public:
  static constexpr int kDim = 6;
  ObsEncoder() = default;
  explicit ObsEncoder(const envs::EnvSpec& env);
  void encode(const State& s, const Goal& g, double* out) const;
  std::vector<double> encode(const State& s, const Goal& g) const;

 private:
  Vec2 center_;
  Vec2 half_{1.0, 1.0};
  double v_max_ = 1.0;
};

double subgoal_range(const BrhpoConfig& cfg, const envs::EnvSpec& env);

// Subgoal from the high-level policy: clip(psi(s) + offset, goal box).
Goal propose_subgoal(const sac::GaussianPolicy& high, const ObsEncoder& enc,
                     const envs::Box& goal_box, const State& s, const Goal& task_goal, Rng& rng,
                     bool deterministic);

struct LossPair {
  double actor = 0.0;
  double critic = 0.0;
};

class HierAgent : public harness::HierarchicalController {
 public:
  HierAgent(const BrhpoConfig& cfg, const envs::EnvSpec& env, std::uint64_t seed);

  const BrhpoConfig& config() const { return cfg_; }
  const envs::EnvSpec& env() const { return env_; }
  const ObsEncoder& encoder() const { return enc_; }
  double offset_range() const { return range_; }

  Goal propose(const State& s, const Goal& task_goal, Rng& rng, bool deterministic) const;
  Action act(const State& s, const Goal& subgoal, Rng& rng, bool deterministic) const;
  Goal random_subgoal(const State& s, Rng& rng) const;
  Action random_action(Rng& rng) const;

  // Deterministic (mean) controls, used by evaluation.
  Goal subgoal(const State& s, const Goal& task_goal, Rng& rng) override;
  Action action(const State& s, const Goal& subgoal, Rng& rng) override;

  LossPair update_low(const std::vector<LowTransition>& batch, Rng& rng);
  LossPair update_high(const std::vector<HighTransition>& batch, Rng& rng);

  sac::TransitionBatch low_batch(const std::vector<LowTransition>& batch) const;
  sac::TransitionBatch high_batch(const std::vector<HighTransition>& batch) const;

  std::map<std::string, const netopt::Mlp*> networks() const;
  // Loads the networks written by networks() (plus optimizer-free targets).
  void load_networks(const std::map<std::string, netopt::Mlp>& nets);

  sac::GaussianPolicy high_policy;
  sac::GaussianPolicy low_policy;
  sac::QNetwork high_q;
  sac::QNetwork high_q_target;
  sac::QNetwork low_q;
  sac::QNetwork low_q_target;

 private:
  struct LevelState {
    sac::CriticOptimizers critic_opt;
    netopt::AdamState actor_opt;
    long critic_updates = 0;
  };

  sac::UpdateParams params(bool high) const;

  BrhpoConfig cfg_;
  envs::EnvSpec env_;
  ObsEncoder enc_;
  double range_ = 1.0;
  LevelState high_state_;
  LevelState low_state_;
};

}  // namespace hrl::brhpo
