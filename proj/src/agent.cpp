#include "hrl/agent.hpp"

#include <cmath>

#include "hrl/errors.hpp"

namespace hrl::brhpo {

Variant parse_variant(const std::string& s) {
  if (s == "full") return Variant::Full;
  if (s == "vanilla") return Variant::Vanilla;
  if (s == "noreg") return Variant::NoReg;
  if (s == "nobonus") return Variant::NoBonus;
  throw ConfigError("brhpo.variant", "unknown variant '" + s + "'");
}

std::string to_string(Variant v) {
  switch (v) {
    case Variant::Full: return "full";
    case Variant::Vanilla: return "vanilla";
    case Variant::NoReg: return "noreg";
    case Variant::NoBonus: return "nobonus";
  }
  return "full";
}

double BrhpoConfig::lambda1_effective() const {
  return (variant == Variant::Vanilla || variant == Variant::NoReg) ? 0.0 : lambda1;
}

double BrhpoConfig::lambda2_effective() const {
  return (variant == Variant::Vanilla || variant == Variant::NoBonus) ? 0.0 : lambda2;
}

double BrhpoConfig::high_gamma() const {
  return sac.high_discount == HighDiscount::GammaPowK ? std::pow(sac.gamma, k) : sac.gamma;
}

BrhpoConfig default_config(envs::EnvName env) {
  BrhpoConfig cfg;
  if (env == envs::EnvName::PointSparse) {
    cfg.k = 10;
    cfg.lambda2 = 5.0;
  }
  return cfg;
}

ObsEncoder::ObsEncoder(const envs::EnvSpec& env) {
  const envs::Box& b = env.bounds;
  center_ = {0.5 * (b.x_min + b.x_max), 0.5 * (b.y_min + b.y_max)};
  half_ = {0.5 * (b.x_max - b.x_min), 0.5 * (b.y_max - b.y_min)};
  v_max_ = env.v_max;
}

void ObsEncoder::encode(const State& s, const Goal& g, double* out) const {
  out[0] = (s.position.x - center_.x) / half_.x;
  out[1] = (s.position.y - center_.y) / half_.y;
  out[2] = s.velocity.x / v_max_;
  out[3] = s.velocity.y / v_max_;
  out[4] = (g.x - s.position.x) / half_.x;
  out[5] = (g.y - s.position.y) / half_.y;
}

std::vector<double> ObsEncoder::encode(const State& s, const Goal& g) const {
  std::vector<double> v(kDim);
  encode(s, g, v.data());
  return v;
}

double subgoal_range(const BrhpoConfig& cfg, const envs::EnvSpec& env) {
  if (cfg.subgoal_range > 0.0) return cfg.subgoal_range;
  return cfg.k * env.dt * env.v_max;
}

Goal propose_subgoal(const sac::GaussianPolicy& high, const ObsEncoder& enc,
                     const envs::Box& goal_box, const State& s, const Goal& task_goal, Rng& rng,
                     bool deterministic) {
  const std::vector<double> obs = enc.encode(s, task_goal);
  const auto [offset, log_prob] = high.sample_action(obs, rng, deterministic);
  (void)log_prob;
  return absolute_subgoal(envs::goal_map(s), {offset[0], offset[1]}, goal_box);
}

HierAgent::HierAgent(const BrhpoConfig& cfg, const envs::EnvSpec& env, std::uint64_t seed)
    : cfg_(cfg), env_(env), enc_(env), range_(subgoal_range(cfg, env)) {
  require(cfg.k >= 1, "HierAgent: k must be positive");
  Rng init_high = Rng::substream(seed, "init_high");
  Rng init_low = Rng::substream(seed, "init_low");
  const auto& hidden = cfg.sac.hidden;
  high_policy = sac::GaussianPolicy(ObsEncoder::kDim, 2, hidden, {-range_, -range_},
                                    {range_, range_}, init_high);
  high_q = sac::QNetwork(ObsEncoder::kDim, 2, hidden, init_high);
  high_q_target = high_q;
  low_policy = sac::GaussianPolicy(ObsEncoder::kDim, 2, hidden, {-1.0, -1.0}, {1.0, 1.0},
                                   init_low);
  low_q = sac::QNetwork(ObsEncoder::kDim, 2, hidden, init_low);
  low_q_target = low_q;
}

Goal HierAgent::propose(const State& s, const Goal& task_goal, Rng& rng,
                        bool deterministic) const {
  return propose_subgoal(high_policy, enc_, env_.goal_box(), s, task_goal, rng, deterministic);
}

Action HierAgent::act(const State& s, const Goal& subgoal, Rng& rng, bool deterministic) const {
  const std::vector<double> obs = enc_.encode(s, subgoal);
  const auto [a, log_prob] = low_policy.sample_action(obs, rng, deterministic);
  (void)log_prob;
  return Action{{a[0], a[1]}};
}

Goal HierAgent::random_subgoal(const State& s, Rng& rng) const {
  const Vec2 offset{rng.uniform(-range_, range_), rng.uniform(-range_, range_)};
  return absolute_subgoal(envs::goal_map(s), offset, env_.goal_box());
}

Action HierAgent::random_action(Rng& rng) const {
  return Action{{rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)}};
}

Goal HierAgent::subgoal(const State& s, const Goal& task_goal, Rng& rng) {
  return propose(s, task_goal, rng, true);
}

Action HierAgent::action(const State& s, const Goal& subgoal, Rng& rng) {
  return act(s, subgoal, rng, true);
}

sac::UpdateParams HierAgent::params(bool high) const {
  sac::UpdateParams p;
  p.gamma = high ? cfg_.high_gamma() : cfg_.sac.gamma;
  p.alpha = cfg_.sac.alpha;
  p.lr = cfg_.sac.critic_lr;
  p.grad_clip = cfg_.sac.grad_clip;
  p.reward_scale = cfg_.sac.reward_scale;
  return p;
}

// Episodes end only on the time limit, so no stored transition is terminal
// for bootstrapping; the done flags mark episode boundaries only.
sac::TransitionBatch HierAgent::low_batch(const std::vector<LowTransition>& batch) const {
  const int B = static_cast<int>(batch.size());
  sac::TransitionBatch t;
  t.obs.resize(B, ObsEncoder::kDim);
  t.next_obs.resize(B, ObsEncoder::kDim);
  t.act.resize(B, 2);
  t.reward.resize(B);
  t.done.assign(B, 0.0);
  for (int b = 0; b < B; ++b) {
    const LowTransition& r = batch[b];
    enc_.encode(r.s, r.g, t.obs.row(b).data());
    enc_.encode(r.s_next, r.g, t.next_obs.row(b).data());
    t.act(b, 0) = r.a.accel.x;
    t.act(b, 1) = r.a.accel.y;
    t.reward[b] = r.r_hat;
  }
  return t;
}

sac::TransitionBatch HierAgent::high_batch(const std::vector<HighTransition>& batch) const {
  const int B = static_cast<int>(batch.size());
  sac::TransitionBatch t;
  t.obs.resize(B, ObsEncoder::kDim);
  t.next_obs.resize(B, ObsEncoder::kDim);
  t.act.resize(B, 2);
  t.reward.resize(B);
  t.done.assign(B, 0.0);
  for (int b = 0; b < B; ++b) {
    const HighTransition& r = batch[b];
    enc_.encode(r.s, r.task_goal, t.obs.row(b).data());
    enc_.encode(r.s_next, r.task_goal, t.next_obs.row(b).data());
    const Vec2 offset = r.g - envs::goal_map(r.s);
    t.act(b, 0) = offset.x;
    t.act(b, 1) = offset.y;
    t.reward[b] = r.r_h;
  }
  return t;
}

LossPair HierAgent::update_low(const std::vector<LowTransition>& batch, Rng& rng) {
  const sac::TransitionBatch t = low_batch(batch);
  sac::UpdateParams p = params(false);
  LossPair out;
  out.critic = sac::critic_update(low_q, low_q_target, low_policy, low_state_.critic_opt, t, p, rng);
  if (++low_state_.critic_updates % cfg_.sac.target_update_interval == 0) {
    sac::soft_update(low_q_target, low_q, cfg_.sac.tau);
  }
  p.lr = cfg_.sac.actor_lr;
  out.actor = sac::actor_update(low_policy, low_state_.actor_opt, low_q, t.obs, p, rng).loss;
  return out;
}

LossPair HierAgent::update_high(const std::vector<HighTransition>& batch, Rng& rng) {
  const sac::TransitionBatch t = high_batch(batch);
  sac::UpdateParams p = params(true);
  LossPair out;
  out.critic =
      sac::critic_update(high_q, high_q_target, high_policy, high_state_.critic_opt, t, p, rng);
  if (++high_state_.critic_updates % cfg_.sac.target_update_interval == 0) {
    sac::soft_update(high_q_target, high_q, cfg_.sac.tau);
  }
  p.lr = cfg_.sac.actor_lr;
  const double lambda1 = cfg_.lambda1_effective();
  if (lambda1 > 0.0) {
    std::vector<Vec2> start;
    std::vector<Vec2> reached;
    start.reserve(batch.size());
    reached.reserve(batch.size());
    for (const auto& r : batch) {
      start.push_back(envs::goal_map(r.s));
      reached.push_back(envs::goal_map(r.s_next));
    }
    HighActorRegularizer reg(std::move(start), std::move(reached), lambda1, cfg_.metric,
                             env_.goal_box(), cfg_.eps_denom, cfg_.reach_clip);
    out.actor = sac::actor_update(high_policy, high_state_.actor_opt, high_q, t.obs, p, rng, &reg)
                    .loss;
  } else {
    out.actor = sac::actor_update(high_policy, high_state_.actor_opt, high_q, t.obs, p, rng).loss;
  }
  return out;
}

std::map<std::string, const netopt::Mlp*> HierAgent::networks() const {
  return {
      {"high_actor", &high_policy.trunk()},   {"low_actor", &low_policy.trunk()},
      {"high_critic_1", &high_q.q1},                {"high_critic_2", &high_q.q2},
      {"low_critic_1", &low_q.q1},                  {"low_critic_2", &low_q.q2},
      {"high_critic_1_target", &high_q_target.q1},  {"high_critic_2_target", &high_q_target.q2},
      {"low_critic_1_target", &low_q_target.q1},    {"low_critic_2_target", &low_q_target.q2},
  };
}

void HierAgent::load_networks(const std::map<std::string, netopt::Mlp>& nets) {
  const auto assign = [&](const std::string& role, netopt::Mlp& dst, bool required) {
    const auto it = nets.find(role);
    if (it == nets.end()) {
      if (required) throw IoError("checkpoint is missing network '" + role + "'");
      return;
    }
    if (it->second.layer_sizes() != dst.layer_sizes()) {
      throw IoError("checkpoint network '" + role + "' has the wrong shape");
    }
    dst = it->second;
  };
  assign("high_actor", high_policy.trunk(), true);
  assign("low_actor", low_policy.trunk(), true);
  assign("high_critic_1", high_q.q1, false);
  assign("high_critic_2", high_q.q2, false);
  assign("low_critic_1", low_q.q1, false);
  assign("low_critic_2", low_q.q2, false);
  assign("high_critic_1_target", high_q_target.q1, false);
  assign("high_critic_2_target", high_q_target.q2, false);
  assign("low_critic_1_target", low_q_target.q1, false);
  assign("low_critic_2_target", low_q_target.q2, false);
}

}  // namespace hrl::brhpo
