#include "hrl/envs.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "hrl/errors.hpp"

namespace hrl::envs {

Vec2 Box::clip(Vec2 p) const {
  return {std::clamp(p.x, x_min, x_max), std::clamp(p.y, y_min, y_max)};
}

Goal GoalSampler::sample(Rng& rng) const {
  switch (kind) {
    case Kind::UniformBox:
      return {rng.uniform(box.x_min, box.x_max), rng.uniform(box.y_min, box.y_max)};
    case Kind::Candidates:
      return candidates[rng.index(candidates.size())];
    case Kind::Gaussian: {
      Vec2 g{rng.normal(mean.x, stddev), rng.normal(mean.y, stddev)};
      return box.clip(g);
    }
  }
  return {};
}

std::string GoalSampler::describe() const {
  std::ostringstream os;
  switch (kind) {
    case Kind::UniformBox:
      os << "uniform over [" << box.x_min << "," << box.x_max << "]x[" << box.y_min << ","
         << box.y_max << "]";
      break;
    case Kind::Candidates:
      os << "one of";
      for (const auto& c : candidates) os << " (" << c.x << "," << c.y << ")";
      break;
    case Kind::Gaussian:
      os << "normal(mean=(" << mean.x << "," << mean.y << "), std=" << stddev << ")";
      break;
  }
  return os.str();
}

EnvSpec make_env(EnvName name, RewardMode mode, double noise_sigma) {
  if (!(noise_sigma >= 0.0) || !std::isfinite(noise_sigma)) {
    throw ConfigError("env.noise_sigma", "must be a finite non-negative number");
  }
  EnvSpec env;
  env.name = name;
  env.reward_mode = mode;
  env.noise_sigma = noise_sigma;
  env.start = {0.0, 0.0};

  switch (name) {
    case EnvName::PointMaze:
      // U-maze: one wall block splits the square into a corridor that runs
      // right, up, then back left to the task goal. Blocks that meet the
      // boundary reach one unit past it; a face lying exactly on the boundary
      // would leave a zero-width slot the agent can slide through.
      env.bounds = {-4.0, -4.0, 20.0, 20.0};
      env.walls = {{-5.0, 4.0, 12.0, 12.0}};
      env.episode_len = 500;
      env.success_radius = 5.0;
      env.goal_sampler.kind = GoalSampler::Kind::UniformBox;
      env.goal_sampler.box = env.bounds;
      env.eval_goals = {{0.0, 16.0}};
      break;
    case EnvName::PointBigMaze:
      // Twice the extent, S-shaped corridor with two candidate task goals.
      env.bounds = {-4.0, -4.0, 44.0, 44.0};
      env.walls = {{-5.0, 4.0, 28.0, 12.0}, {12.0, 20.0, 45.0, 28.0}};
      env.episode_len = 1000;
      env.success_radius = 5.0;
      env.goal_sampler.kind = GoalSampler::Kind::Candidates;
      env.goal_sampler.candidates = {{32.0, 8.0}, {0.0, 40.0}};
      env.eval_goals = env.goal_sampler.candidates;
      break;
    case EnvName::PointSparse:
      // Start in a corner so the goal cloud around the origin is not already
      // inside the success radius.
      env.start = {-0.75, -0.75};
      env.bounds = {-1.0, -1.0, 1.0, 1.0};
      env.episode_len = 100;
      env.success_radius = 0.25;
      env.goal_sampler.kind = GoalSampler::Kind::Gaussian;
      env.goal_sampler.mean = {0.0, 0.0};
      env.goal_sampler.stddev = 0.1;
      env.goal_sampler.box = env.bounds;
      break;
  }
  return env;
}

EnvName parse_env_name(const std::string& s) {
  if (s == "PointMaze") return EnvName::PointMaze;
  if (s == "PointBigMaze") return EnvName::PointBigMaze;
  if (s == "PointSparse") return EnvName::PointSparse;
  throw ConfigError("env.name", "unknown environment '" + s + "'");
}

RewardMode parse_reward_mode(const std::string& s) {
  if (s == "dense") return RewardMode::Dense;
  if (s == "sparse") return RewardMode::Sparse;
  throw ConfigError("env.reward_mode", "expected 'dense' or 'sparse', got '" + s + "'");
}

DistanceMetric parse_metric(const std::string& s) {
  if (s == "L1" || s == "l1") return DistanceMetric::L1;
  if (s == "L2" || s == "l2") return DistanceMetric::L2;
  if (s == "Linf" || s == "linf") return DistanceMetric::Linf;
  throw ConfigError("brhpo.metric", "expected L1, L2 or Linf, got '" + s + "'");
}

std::string to_string(EnvName n) {
  switch (n) {
    case EnvName::PointMaze: return "PointMaze";
    case EnvName::PointBigMaze: return "PointBigMaze";
    case EnvName::PointSparse: return "PointSparse";
  }
  return "?";
}

std::string to_string(RewardMode m) { return m == RewardMode::Dense ? "dense" : "sparse"; }

std::string to_string(DistanceMetric m) {
  switch (m) {
    case DistanceMetric::L1: return "L1";
    case DistanceMetric::L2: return "L2";
    case DistanceMetric::Linf: return "Linf";
  }
  return "?";
}

bool in_free_space(const EnvSpec& env, Vec2 p) {
  if (!env.bounds.contains(p)) return false;
  return std::none_of(env.walls.begin(), env.walls.end(),
                      [&](const Box& w) { return w.interior_contains(p); });
}

State start_state(const EnvSpec& env) {
  State s;
  s.position = env.start;
  return s;
}

std::pair<State, Goal> reset(const EnvSpec& env, Rng& rng) {
  return {start_state(env), env.goal_sampler.sample(rng)};
}

Goal evaluation_goal(const EnvSpec& env, int episode, Rng& rng) {
  if (env.eval_goals.empty()) return env.goal_sampler.sample(rng);
  return env.eval_goals[static_cast<std::size_t>(episode) % env.eval_goals.size()];
}

namespace {

struct Blocked {
  bool x = false;
  bool y = false;
};

// Moves `p` by `delta`, x axis first and then y. A wall or the workspace
// boundary stops motion along that axis at the contact face.
Vec2 sweep(const EnvSpec& env, Vec2 p, Vec2 delta, Blocked& blocked) {
  double tx = p.x + delta.x;
  if (tx < env.bounds.x_min) tx = env.bounds.x_min, blocked.x = true;
  if (tx > env.bounds.x_max) tx = env.bounds.x_max, blocked.x = true;
  for (const Box& w : env.walls) {
    if (!(p.y > w.y_min && p.y < w.y_max)) continue;
    if (p.x <= w.x_min && tx > w.x_min) tx = w.x_min, blocked.x = true;
    if (p.x >= w.x_max && tx < w.x_max) tx = w.x_max, blocked.x = true;
  }
  p.x = tx;

  double ty = p.y + delta.y;
  if (ty < env.bounds.y_min) ty = env.bounds.y_min, blocked.y = true;
  if (ty > env.bounds.y_max) ty = env.bounds.y_max, blocked.y = true;
  for (const Box& w : env.walls) {
    if (!(p.x > w.x_min && p.x < w.x_max)) continue;
    if (p.y <= w.y_min && ty > w.y_min) ty = w.y_min, blocked.y = true;
    if (p.y >= w.y_max && ty < w.y_max) ty = w.y_max, blocked.y = true;
  }
  p.y = ty;
  return p;
}

}  // namespace

StepResult step(const EnvSpec& env, const State& s, const Action& a, const Goal& task_goal,
                Rng& rng) {
  const auto in_range = [](double v) { return std::isfinite(v) && v >= -1.0 && v <= 1.0; };
  if (!in_range(a.accel.x) || !in_range(a.accel.y)) {
    throw ContractViolation("step: action components must lie in [-1, 1]");
  }

  StepResult out;
  State& n = out.state;
  n.velocity.x = std::clamp(s.velocity.x + a.accel.x * env.dt, -env.v_max, env.v_max);
  n.velocity.y = std::clamp(s.velocity.y + a.accel.y * env.dt, -env.v_max, env.v_max);

  Blocked blocked;
  n.position = sweep(env, s.position, env.dt * n.velocity, blocked);
  if (blocked.x) n.velocity.x = 0.0;
  if (blocked.y) n.velocity.y = 0.0;

  if (env.noise_sigma > 0.0) {
    const Vec2 jitter{rng.normal(0.0, env.noise_sigma), rng.normal(0.0, env.noise_sigma)};
    Blocked ignored;
    n.position = sweep(env, n.position, jitter, ignored);
  }

  n.elapsed = s.elapsed + 1;
  const double d = distance(DistanceMetric::L2, goal_map(n), task_goal);
  if (env.reward_mode == RewardMode::Dense) {
    out.reward = -d;
  } else {
    out.reward = d <= env.success_radius ? 0.0 : -1.0;
  }
  out.done = n.elapsed >= env.episode_len;
  return out;
}

double distance(DistanceMetric m, std::span<const double> g1, std::span<const double> g2) {
  require(g1.size() == g2.size(), "distance: dimension mismatch");
  double acc = 0.0;
  for (std::size_t i = 0; i < g1.size(); ++i) {
    const double d = std::abs(g1[i] - g2[i]);
    switch (m) {
      case DistanceMetric::L1: acc += d; break;
      case DistanceMetric::L2: acc += d * d; break;
      case DistanceMetric::Linf: acc = std::max(acc, d); break;
    }
  }
  return m == DistanceMetric::L2 ? std::sqrt(acc) : acc;
}

double distance(DistanceMetric m, Vec2 g1, Vec2 g2) {
  const double a[2] = {g1.x, g1.y};
  const double b[2] = {g2.x, g2.y};
  return distance(m, a, b);
}

bool success(const EnvSpec& env, const State& final_state, const Goal& task_goal) {
  return distance(DistanceMetric::L2, goal_map(final_state), task_goal) <= env.success_radius;
}

}  // namespace hrl::envs
