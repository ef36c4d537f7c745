#pragma once

#include <span>
#include <string>
#include <utility>
#include <vector>

#include "hrl/rng.hpp"

// Desk-scale continuous point-mass navigation tasks.
namespace hrl::envs {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  friend Vec2 operator+(Vec2 a, Vec2 b) { return {a.x + b.x, a.y + b.y}; }
  friend Vec2 operator-(Vec2 a, Vec2 b) { return {a.x - b.x, a.y - b.y}; }
  friend Vec2 operator*(double c, Vec2 a) { return {c * a.x, c * a.y}; }
  friend bool operator==(Vec2, Vec2) = default;
};

// `elapsed` counts steps since reset; the episode limit is checked against it.
struct State {
  Vec2 position;
  Vec2 velocity;
  int elapsed = 0;

  friend bool operator==(const State&, const State&) = default;
};

using Goal = Vec2;

struct Action {
  Vec2 accel;
};

enum class EnvName { PointMaze, PointBigMaze, PointSparse };
enum class RewardMode { Dense, Sparse };
enum class DistanceMetric { L1, L2, Linf };

// Axis-aligned rectangle [x_min, x_max] x [y_min, y_max].
struct Box {
  double x_min = 0.0;
  double y_min = 0.0;
  double x_max = 0.0;
  double y_max = 0.0;

  bool contains(Vec2 p) const {
    return p.x >= x_min && p.x <= x_max && p.y >= y_min && p.y <= y_max;
  }
  bool interior_contains(Vec2 p) const {
    return p.x > x_min && p.x < x_max && p.y > y_min && p.y < y_max;
  }
  Vec2 clip(Vec2 p) const;
};

struct GoalSampler {
  enum class Kind { UniformBox, Candidates, Gaussian };
  Kind kind = Kind::UniformBox;
  Box box;                       // UniformBox support; clip box for Gaussian
  std::vector<Vec2> candidates;  // Candidates
  Vec2 mean;                     // Gaussian
  double stddev = 0.0;           // Gaussian, per axis

  Goal sample(Rng& rng) const;
  std::string describe() const;
};

struct EnvSpec {
  EnvName name = EnvName::PointMaze;
  std::vector<Box> walls;
  Box bounds;  // workspace, also the goal-space bounding box
  Vec2 start;
  RewardMode reward_mode = RewardMode::Dense;
  int episode_len = 500;
  double success_radius = 5.0;
  GoalSampler goal_sampler;
  // Goals used by evaluation episodes; an empty list means "sample from
  // goal_sampler with the evaluation stream".
  std::vector<Goal> eval_goals;
  double noise_sigma = 0.0;
  double dt = 0.1;
  double v_max = 2.0;

  const Box& goal_box() const { return bounds; }
};

struct StepResult {
  State state;
  double reward = 0.0;
  bool done = false;
};

EnvSpec make_env(EnvName name, RewardMode mode, double noise_sigma = 0.0);

EnvName parse_env_name(const std::string& s);
RewardMode parse_reward_mode(const std::string& s);
DistanceMetric parse_metric(const std::string& s);
std::string to_string(EnvName n);
std::string to_string(RewardMode m);
std::string to_string(DistanceMetric m);

bool in_free_space(const EnvSpec& env, Vec2 p);

State start_state(const EnvSpec& env);
std::pair<State, Goal> reset(const EnvSpec& env, Rng& rng);
// Task goal for the `episode`-th evaluation episode.
Goal evaluation_goal(const EnvSpec& env, int episode, Rng& rng);

StepResult step(const EnvSpec& env, const State& s, const Action& a, const Goal& task_goal,
                Rng& rng);

// psi: state -> goal space (the position components).
inline Goal goal_map(const State& s) { return s.position; }

double distance(DistanceMetric m, std::span<const double> g1, std::span<const double> g2);
double distance(DistanceMetric m, Vec2 g1, Vec2 g2);

bool success(const EnvSpec& env, const State& final_state, const Goal& task_goal);

}  // namespace hrl::envs
