#pragma once

#include <vector>

#include "hrl/envs.hpp"
#include "hrl/sac.hpp"

// Subtask bookkeeping and the bidirectional reachability statistic.
namespace hrl::brhpo {

using envs::Action;
using envs::DistanceMetric;
using envs::Goal;
using envs::State;
using envs::Vec2;

inline constexpr double kDenomEps = 1e-6;
inline constexpr double kDefaultReachClip = 2.0;

struct TraceStep {
  State state;
  Action action;
  double env_reward = 0.0;
  State next_state;
  // D(psi(state), subgoal), recorded before the step is taken.
  double pre_distance = 0.0;
  // -D(psi(next_state), subgoal)
  double low_reward = 0.0;
};

// The low-level steps taken under one subgoal.
class SubtaskTrace {
 public:
  SubtaskTrace(const State& start, const Goal& subgoal, int horizon, DistanceMetric metric);

  // Appends one step; `s` must equal the previous step's next state (or the
  // start state for the first step) and the trace must not be full.
  void append(const State& s, const Action& a, double env_reward, const State& next);
  void mark_truncated() { truncated_ = true; }

  const State& start_state() const { return start_; }
  const Goal& subgoal() const { return subgoal_; }
  const std::vector<TraceStep>& steps() const { return steps_; }
  int horizon() const { return horizon_; }
  DistanceMetric metric() const { return metric_; }
  bool truncated() const { return truncated_; }
  bool full() const { return static_cast<int>(steps_.size()) == horizon_; }
  bool empty() const { return steps_.empty(); }
  const State& final_state() const;

 private:
  State start_;
  Goal subgoal_;
  int horizon_;
  DistanceMetric metric_;
  bool truncated_ = false;
  std::vector<TraceStep> steps_;
};

double low_reward(const State& next, const Goal& subgoal, DistanceMetric m);

// Sum of environment rewards over the trace.
double high_reward(const SubtaskTrace& trace);

// D(psi(final), g) / D(psi(start), g); 0 when the initial distance is below
// `eps`. Reads only the two endpoints of the trace.
double reachability(const SubtaskTrace& trace, DistanceMetric m, double eps = kDenomEps);
double reachability(const SubtaskTrace& trace);
// Same ratio taken from the stored per-step quantities: last low-level reward
// over the first step's stored pre-step distance.
double reachability_from_rewards(const SubtaskTrace& trace, double eps = kDenomEps);

// r_hat_j = r_l_j - lambda2 * min(reach, reach_clip) for every step.
std::vector<double> surrogate_low_rewards(const SubtaskTrace& trace, double reach, double lambda2,
                                          DistanceMetric m,
                                          double reach_clip = kDefaultReachClip);

// psi(s) + offset, clipped to the goal box.
Goal absolute_subgoal(const Goal& projection, Vec2 offset, const envs::Box& goal_box);

// Gradient (sub-gradient at kinks) of D(p, g) with respect to g.
Vec2 distance_grad_wrt_goal(DistanceMetric m, Vec2 p, Vec2 g);

struct ReachRatio {
  double value = 0.0;  // min(D(reached, g) / max(D(start, g), eps), clip)
  Vec2 d_subgoal;      // its gradient with respect to g
};
ReachRatio reach_ratio(DistanceMetric m, Vec2 start, Vec2 reached, Vec2 subgoal, double eps,
                       double clip);

// High-level actor penalty: lambda1 * mean_b ratio(psi(s_b), psi(s'_b), g~_b),
// where g~_b = clip(psi(s_b) + offset_b) is the freshly sampled subgoal.
// Reached states are fixed data; gradients flow through the offsets only.
class HighActorRegularizer : public sac::ActorPenalty {
 public:
  HighActorRegularizer(std::vector<Vec2> start_positions, std::vector<Vec2> reached_positions,
                       double lambda1, DistanceMetric m, envs::Box goal_box,
                       double eps = kDenomEps, double clip = kDefaultReachClip);

  double evaluate(const Matrix& offsets, Matrix& d_offsets) const override;

 private:
  std::vector<Vec2> start_;
  std::vector<Vec2> reached_;
  double lambda1_;
  DistanceMetric metric_;
  envs::Box box_;
  double eps_;
  double clip_;
};

}  // namespace hrl::brhpo
