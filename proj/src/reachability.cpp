#include "hrl/reachability.hpp"

#include <algorithm>
#include <cmath>

#include "hrl/errors.hpp"

namespace hrl::brhpo {

SubtaskTrace::SubtaskTrace(const State& start, const Goal& subgoal, int horizon,
                           DistanceMetric metric)
    : start_(start), subgoal_(subgoal), horizon_(horizon), metric_(metric) {
  require(horizon >= 1, "SubtaskTrace: horizon must be positive");
  steps_.reserve(static_cast<std::size_t>(horizon));
}

void SubtaskTrace::append(const State& s, const Action& a, double env_reward, const State& next) {
  require(!full(), "SubtaskTrace::append: trace already holds k steps");
  const State& expected = steps_.empty() ? start_ : steps_.back().next_state;
  require(s == expected, "SubtaskTrace::append: steps must chain");
  TraceStep st;
  st.state = s;
  st.action = a;
  st.env_reward = env_reward;
  st.next_state = next;
  st.pre_distance = envs::distance(metric_, envs::goal_map(s), subgoal_);
  st.low_reward = low_reward(next, subgoal_, metric_);
  steps_.push_back(st);
}

const State& SubtaskTrace::final_state() const {
  require(!steps_.empty(), "SubtaskTrace: empty trace has no final state");
  return steps_.back().next_state;
}

double low_reward(const State& next, const Goal& subgoal, DistanceMetric m) {
  return -envs::distance(m, envs::goal_map(next), subgoal);
}

double high_reward(const SubtaskTrace& trace) {
  require(!trace.empty(), "high_reward: empty trace");
  double sum = 0.0;
  for (const auto& st : trace.steps()) sum += st.env_reward;
  return sum;
}

double reachability(const SubtaskTrace& trace, DistanceMetric m, double eps) {
  require(!trace.empty(), "reachability: empty trace");
  const double d0 = envs::distance(m, envs::goal_map(trace.start_state()), trace.subgoal());
  if (d0 < eps) return 0.0;
  const double d1 = envs::distance(m, envs::goal_map(trace.final_state()), trace.subgoal());
  return d1 / d0;
}

double reachability(const SubtaskTrace& trace) {
  return reachability(trace, trace.metric());
}

double reachability_from_rewards(const SubtaskTrace& trace, double eps) {
  require(!trace.empty(), "reachability_from_rewards: empty trace");
  const double d0 = trace.steps().front().pre_distance;
  if (d0 < eps) return 0.0;
  return -trace.steps().back().low_reward / d0;
}

std::vector<double> surrogate_low_rewards(const SubtaskTrace& trace, double reach, double lambda2,
                                          DistanceMetric m, double reach_clip) {
  const double bonus = lambda2 * std::min(reach, reach_clip);
  std::vector<double> out;
  out.reserve(trace.steps().size());
  for (const auto& st : trace.steps()) {
    out.push_back(low_reward(st.next_state, trace.subgoal(), m) - bonus);
  }
  return out;
}

Goal absolute_subgoal(const Goal& projection, Vec2 offset, const envs::Box& goal_box) {
  return goal_box.clip(projection + offset);
}

Vec2 distance_grad_wrt_goal(DistanceMetric m, Vec2 p, Vec2 g) {
  const Vec2 d = g - p;
  const auto sign = [](double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); };
  switch (m) {
    case DistanceMetric::L1:
      return {sign(d.x), sign(d.y)};
    case DistanceMetric::L2: {
      const double n = envs::distance(DistanceMetric::L2, p, g);
      if (n == 0.0) return {};
      return {d.x / n, d.y / n};
    }
    case DistanceMetric::Linf:
      if (std::abs(d.x) >= std::abs(d.y)) return {sign(d.x), 0.0};
      return {0.0, sign(d.y)};
  }
  return {};
}

ReachRatio reach_ratio(DistanceMetric m, Vec2 start, Vec2 reached, Vec2 subgoal, double eps,
                       double clip) {
  const double num = envs::distance(m, reached, subgoal);
  const double den_raw = envs::distance(m, start, subgoal);
  const bool floor = den_raw < eps;
  const double den = floor ? eps : den_raw;
  ReachRatio r;
  const double ratio = num / den;
  if (ratio >= clip) {
    r.value = clip;
    return r;
  }
  r.value = ratio;
  const Vec2 gn = distance_grad_wrt_goal(m, reached, subgoal);
  if (floor) {
    r.d_subgoal = (1.0 / den) * gn;
  } else {
    const Vec2 gd = distance_grad_wrt_goal(m, start, subgoal);
    r.d_subgoal = {(gn.x * den - num * gd.x) / (den * den), (gn.y * den - num * gd.y) / (den * den)};
  }
  return r;
}

HighActorRegularizer::HighActorRegularizer(std::vector<Vec2> start_positions,
                                           std::vector<Vec2> reached_positions, double lambda1,
                                           DistanceMetric m, envs::Box goal_box, double eps,
                                           double clip)
    : start_(std::move(start_positions)), reached_(std::move(reached_positions)),
      lambda1_(lambda1), metric_(m), box_(goal_box), eps_(eps), clip_(clip) {
  require(start_.size() == reached_.size(), "HighActorRegularizer: ragged batch");
}

double HighActorRegularizer::evaluate(const Matrix& offsets, Matrix& d_offsets) const {
  const int B = offsets.rows;
  require(offsets.cols == 2 && static_cast<std::size_t>(B) == start_.size(),
          "HighActorRegularizer: offsets must be [batch x 2]");
  if (d_offsets.rows != B || d_offsets.cols != 2) d_offsets.resize(B, 2);
  double total = 0.0;
  const double w = lambda1_ / B;
  for (int b = 0; b < B; ++b) {
    const Vec2 raw = start_[b] + Vec2{offsets(b, 0), offsets(b, 1)};
    const Vec2 g = box_.clip(raw);
    const ReachRatio r = reach_ratio(metric_, start_[b], reached_[b], g, eps_, clip_);
    total += r.value;
    // Clipping to the goal box blocks the gradient on the clipped axis.
    const bool free_x = raw.x > box_.x_min && raw.x < box_.x_max;
    const bool free_y = raw.y > box_.y_min && raw.y < box_.y_max;
    d_offsets(b, 0) = free_x ? w * r.d_subgoal.x : 0.0;
    d_offsets(b, 1) = free_y ? w * r.d_subgoal.y : 0.0;
  }
  return lambda1_ * total / B;
}

}  // namespace hrl::brhpo
