#pragma once

#include <span>
#include <utility>
#include <vector>

#include "hrl/adam.hpp"
#include "hrl/errors.hpp"
#include "hrl/mlp.hpp"
#include "hrl/rng.hpp"

// Soft actor-critic pieces shared by both levels of the hierarchy.
namespace hrl::sac {

// Squashed Gaussian: the trunk emits [mean | log_std]; actions are
// center + half_range * tanh(mean + std * xi).
class GaussianPolicy {
 public:
  static constexpr double kLogStdMin = -20.0;
  static constexpr double kLogStdMax = 2.0;

  GaussianPolicy() = default;
  GaussianPolicy(int obs_dim, int act_dim, const std::vector<int>& hidden,
                 std::vector<double> action_low, std::vector<double> action_high, Rng& init);

  // Everything a reparameterized batch sample needs for the reverse pass.
  struct Sample {
    netopt::ForwardCache cache;
    Matrix raw_log_std;  // before clamping
    Matrix std;
    Matrix noise;
    Matrix tanh_u;
    Matrix actions;
    std::vector<double> log_prob;
  };

  int obs_dim() const { return obs_dim_; }
  int act_dim() const { return act_dim_; }
  std::span<const double> action_low() const { return low_; }
  std::span<const double> action_high() const { return high_; }

  netopt::Mlp& trunk() { return trunk_; }
  const netopt::Mlp& trunk() const { return trunk_; }

  // Single observation. In deterministic mode the action is the squashed
  // mean and the returned log-probability is 0 (not computed).
  std::pair<std::vector<double>, double> sample_action(std::span<const double> obs, Rng& rng,
                                                       bool deterministic) const;

  Sample rsample(const Matrix& obs, Rng& rng) const;
  // Same as rsample with caller-provided standard-normal noise.
  Sample rsample_with_noise(const Matrix& obs, Matrix noise) const;
  Matrix deterministic_actions(const Matrix& obs) const;
  // Clamped log standard deviations, for inspection.
  Matrix log_std(const Matrix& obs) const;

  // Accumulates trunk gradients of sum(d_action .* actions) +
  // sum(d_log_prob .* log_prob) into `param_grads`.
  void backward(const Sample& s, const Matrix& d_action, std::span<const double> d_log_prob,
                std::span<double> param_grads) const;

 private:
  int obs_dim_ = 0;
  int act_dim_ = 0;
  std::vector<double> low_;
  std::vector<double> high_;
  netopt::Mlp trunk_;
};

// Twin critics Q(obs ++ action) -> scalar.
struct QNetwork {
  netopt::Mlp q1;
  netopt::Mlp q2;
  int obs_dim = 0;
  int act_dim = 0;

  QNetwork() = default;
  QNetwork(int obs_dim, int act_dim, const std::vector<int>& hidden, Rng& init);

  Matrix joint_input(const Matrix& obs, const Matrix& act) const;
  // Elementwise min of the two critics.
  std::vector<double> min_q(const Matrix& obs, const Matrix& act) const;
};

struct TransitionBatch {
  Matrix obs;
  Matrix act;
  std::vector<double> reward;
  Matrix next_obs;
  std::vector<double> done;

  int size() const { return obs.rows; }
};

struct CriticOptimizers {
  netopt::AdamState q1;
  netopt::AdamState q2;
};

struct UpdateParams {
  double gamma = 0.99;
  double alpha = 0.2;
  double lr = 1e-3;
  double grad_clip = 10.0;
  double reward_scale = 1.0;
};

// y = scale*r + gamma * (1 - done) * (min target Q(s', a') - alpha * log pi(a'|s')),
// with a' freshly sampled from `policy`.
std::vector<double> td_targets(const QNetwork& targets, const GaussianPolicy& policy,
                               const TransitionBatch& batch, const UpdateParams& p, Rng& rng);

// One Adam step per critic on 0.5 * mean (Q - y)^2. Returns the mean of the
// two critics' losses.
double critic_update(QNetwork& q, const QNetwork& targets, const GaussianPolicy& policy,
                     CriticOptimizers& opt, const TransitionBatch& batch, const UpdateParams& p,
                     Rng& rng);
// Same, with precomputed targets.
double critic_update(QNetwork& q, CriticOptimizers& opt, const TransitionBatch& batch,
                     std::span<const double> targets, const UpdateParams& p);

// An additive differentiable term in the actor loss that depends on the
// freshly sampled actions. evaluate() returns its value and writes
// d(value)/d(actions) into `d_actions` (same shape as `actions`).
class ActorPenalty {
 public:
  virtual ~ActorPenalty() = default;
  virtual double evaluate(const Matrix& actions, Matrix& d_actions) const = 0;
};

struct ActorUpdateResult {
  double loss = 0.0;     // total, including the penalty
  double penalty = 0.0;  // penalty part only
};

// One Adam step on mean(alpha * log pi(a|s) - min Q(s, a)) + penalty.
ActorUpdateResult actor_update(GaussianPolicy& policy, netopt::AdamState& opt, const QNetwork& q,
                               const Matrix& obs, const UpdateParams& p, Rng& rng,
                               const ActorPenalty* extra = nullptr);

// target <- (1 - tau) * target + tau * source
void soft_update(netopt::Mlp& target, const netopt::Mlp& source, double tau);
void soft_update(QNetwork& target, const QNetwork& source, double tau);

// Fixed-capacity FIFO ring with uniform sampling (with replacement).
template <typename Record>
class ReplayBuffer {
 public:
  explicit ReplayBuffer(std::size_t capacity) : capacity_(capacity) {
    require(capacity > 0, "ReplayBuffer: capacity must be positive");
  }

  void push(Record r) {
    if (data_.size() < capacity_) {
      data_.push_back(std::move(r));
    } else {
      data_[head_] = std::move(r);
    }
    head_ = (head_ + 1) % capacity_;
  }

  std::vector<Record> sample(std::size_t n, Rng& rng) const {
    require(!data_.empty(), "ReplayBuffer::sample: buffer is empty");
    std::vector<Record> out;
    out.reserve(n);
    for (std::size_t i = 0; i < n; ++i) out.push_back(data_[rng.index(data_.size())]);
    return out;
  }

  // Records from oldest to newest.
  std::vector<Record> snapshot() const {
    if (data_.size() < capacity_) return data_;
    std::vector<Record> out;
    out.reserve(capacity_);
    for (std::size_t i = 0; i < capacity_; ++i) out.push_back(data_[(head_ + i) % capacity_]);
    return out;
  }

  std::size_t size() const { return data_.size(); }
  std::size_t capacity() const { return capacity_; }
  bool empty() const { return data_.empty(); }

 private:
  std::size_t capacity_;
  std::size_t head_ = 0;
  std::vector<Record> data_;
};

}  // namespace hrl::sac
