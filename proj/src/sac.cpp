#include "hrl/sac.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

namespace hrl::sac {

namespace {

// log(1 - tanh(u)^2), stable for large |u|.
double log_one_minus_tanh_sq(double u) {
  const double a = std::abs(u);
  return 2.0 * (std::numbers::ln2 - a - std::log1p(std::exp(-2.0 * a)));
}

const double kHalfLog2Pi = 0.5 * std::log(2.0 * std::numbers::pi);

// tanh saturates to exactly +-1 in floating point; keep actions strictly
// inside the bounds.
double squash(double t, double low, double high) {
  const double a = 0.5 * (high + low) + 0.5 * (high - low) * t;
  return std::clamp(a, std::nextafter(low, high), std::nextafter(high, low));
}

void check_rows_finite(std::span<const double> rows, const char* what) {
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (!std::isfinite(rows[i])) throw NumericalError(what, static_cast<long>(i));
  }
}

}  // namespace

GaussianPolicy::GaussianPolicy(int obs_dim, int act_dim, const std::vector<int>& hidden,
                               std::vector<double> action_low, std::vector<double> action_high,
                               Rng& init)
    : obs_dim_(obs_dim), act_dim_(act_dim), low_(std::move(action_low)),
      high_(std::move(action_high)) {
  require(static_cast<int>(low_.size()) == act_dim && static_cast<int>(high_.size()) == act_dim,
          "GaussianPolicy: action bounds must match act_dim");
  for (int i = 0; i < act_dim; ++i) {
    require(low_[i] < high_[i], "GaussianPolicy: action_low must be below action_high");
  }
  std::vector<int> sizes{obs_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(2 * act_dim);
  trunk_ = netopt::Mlp::random(sizes, init);
}

std::pair<std::vector<double>, double> GaussianPolicy::sample_action(std::span<const double> obs,
                                                                     Rng& rng,
                                                                     bool deterministic) const {
  require(static_cast<int>(obs.size()) == obs_dim_, "sample_action: observation width mismatch");
  Matrix x(1, obs_dim_);
  std::copy(obs.begin(), obs.end(), x.data.begin());
  if (deterministic) return {deterministic_actions(x).data, 0.0};
  Matrix noise(1, act_dim_);
  for (double& n : noise.data) n = rng.normal();
  auto s = rsample_with_noise(x, std::move(noise));
  return {s.actions.data, s.log_prob[0]};
}

GaussianPolicy::Sample GaussianPolicy::rsample(const Matrix& obs, Rng& rng) const {
  Matrix noise(obs.rows, act_dim_);
  for (double& n : noise.data) n = rng.normal();
  return rsample_with_noise(obs, std::move(noise));
}

GaussianPolicy::Sample GaussianPolicy::rsample_with_noise(const Matrix& obs, Matrix noise) const {
  require(obs.cols == obs_dim_, "GaussianPolicy: observation width mismatch");
  require(noise.rows == obs.rows && noise.cols == act_dim_, "GaussianPolicy: noise shape mismatch");
  Sample s;
  const Matrix out = trunk_.forward(obs, s.cache);
  const int B = obs.rows;
  const int A = act_dim_;
  s.raw_log_std.resize(B, A);
  s.std.resize(B, A);
  s.tanh_u.resize(B, A);
  s.actions.resize(B, A);
  s.log_prob.assign(B, 0.0);
  s.noise = std::move(noise);
  for (int b = 0; b < B; ++b) {
    double lp = 0.0;
    for (int i = 0; i < A; ++i) {
      const double mean = out(b, i);
      const double raw = out(b, A + i);
      const double ls = std::clamp(raw, kLogStdMin, kLogStdMax);
      const double sd = std::exp(ls);
      const double xi = s.noise(b, i);
      const double u = mean + sd * xi;
      const double t = std::tanh(u);
      const double half = 0.5 * (high_[i] - low_[i]);
      s.raw_log_std(b, i) = raw;
      s.std(b, i) = sd;
      s.tanh_u(b, i) = t;
      s.actions(b, i) = squash(t, low_[i], high_[i]);
      lp += -0.5 * xi * xi - ls - kHalfLog2Pi - log_one_minus_tanh_sq(u) - std::log(half);
    }
    s.log_prob[b] = lp;
  }
  return s;
}

Matrix GaussianPolicy::deterministic_actions(const Matrix& obs) const {
  const Matrix out = trunk_.predict(obs);
  Matrix a(obs.rows, act_dim_);
  for (int b = 0; b < obs.rows; ++b) {
    for (int i = 0; i < act_dim_; ++i) {
      a(b, i) = squash(std::tanh(out(b, i)), low_[i], high_[i]);
    }
  }
  return a;
}

Matrix GaussianPolicy::log_std(const Matrix& obs) const {
  const Matrix out = trunk_.predict(obs);
  Matrix ls(obs.rows, act_dim_);
  for (int b = 0; b < obs.rows; ++b) {
    for (int i = 0; i < act_dim_; ++i) {
      ls(b, i) = std::clamp(out(b, act_dim_ + i), kLogStdMin, kLogStdMax);
    }
  }
  return ls;
}

void GaussianPolicy::backward(const Sample& s, const Matrix& d_action,
                              std::span<const double> d_log_prob,
                              std::span<double> param_grads) const {
  const int B = s.actions.rows;
  const int A = act_dim_;
  require(d_action.rows == B && d_action.cols == A, "GaussianPolicy::backward: d_action shape");
  require(static_cast<int>(d_log_prob.size()) == B, "GaussianPolicy::backward: d_log_prob size");
  Matrix out_grad(B, 2 * A);
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < A; ++i) {
      const double t = s.tanh_u(b, i);
      const double half = 0.5 * (high_[i] - low_[i]);
      // d log_prob / d u = 2 tanh(u) (from the squashing correction);
      // d action / d u = half * (1 - tanh(u)^2).
      const double du = d_action(b, i) * half * (1.0 - t * t) + d_log_prob[b] * 2.0 * t;
      out_grad(b, i) = du;
      const double raw = s.raw_log_std(b, i);
      const bool clamped = raw < kLogStdMin || raw > kLogStdMax;
      out_grad(b, A + i) = clamped ? 0.0 : du * s.std(b, i) * s.noise(b, i) - d_log_prob[b];
    }
  }
  trunk_.backward(s.cache, out_grad, param_grads, false);
}

QNetwork::QNetwork(int obs_dim_, int act_dim_, const std::vector<int>& hidden, Rng& init)
    : obs_dim(obs_dim_), act_dim(act_dim_) {
  std::vector<int> sizes{obs_dim + act_dim};
  sizes.insert(sizes.end(), hidden.begin(), hidden.end());
  sizes.push_back(1);
  q1 = netopt::Mlp::random(sizes, init);
  q2 = netopt::Mlp::random(sizes, init);
}

Matrix QNetwork::joint_input(const Matrix& obs, const Matrix& act) const {
  require(obs.cols == obs_dim && act.cols == act_dim && obs.rows == act.rows,
          "QNetwork: observation/action shape mismatch");
  Matrix x(obs.rows, obs_dim + act_dim);
  for (int b = 0; b < obs.rows; ++b) {
    auto dst = x.row(b);
    const auto o = obs.row(b);
    const auto a = act.row(b);
    std::copy(o.begin(), o.end(), dst.begin());
    std::copy(a.begin(), a.end(), dst.begin() + obs_dim);
  }
  return x;
}

std::vector<double> QNetwork::min_q(const Matrix& obs, const Matrix& act) const {
  const Matrix x = joint_input(obs, act);
  const Matrix a = q1.predict(x);
  const Matrix b = q2.predict(x);
  std::vector<double> out(obs.rows);
  for (int i = 0; i < obs.rows; ++i) out[i] = std::min(a.data[i], b.data[i]);
  return out;
}

std::vector<double> td_targets(const QNetwork& targets, const GaussianPolicy& policy,
                               const TransitionBatch& batch, const UpdateParams& p, Rng& rng) {
  const int B = batch.size();
  require(static_cast<int>(batch.reward.size()) == B && static_cast<int>(batch.done.size()) == B &&
              batch.next_obs.rows == B,
          "td_targets: ragged batch");
  const auto next = policy.rsample(batch.next_obs, rng);
  const auto qn = targets.min_q(batch.next_obs, next.actions);
  std::vector<double> y(B);
  for (int b = 0; b < B; ++b) {
    const double soft_v = qn[b] - p.alpha * next.log_prob[b];
    y[b] = p.reward_scale * batch.reward[b] + p.gamma * (1.0 - batch.done[b]) * soft_v;
  }
  return y;
}

namespace {

double regress(netopt::Mlp& net, netopt::AdamState& opt, const Matrix& x,
               std::span<const double> y, const UpdateParams& p) {
  const int B = x.rows;
  netopt::ForwardCache cache;
  const Matrix pred = net.forward(x, cache);
  Matrix grad(B, 1);
  std::vector<double> sq(B);
  double loss = 0.0;
  for (int b = 0; b < B; ++b) {
    const double diff = pred.data[b] - y[b];
    sq[b] = 0.5 * diff * diff;
    loss += sq[b];
    grad.data[b] = diff / B;
  }
  check_rows_finite(sq, "critic_update: non-finite loss at batch row");
  std::vector<double> g(net.parameter_count(), 0.0);
  net.backward(cache, grad, g, false);
  netopt::clip_global_norm(g, p.grad_clip);
  if (opt.m.size() != g.size()) opt = netopt::AdamState(g.size());
  netopt::adam_step(opt, net.mutable_params(), g, p.lr);
  return loss / B;
}

}  // namespace

double critic_update(QNetwork& q, CriticOptimizers& opt, const TransitionBatch& batch,
                     std::span<const double> targets, const UpdateParams& p) {
  require(static_cast<int>(targets.size()) == batch.size(), "critic_update: target count");
  const Matrix x = q.joint_input(batch.obs, batch.act);
  const double l1 = regress(q.q1, opt.q1, x, targets, p);
  const double l2 = regress(q.q2, opt.q2, x, targets, p);
  return 0.5 * (l1 + l2);
}

double critic_update(QNetwork& q, const QNetwork& targets, const GaussianPolicy& policy,
                     CriticOptimizers& opt, const TransitionBatch& batch, const UpdateParams& p,
                     Rng& rng) {
  const auto y = td_targets(targets, policy, batch, p, rng);
  return critic_update(q, opt, batch, y, p);
}

ActorUpdateResult actor_update(GaussianPolicy& policy, netopt::AdamState& opt, const QNetwork& q,
                               const Matrix& obs, const UpdateParams& p, Rng& rng,
                               const ActorPenalty* extra) {
  const int B = obs.rows;
  const int A = policy.act_dim();
  const auto s = policy.rsample(obs, rng);
  const Matrix x = q.joint_input(obs, s.actions);
  netopt::ForwardCache c1, c2;
  const Matrix v1 = q.q1.forward(x, c1);
  const Matrix v2 = q.q2.forward(x, c2);

  Matrix g1(B, 1), g2(B, 1);
  std::vector<double> rows(B);
  double loss = 0.0;
  for (int b = 0; b < B; ++b) {
    const bool first = v1.data[b] <= v2.data[b];
    const double qmin = first ? v1.data[b] : v2.data[b];
    (first ? g1 : g2).data[b] = -1.0 / B;
    rows[b] = p.alpha * s.log_prob[b] - qmin;
    loss += rows[b];
  }
  check_rows_finite(rows, "actor_update: non-finite loss at batch row");
  loss /= B;

  const Matrix dx1 = q.q1.backward(c1, g1, {}, true);
  const Matrix dx2 = q.q2.backward(c2, g2, {}, true);
  Matrix d_action(B, A);
  for (int b = 0; b < B; ++b) {
    for (int i = 0; i < A; ++i) d_action(b, i) = dx1(b, q.obs_dim + i) + dx2(b, q.obs_dim + i);
  }

  ActorUpdateResult result;
  if (extra != nullptr) {
    Matrix d_pen(B, A);
    result.penalty = extra->evaluate(s.actions, d_pen);
    if (!std::isfinite(result.penalty)) throw NumericalError("actor_update: non-finite penalty", 0);
    for (std::size_t i = 0; i < d_action.data.size(); ++i) d_action.data[i] += d_pen.data[i];
  }
  result.loss = loss + result.penalty;

  const std::vector<double> d_lp(B, p.alpha / B);
  std::vector<double> g(policy.trunk().parameter_count(), 0.0);
  policy.backward(s, d_action, d_lp, g);
  netopt::clip_global_norm(g, p.grad_clip);
  if (opt.m.size() != g.size()) opt = netopt::AdamState(g.size());
  netopt::adam_step(opt, policy.trunk().mutable_params(), g, p.lr);
  return result;
}

void soft_update(netopt::Mlp& target, const netopt::Mlp& source, double tau) {
  require(target.layer_sizes() == source.layer_sizes(), "soft_update: network shapes differ");
  auto t = target.mutable_params();
  const auto s = source.params();
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = (1.0 - tau) * t[i] + tau * s[i];
}

void soft_update(QNetwork& target, const QNetwork& source, double tau) {
  soft_update(target.q1, source.q1, tau);
  soft_update(target.q2, source.q2, tau);
}

}  // namespace hrl::sac
