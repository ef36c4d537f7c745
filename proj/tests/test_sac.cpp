#include <doctest.h>

#include <cmath>
#include <numbers>

#include "hrl/sac.hpp"

using hrl::Matrix;
using hrl::Rng;
using namespace hrl::sac;

namespace {

// Zero every weight and set the output biases.
void set_constant(hrl::netopt::Mlp& net, const std::vector<double>& out) {
  for (double& p : net.mutable_params()) p = 0.0;
  auto b = net.mutable_biases(net.num_layers() - 1);
  std::copy(out.begin(), out.end(), b.begin());
}

TransitionBatch single(double obs, double act, double r, double next, double done) {
  TransitionBatch t;
  t.obs = Matrix(1, 1, obs);
  t.act = Matrix(1, 1, act);
  t.reward = {r};
  t.next_obs = Matrix(1, 1, next);
  t.done = {done};
  return t;
}

class ZeroPenalty : public ActorPenalty {
 public:
  double evaluate(const Matrix& actions, Matrix& d) const override {
    d = Matrix(actions.rows, actions.cols);
    return 0.0;
  }
};

// Pulls the mean action toward a target: 0.5 * mean ||a - target||^2.
class PullPenalty : public ActorPenalty {
 public:
  double evaluate(const Matrix& actions, Matrix& d) const override {
    d = Matrix(actions.rows, actions.cols);
    double v = 0.0;
    for (std::size_t i = 0; i < actions.data.size(); ++i) {
      const double e = actions.data[i] - 0.8;
      v += 0.5 * e * e / actions.rows;
      d.data[i] = e / actions.rows;
    }
    return v;
  }
};

}  // namespace

TEST_CASE("deterministic action at mean zero is the box centre") {
  Rng rng(1);
  GaussianPolicy pi(1, 2, {}, {-1.0, -1.0}, {1.0, 1.0}, rng);
  set_constant(pi.trunk(), {0.0, 0.0, -20.0, -20.0});
  const auto [a, lp] = pi.sample_action(std::vector<double>{0.3}, rng, true);
  CHECK(a[0] == 0.0);
  CHECK(a[1] == 0.0);
  const auto [s, lps] = pi.sample_action(std::vector<double>{0.3}, rng, false);
  CHECK(std::abs(s[0]) < 1e-8);
  CHECK(std::isfinite(lps));
}

TEST_CASE("log-probability matches a Monte-Carlo density estimate") {
  Rng rng(2);
  GaussianPolicy pi(1, 1, {}, {-2.0}, {3.0}, rng);
  set_constant(pi.trunk(), {0.3, std::log(0.6)});
  const Matrix obs(1, 1, 0.0);

  const int n = 1000000;
  std::vector<double> draws(n);
  for (double& d : draws) d = pi.sample_action(std::vector<double>{0.0}, rng, false).first[0];

  for (double xi : {-1.2, -0.3, 0.0, 0.7, 1.5}) {
    const auto s = pi.rsample_with_noise(obs, Matrix(1, 1, xi));
    const double a = s.actions(0, 0);
    const double h = 0.02;
    long count = 0;
    for (double d : draws) count += (d >= a - h && d < a + h) ? 1 : 0;
    const double density = static_cast<double>(count) / (n * 2.0 * h);
    CAPTURE(xi);
    CHECK(std::exp(s.log_prob[0]) == doctest::Approx(density).epsilon(0.05));
  }
}

TEST_CASE("actions stay strictly inside the bounds") {
  Rng rng(3);
  for (int p = 0; p < 20; ++p) {
    const double lo = rng.uniform(-5.0, 0.0), hi = lo + rng.uniform(0.1, 5.0);
    GaussianPolicy pi(3, 2, {8}, {lo, -1.0}, {hi, 1.0}, rng);
    // Large weights push some draws deep into tanh saturation.
    for (double& w : pi.trunk().mutable_params()) w *= 10.0;
    for (int i = 0; i < 500; ++i) {
      const std::vector<double> obs{rng.normal(0, 3), rng.normal(0, 3), rng.normal(0, 3)};
      const auto a = pi.sample_action(obs, rng, i % 5 == 0).first;
      REQUIRE(a[0] > lo);
      REQUIRE(a[0] < hi);
      REQUIRE(a[1] > -1.0);
      REQUIRE(a[1] < 1.0);
    }
  }
}

TEST_CASE("log_std stays within its clamp") {
  Rng rng(4);
  GaussianPolicy pi(4, 3, {16}, std::vector<double>(3, -1.0), std::vector<double>(3, 1.0), rng);
  for (double& w : pi.trunk().mutable_params()) w *= 50.0;
  Matrix obs(500, 4);
  for (double& v : obs.data) v = rng.normal(0.0, 10.0);
  const Matrix ls = pi.log_std(obs);
  for (double v : ls.data) {
    REQUIRE(v >= GaussianPolicy::kLogStdMin);
    REQUIRE(v <= GaussianPolicy::kLogStdMax);
  }
}

TEST_CASE("td target arithmetic") {
  Rng rng(5);
  GaussianPolicy pi(1, 1, {4}, {-1.0}, {1.0}, rng);
  QNetwork targets(1, 1, {4}, rng);
  set_constant(targets.q1, {2.0});
  set_constant(targets.q2, {7.0});

  UpdateParams p;
  p.gamma = 0.99;
  p.alpha = 0.0;
  auto y = td_targets(targets, pi, single(0.0, 0.0, 1.0, 0.0, 0.0), p, rng);
  CHECK(y[0] == doctest::Approx(2.98).epsilon(1e-15));

  p.alpha = 0.2;
  Rng a(11), b(11);
  y = td_targets(targets, pi, single(0.0, 0.0, 1.0, 0.5, 0.0), p, a);
  const double lp = pi.rsample(Matrix(1, 1, 0.5), b).log_prob[0];
  CHECK(y[0] == doctest::Approx(1.0 + 0.99 * (2.0 - 0.2 * lp)).epsilon(1e-14));

  y = td_targets(targets, pi, single(0.0, 0.0, 1.0, 0.5, 1.0), p, rng);
  CHECK(y[0] == 1.0);
}

TEST_CASE("swapping twin critics leaves td targets unchanged") {
  Rng rng(6);
  GaussianPolicy pi(2, 1, {8}, {-1.0}, {1.0}, rng);
  QNetwork t(2, 1, {8}, rng);
  QNetwork swapped = t;
  std::swap(swapped.q1, swapped.q2);
  TransitionBatch batch;
  batch.obs = Matrix(16, 2);
  batch.act = Matrix(16, 1);
  batch.next_obs = Matrix(16, 2);
  for (double& v : batch.next_obs.data) v = rng.normal();
  batch.reward.assign(16, 0.5);
  batch.done.assign(16, 0.0);
  UpdateParams p;
  Rng a(3), b(3);
  CHECK(td_targets(t, pi, batch, p, a) == td_targets(swapped, pi, batch, p, b));
}

TEST_CASE("gamma zero regression converges to the reward") {
  Rng rng(7);
  GaussianPolicy pi(1, 1, {8}, {-1.0}, {1.0}, rng);
  QNetwork q(1, 1, {16, 16}, rng);
  const QNetwork targets = q;
  CriticOptimizers opt;
  UpdateParams p;
  p.gamma = 0.0;
  p.lr = 3e-3;
  const auto batch = single(0.4, -0.2, 1.7, 0.1, 0.0);
  for (int i = 0; i < 3000; ++i) critic_update(q, targets, pi, opt, batch, p, rng);
  const auto x = q.joint_input(batch.obs, batch.act);
  CHECK(std::abs(q.q1.predict(x).data[0] - 1.7) < 1e-3);
  CHECK(std::abs(q.q2.predict(x).data[0] - 1.7) < 1e-3);
}

TEST_CASE("constant critic with alpha zero leaves the actor unchanged") {
  Rng rng(8);
  GaussianPolicy pi(2, 1, {8}, {-1.0}, {1.0}, rng);
  QNetwork q(2, 1, {8}, rng);
  set_constant(q.q1, {3.0});
  set_constant(q.q2, {3.0});
  Matrix obs(32, 2);
  for (double& v : obs.data) v = rng.normal();
  UpdateParams p;
  p.alpha = 0.0;
  hrl::netopt::AdamState opt;
  const std::vector<double> before(pi.trunk().params().begin(), pi.trunk().params().end());
  actor_update(pi, opt, q, obs, p, rng);
  CHECK(std::equal(before.begin(), before.end(), pi.trunk().params().begin()));

  PullPenalty pull;
  actor_update(pi, opt, q, obs, p, rng, &pull);
  CHECK_FALSE(std::equal(before.begin(), before.end(), pi.trunk().params().begin()));
}

TEST_CASE("explicit zero penalty matches no penalty") {
  Rng init(9);
  GaussianPolicy a(2, 2, {8}, {-1.0, -1.0}, {1.0, 1.0}, init);
  GaussianPolicy b = a;
  QNetwork q(2, 2, {8}, init);
  Matrix obs(16, 2);
  for (double& v : obs.data) v = init.normal();
  hrl::netopt::AdamState oa, ob;
  UpdateParams p;
  Rng ra(1), rb(1);
  ZeroPenalty zero;
  for (int i = 0; i < 5; ++i) {
    actor_update(a, oa, q, obs, p, ra);
    actor_update(b, ob, q, obs, p, rb, &zero);
  }
  CHECK(std::equal(a.trunk().params().begin(), a.trunk().params().end(),
                   b.trunk().params().begin()));
}

TEST_CASE("bandit: the actor finds the critic's maximum") {
  Rng rng(10);
  GaussianPolicy pi(1, 1, {16}, {-1.0}, {1.0}, rng);
  QNetwork q(1, 1, {32, 32}, rng);
  CriticOptimizers copt;
  UpdateParams cp;
  cp.lr = 3e-3;
  // Fit Q(0, a) = -(a - 0.5)^2 on uniform actions.
  TransitionBatch batch;
  batch.obs = Matrix(128, 1);
  batch.act = Matrix(128, 1);
  std::vector<double> y(128);
  for (int i = 0; i < 4000; ++i) {
    for (int b = 0; b < 128; ++b) {
      const double a = rng.uniform(-1.0, 1.0);
      batch.act(b, 0) = a;
      y[b] = -(a - 0.5) * (a - 0.5);
    }
    critic_update(q, copt, batch, y, cp);
  }

  UpdateParams ap;
  ap.alpha = 0.01;
  ap.lr = 3e-3;
  hrl::netopt::AdamState aopt;
  const Matrix obs(64, 1, 0.0);
  for (int i = 0; i < 2000; ++i) actor_update(pi, aopt, q, obs, ap, rng);
  const double mean_action = pi.deterministic_actions(Matrix(1, 1, 0.0)).data[0];
  CHECK(std::abs(mean_action - 0.5) <= 0.05);
}

TEST_CASE("soft update examples and contraction") {
  hrl::netopt::Mlp t({2, 3}), s({2, 3});
  for (double& v : s.mutable_params()) v = 1.0;
  soft_update(t, s, 0.005);
  for (double v : t.params()) CHECK(v == doctest::Approx(0.005).epsilon(1e-15));

  hrl::netopt::Mlp copy = t;
  soft_update(copy, s, 0.0);
  CHECK(std::equal(copy.params().begin(), copy.params().end(), t.params().begin()));
  soft_update(copy, s, 1.0);
  CHECK(std::equal(copy.params().begin(), copy.params().end(), s.params().begin()));

  CHECK_THROWS_AS(soft_update(t, hrl::netopt::Mlp({2, 4}), 0.5), hrl::ContractViolation);

  Rng rng(12);
  hrl::netopt::Mlp a = hrl::netopt::Mlp::random({4, 8, 2}, rng);
  const hrl::netopt::Mlp src = hrl::netopt::Mlp::random({4, 8, 2}, rng);
  std::vector<double> gap0(a.parameter_count());
  for (std::size_t i = 0; i < gap0.size(); ++i) gap0[i] = std::abs(a.params()[i] - src.params()[i]);
  const double tau = 0.05;
  for (int n = 1; n <= 100; ++n) {
    soft_update(a, src, tau);
    const double f = std::pow(1.0 - tau, n);
    for (std::size_t i = 0; i < gap0.size(); ++i) {
      REQUIRE(std::abs(a.params()[i] - src.params()[i]) <= f * gap0[i] + 1e-15);
    }
  }
}

TEST_CASE("replay buffer ring, membership and uniformity") {
  ReplayBuffer<int> small(2);
  Rng rng(13);
  CHECK_THROWS_AS(small.sample(1, rng), hrl::ContractViolation);
  small.push(1);
  small.push(2);
  small.push(3);
  CHECK(small.size() == 2);
  CHECK(small.snapshot() == std::vector<int>{2, 3});

  ReplayBuffer<int> big(1000);
  for (int i = 0; i < 1500; ++i) big.push(i);
  for (int r : big.sample(128, rng)) {
    CHECK(r >= 500);
    CHECK(r < 1500);
  }

  ReplayBuffer<int> ten(10);
  for (int i = 0; i < 10; ++i) ten.push(i);
  std::vector<int> counts(10, 0);
  const int n = 100000;
  for (int r : ten.sample(n, rng)) ++counts[r];
  double chi2 = 0.0;
  for (int c : counts) chi2 += (c - n / 10.0) * (c - n / 10.0) / (n / 10.0);
  // 99th percentile of chi-square with 9 degrees of freedom.
  CHECK(chi2 < 21.666);
}
