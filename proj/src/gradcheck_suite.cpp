#include "hrl/gradcheck_suite.hpp"

#include <algorithm>

#include "hrl/gradcheck.hpp"
#include "hrl/reachability.hpp"
#include "hrl/sac.hpp"

namespace hrl::harness {

namespace {

int pick(Rng& rng, int lo, int hi) { return lo + static_cast<int>(rng.index(hi - lo + 1)); }

std::vector<int> random_sizes(Rng& rng, int in, int out) {
  std::vector<int> sizes{in};
  const int depth = pick(rng, 1, 3);
  for (int i = 0; i < depth; ++i) sizes.push_back(pick(rng, 2, 16));
  sizes.push_back(out);
  return sizes;
}

double max_error(const std::vector<double>& analytic, const std::vector<double>& numeric) {
  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, netopt::relative_error(analytic[i], numeric[i]));
  }
  return worst;
}

double check_mlp_params(Rng& rng) {
  const netopt::Mlp net = netopt::Mlp::random(random_sizes(rng, pick(rng, 1, 8), pick(rng, 1, 4)), rng);
  std::vector<double> x(net.input_size());
  for (double& v : x) v = rng.normal();
  return netopt::grad_check(net, x, rng);
}

double check_mlp_input(Rng& rng) {
  const netopt::Mlp net = netopt::Mlp::random(random_sizes(rng, pick(rng, 1, 8), pick(rng, 1, 4)), rng);
  const int B = pick(rng, 1, 4);
  Matrix x(B, net.input_size());
  for (double& v : x.data) v = rng.normal();
  Matrix w(B, net.output_size());
  for (double& v : w.data) v = rng.normal();
  netopt::ForwardCache cache;
  net.forward(x, cache);
  const Matrix dx = net.backward(cache, w, {}, true);
  const auto loss = [&](std::span<const double> flat) {
    Matrix probe(B, net.input_size());
    std::copy(flat.begin(), flat.end(), probe.data.begin());
    const Matrix y = net.predict(probe);
    double acc = 0.0;
    for (std::size_t i = 0; i < y.data.size(); ++i) acc += w.data[i] * y.data[i];
    return acc;
  };
  return max_error(dx.data, netopt::numeric_gradient(loss, x.data));
}

double check_policy(Rng& rng) {
  const int obs_dim = pick(rng, 2, 6);
  const int act_dim = pick(rng, 1, 3);
  std::vector<int> hidden;
  for (int i = 0, d = pick(rng, 1, 2); i < d; ++i) hidden.push_back(pick(rng, 4, 12));
  std::vector<double> lo(act_dim), hi(act_dim);
  for (int i = 0; i < act_dim; ++i) {
    const double c = rng.uniform(-1.0, 1.0);
    const double h = rng.uniform(0.5, 3.0);
    lo[i] = c - h;
    hi[i] = c + h;
  }
  sac::GaussianPolicy policy(obs_dim, act_dim, hidden, lo, hi, rng);
  const int B = pick(rng, 1, 4);
  Matrix obs(B, obs_dim);
  for (double& v : obs.data) v = rng.normal();
  Matrix noise(B, act_dim);
  for (double& v : noise.data) v = rng.normal();
  Matrix d_action(B, act_dim);
  for (double& v : d_action.data) v = rng.normal();
  std::vector<double> d_lp(B);
  for (double& v : d_lp) v = rng.normal();

  const auto sample = policy.rsample_with_noise(obs, noise);
  std::vector<double> analytic(policy.trunk().parameter_count(), 0.0);
  policy.backward(sample, d_action, d_lp, analytic);

  sac::GaussianPolicy probe = policy;
  const auto loss = [&](std::span<const double> params) {
    auto dst = probe.trunk().mutable_params();
    std::copy(params.begin(), params.end(), dst.begin());
    const auto s = probe.rsample_with_noise(obs, noise);
    double acc = 0.0;
    for (std::size_t i = 0; i < s.actions.data.size(); ++i) acc += d_action.data[i] * s.actions.data[i];
    for (int b = 0; b < B; ++b) acc += d_lp[b] * s.log_prob[b];
    return acc;
  };
  return max_error(analytic, netopt::numeric_gradient(loss, policy.trunk().params()));
}

double check_regularizer(Rng& rng, envs::DistanceMetric metric) {
  const envs::Box box{-4.0, -4.0, 20.0, 20.0};
  const int B = pick(rng, 2, 8);
  std::vector<envs::Vec2> start, reached;
  Matrix offsets(B, 2);
  for (int b = 0; b < B; ++b) {
    const envs::Vec2 s{rng.uniform(-3.0, 19.0), rng.uniform(-3.0, 19.0)};
    start.push_back(s);
    reached.push_back(box.clip(s + envs::Vec2{rng.normal(0.0, 2.0), rng.normal(0.0, 2.0)}));
    offsets(b, 0) = rng.uniform(-4.0, 4.0);
    offsets(b, 1) = rng.uniform(-4.0, 4.0);
  }
  const double lambda1 = rng.uniform(0.1, 5.0);
  // A large clip keeps the check on the smooth branch; the clipped branch
  // has a zero gradient and is covered by unit tests.
  const brhpo::HighActorRegularizer reg(start, reached, lambda1, metric, box, brhpo::kDenomEps, 1e6);
  Matrix grad;
  reg.evaluate(offsets, grad);
  const auto loss = [&](std::span<const double> flat) {
    Matrix probe(B, 2);
    std::copy(flat.begin(), flat.end(), probe.data.begin());
    Matrix unused;
    return reg.evaluate(probe, unused);
  };
  return max_error(grad.data, netopt::numeric_gradient(loss, offsets.data));
}

}  // namespace

GradcheckReport run_gradcheck_suite(int n_configs, std::uint64_t seed) {
  GradcheckReport rep;
  Rng rng = Rng::substream(seed, "gradcheck");
  const envs::DistanceMetric metrics[] = {envs::DistanceMetric::L1, envs::DistanceMetric::L2,
                                          envs::DistanceMetric::Linf};
  for (int i = 0; i < n_configs; ++i) {
    rep.cases.push_back({"mlp_params", i, check_mlp_params(rng)});
    rep.cases.push_back({"mlp_input", i, check_mlp_input(rng)});
    rep.cases.push_back({"squashed_gaussian_policy", i, check_policy(rng)});
    const auto m = metrics[i % 3];
    rep.cases.push_back({"reach_regularizer_" + envs::to_string(m), i, check_regularizer(rng, m)});
  }
  for (const auto& c : rep.cases) rep.max_rel_error = std::max(rep.max_rel_error, c.max_rel_error);
  return rep;
}

}  // namespace hrl::harness
