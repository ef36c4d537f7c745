#include "hrl/gradcheck.hpp"

#include <algorithm>
#include <cmath>

#include "hrl/errors.hpp"

namespace hrl::netopt {

double relative_error(double analytic, double numeric) {
  const double denom = std::max({std::abs(analytic), std::abs(numeric), 1e-8});
  return std::abs(analytic - numeric) / denom;
}

std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double h) {
  std::vector<double> probe(x.begin(), x.end());
  std::vector<double> grad(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double saved = probe[i];
    probe[i] = saved + h;
    const double up = f(probe);
    probe[i] = saved - h;
    const double down = f(probe);
    probe[i] = saved;
    grad[i] = (up - down) / (2.0 * h);
  }
  return grad;
}

double grad_check(const Mlp& net, std::span<const double> input, Rng& rng,
                  const GradCheckOptions& options) {
  require(static_cast<int>(input.size()) == net.input_size(), "grad_check: input width mismatch");
  std::vector<double> weights(net.output_size());
  for (double& c : weights) c = rng.normal();

  Matrix x(1, net.input_size());
  std::copy(input.begin(), input.end(), x.data.begin());

  ForwardCache cache;
  net.forward(x, cache);
  Matrix out_grad(1, net.output_size());
  std::copy(weights.begin(), weights.end(), out_grad.data.begin());
  std::vector<double> analytic(net.parameter_count(), 0.0);
  net.backward(cache, out_grad, analytic, false);
  if (options.tamper) options.tamper(analytic);

  Mlp probe = net;
  const auto loss = [&](std::span<const double> params) {
    auto dst = probe.mutable_params();
    std::copy(params.begin(), params.end(), dst.begin());
    const auto y = probe.predict(input);
    double acc = 0.0;
    for (std::size_t o = 0; o < y.size(); ++o) acc += weights[o] * y[o];
    return acc;
  };
  const auto numeric = numeric_gradient(loss, net.params(), options.h);

  double worst = 0.0;
  for (std::size_t i = 0; i < analytic.size(); ++i) {
    worst = std::max(worst, relative_error(analytic[i], numeric[i]));
  }
  return worst;
}

}  // namespace hrl::netopt
