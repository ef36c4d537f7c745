#include "hrl/adam.hpp"

#include <cmath>

#include "hrl/errors.hpp"

namespace hrl::netopt {

void adam_step(AdamState& opt, std::span<double> params, std::span<const double> grads, double lr) {
  require(params.size() == grads.size() && opt.m.size() == params.size() &&
              opt.v.size() == params.size(),
          "adam_step: parameter, gradient and moment shapes must match");
  for (std::size_t i = 0; i < grads.size(); ++i) {
    if (!std::isfinite(grads[i])) {
      throw NumericalError("adam_step: non-finite gradient", static_cast<long>(i));
    }
  }
  ++opt.step;
  const double c1 = 1.0 - std::pow(opt.beta1, static_cast<double>(opt.step));
  const double c2 = 1.0 - std::pow(opt.beta2, static_cast<double>(opt.step));
  const double b1 = opt.beta1;
  const double b2 = opt.beta2;
  double* m = opt.m.data();
  double* v = opt.v.data();
  const std::size_t n = params.size();
#pragma omp simd
  for (std::size_t i = 0; i < n; ++i) {
    const double g = grads[i];
    m[i] = b1 * m[i] + (1.0 - b1) * g;
    v[i] = b2 * v[i] + (1.0 - b2) * g * g;
    const double mhat = m[i] / c1;
    const double vhat = v[i] / c2;
    params[i] -= lr * mhat / (std::sqrt(vhat) + opt.eps);
  }
}

double clip_global_norm(std::span<double> grads, double max_norm) {
  double sq = 0.0;
  for (double g : grads) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (double& g : grads) g *= scale;
  }
  return norm;
}

}  // namespace hrl::netopt
