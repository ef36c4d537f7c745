#pragma once

#include <span>
#include <vector>

namespace hrl::netopt {

struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
  long step = 0;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;

  AdamState() = default;
  explicit AdamState(std::size_t n) : m(n, 0.0), v(n, 0.0) {}
};

// One bias-corrected Adam update, in place. Throws NumericalError (with the
// parameter index) before touching anything if a gradient is not finite.
void adam_step(AdamState& opt, std::span<double> params, std::span<const double> grads, double lr);

// Rescales `grads` so its Euclidean norm is at most `max_norm`; returns the
// norm before clipping.
double clip_global_norm(std::span<double> grads, double max_norm);

}  // namespace hrl::netopt
