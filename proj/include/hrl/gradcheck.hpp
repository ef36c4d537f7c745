#pragma once

#include <functional>
#include <span>
#include <vector>

#include "hrl/mlp.hpp"
#include "hrl/rng.hpp"

namespace hrl::netopt {

// |a - n| / max(|a|, |n|, 1e-8)
double relative_error(double analytic, double numeric);

// Central-difference gradient of a scalar function.
std::vector<double> numeric_gradient(const std::function<double(std::span<const double>)>& f,
                                     std::span<const double> x, double h = 1e-5);

struct GradCheckOptions {
  double h = 1e-5;
  // Applied to the analytic parameter gradient before comparison; used for
  // fault-injection tests of the checker itself.
  std::function<void(std::span<double>)> tamper;
};

// Compares backward() against central differences over every parameter for
// the random scalar loss c . net(input), c ~ N(0, I). Returns the largest
// relative error.
double grad_check(const Mlp& net, std::span<const double> input, Rng& rng,
                  const GradCheckOptions& options = {});

}  // namespace hrl::netopt
