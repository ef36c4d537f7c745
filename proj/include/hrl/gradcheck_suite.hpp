#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace hrl::harness {

struct GradcheckCase {
  std::string name;
  int config = 0;
  double max_rel_error = 0.0;
};

struct GradcheckReport {
  std::vector<GradcheckCase> cases;
  double max_rel_error = 0.0;
};

// Central-difference checks over `n_configs` random configurations of every
// differentiable piece used in training: MLP parameter and input gradients,
// the reparameterized squashed-Gaussian policy, and the high-level
// reachability penalty under each distance metric.
GradcheckReport run_gradcheck_suite(int n_configs, std::uint64_t seed);

}  // namespace hrl::harness
