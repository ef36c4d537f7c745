#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "hrl/oracle.hpp"

// Random instance families and the performance-difference-bound sweep.
namespace hrl::oracle {

struct InstanceParams {
  int n_states = 5;
  int n_actions = 3;
  int k = 2;
  double gamma = 0.9;
  // Learned policies mix the reference ones with uniform noise of a weight
  // drawn from [eta_min, eta_max].
  double eta_min = 0.02;
  double eta_max = 0.3;
};

// Tier A respects the reward-decomposition assumption; Tier B does not.
enum class Tier { A, B };
std::string to_string(Tier t);

struct Instance {
  TabularMdp mdp;
  FlatPolicy pi_star;
  TabularHierPolicy induced;  // from pi_star
  TabularHierPolicy learned;
  double eta = 0.0;
};

// Random stochastic policies.
FlatPolicy random_flat_policy(int n_states, int n_actions, Rng& rng);
TabularHierPolicy random_hier_policy(int n_states, int n_actions, Rng& rng);

// Chain of states with actions {left, stay, right} (any extra actions are
// noisy "stay"s) and slip noise. d = |i - j|; reward r(s,a) =
// E[1 - d(s', goal)/(n-1)]. Requires n_actions >= 3.
TabularMdp make_chain_mdp(const InstanceParams& p, Rng& rng);
// Sparse random transitions (two successors per state-action), rewards
// uniform in [-1, 1], d = hop count on the transition graph.
TabularMdp make_random_mdp(const InstanceParams& p, Rng& rng);

// Tier A: near-optimal learned hierarchy on a chain MDP.
Instance make_tier_a_instance(const InstanceParams& p, Rng& rng);
// Tier B: arbitrary learned hierarchy on a random MDP.
Instance make_tier_b_instance(const InstanceParams& p, Rng& rng);

struct InstanceReport {
  std::uint64_t seed = 0;
  Tier tier = Tier::A;
  double gap = 0.0;  // max_s V^{Pi*}(s) - V^{Pi}(s)
  double bound = 0.0;
  double slack = 0.0;
  bool holds = false;
  BoundTerms terms;
};

struct TheoremReport {
  Tier tier = Tier::A;
  std::vector<InstanceReport> instances;
  int violations = 0;
  double min_slack = 0.0;
  double mean_slack = 0.0;
  double max_gap = 0.0;
};

std::uint64_t instance_seed(std::uint64_t seed, int index);
InstanceReport check_instance(const Instance& inst, int k, Tier tier, std::uint64_t seed);
TheoremReport verify_theorem1(Tier tier, const InstanceParams& p, int n_instances,
                              std::uint64_t seed);

// {tier, instances: [{seed, gap, bound, slack, holds, ...}], summary}
nlohmann::json to_json(const TheoremReport& report);

}  // namespace hrl::oracle
