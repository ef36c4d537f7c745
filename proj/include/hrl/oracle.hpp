#pragma once

#include <Eigen/Dense>
#include <vector>

#include "hrl/rng.hpp"

// Exact evaluation of flat and two-level policies on small tabular MDPs.
// Goal space is the state space (psi = identity), so a subgoal is a state
// index.
namespace hrl::oracle {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

struct TabularMdp {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> P;     // [s][a][s']
  std::vector<double> r;     // [s][a]
  double gamma = 0.9;
  int task_goal = 0;
  std::vector<double> dist;  // [s][s']

  TabularMdp() = default;
  TabularMdp(int n_states, int n_actions, double gamma);

  double& p(int s, int a, int s2) { return P[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2]; }
  double p(int s, int a, int s2) const { return P[(static_cast<std::size_t>(s) * n_actions + a) * n_states + s2]; }
  double& reward(int s, int a) { return r[static_cast<std::size_t>(s) * n_actions + a]; }
  double reward(int s, int a) const { return r[static_cast<std::size_t>(s) * n_actions + a]; }
  double& d(int s, int s2) { return dist[static_cast<std::size_t>(s) * n_states + s2]; }
  double d(int s, int s2) const { return dist[static_cast<std::size_t>(s) * n_states + s2]; }

  // Throws ContractViolation on non-stochastic rows, a bad discount, or a
  // distance table that is not a metric.
  void validate() const;
  double r_max() const;  // max |r|
};

// pi(a|s), row-major [s][a].
struct FlatPolicy {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> prob;

  FlatPolicy() = default;
  FlatPolicy(int n_states, int n_actions);
  double& operator()(int s, int a) { return prob[static_cast<std::size_t>(s) * n_actions + a]; }
  double operator()(int s, int a) const { return prob[static_cast<std::size_t>(s) * n_actions + a]; }
  void validate() const;
};

// pi_h(g|s) over subgoal states and pi_l(a|s,g).
struct TabularHierPolicy {
  int n_states = 0;
  int n_actions = 0;
  std::vector<double> high;  // [s][g]
  std::vector<double> low;   // [s][g][a]

  TabularHierPolicy() = default;
  TabularHierPolicy(int n_states, int n_actions);
  double& h(int s, int g) { return high[static_cast<std::size_t>(s) * n_states + g]; }
  double h(int s, int g) const { return high[static_cast<std::size_t>(s) * n_states + g]; }
  double& l(int s, int g, int a) {
    return low[(static_cast<std::size_t>(s) * n_states + g) * n_actions + a];
  }
  double l(int s, int g, int a) const {
    return low[(static_cast<std::size_t>(s) * n_states + g) * n_actions + a];
  }
  // The low-level policy for one fixed subgoal as a flat policy.
  FlatPolicy low_for_goal(int g) const;
  void validate() const;
};

// State transition matrix and expected reward vector under a flat policy.
Matrix transition_matrix(const TabularMdp& mdp, const FlatPolicy& pi);
Vector reward_vector(const TabularMdp& mdp, const FlatPolicy& pi);

// Direct solve of (I - gamma P_pi) V = r_pi.
Vector flat_value(const TabularMdp& mdp, const FlatPolicy& pi);
// Deterministic optimal policy by policy iteration.
FlatPolicy optimal_policy(const TabularMdp& mdp);
// Optimal policy for reaching `goal` under the low-level reward
// -sum_s' P(s'|s,a) d(s', goal), with the MDP's discount.
FlatPolicy goal_reaching_policy(const TabularMdp& mdp, int goal);

// Within-subtask discounted reward sum_{j<k} gamma^j (P_g^j r_g) for goal g.
Vector subtask_return(const TabularMdp& mdp, const FlatPolicy& low, int k);

// V = c + gamma^k M V with c = sum_g pi_h(g|.) Vt_g and M = sum_g pi_h(g|.) P_g^k,
// iterated until the sup-norm change falls below `tol`.
Vector joint_value(const TabularMdp& mdp, const TabularHierPolicy& pi, int k, double tol = 1e-14);

// max_s |V(s) - (Vt_0(s) + gamma^k E[V(s_k)])| with the right-hand side built
// by explicit propagation of the state-action marginals.
double verify_lemma1(const TabularMdp& mdp, const TabularHierPolicy& pi, int k, const Vector& V);

// pi_h*(g|s) = k-step state distribution of pi* from s; pi_l*(.|s,g) = pi*.
TabularHierPolicy induce_hier_from_flat(const TabularMdp& mdp, const FlatPolicy& pi_star, int k);

double total_variation(const double* p, const double* q, int n);

struct Lemma2Result {
  double lhs = 0.0;  // TV of the state marginals at step t
  double rhs = 0.0;  // t * eps
  bool holds = false;
  double eps = 0.0;
  // State-action marginal TV at step t, against (t + 1) * eps.
  double state_action_tv = 0.0;
  double state_action_rhs = 0.0;
  bool state_action_holds = false;
};

// Both chains start in `start`; eps = max_s TV(a(.|s) || b(.|s)).
Lemma2Result verify_lemma2(const TabularMdp& mdp, const FlatPolicy& low_a, const FlatPolicy& low_b,
                           int t, int start = 0);

// E_{g~pi_h(.|s), s_k~P_g^k(s,.)} [d(s_k, g) / d(s, g)], with a zero initial
// distance contributing 0.
Vector expected_reachability(const TabularMdp& mdp, const TabularHierPolicy& pi, int k);

struct BoundTerms {
  double eps = 0.0;
  double ratio = 0.0;  // max_s E_{g~pi_h}(1 + pi_h*/pi_h)
  double reach_max = 0.0;
  double r_max = 0.0;
  double C = 0.0;
  bool finite = true;  // false when pi_h* puts mass where pi_h has none
};

// C = (2 r_max / (1-gamma)^2) [(1+gamma) ratio eps + 2 (R_max + 2 gamma^k)].
BoundTerms bound_rhs(const TabularMdp& mdp, const TabularHierPolicy& pi,
                     const TabularHierPolicy& pi_star, int k);
double assemble_bound(double r_max, double gamma, int k, double ratio, double eps,
                      double reach_max);

}  // namespace hrl::oracle
