#include "hrl/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "hrl/errors.hpp"

namespace hrl::oracle {

namespace {

constexpr double kRowTol = 1e-12;
constexpr double kReachEps = 1e-6;

void check_row(const double* row, int n, const std::string& what) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    if (!(row[i] >= 0.0)) throw ContractViolation(what + ": negative or NaN probability");
    sum += row[i];
  }
  if (std::abs(sum - 1.0) > kRowTol) {
    throw ContractViolation(what + ": row sums to " + std::to_string(sum));
  }
}

Matrix matrix_power(const Matrix& m, int k) {
  Matrix out = Matrix::Identity(m.rows(), m.cols());
  for (int i = 0; i < k; ++i) out = out * m;
  return out;
}

}  // namespace

TabularMdp::TabularMdp(int ns, int na, double g)
    : n_states(ns), n_actions(na),
      P(static_cast<std::size_t>(ns) * na * ns, 0.0),
      r(static_cast<std::size_t>(ns) * na, 0.0), gamma(g),
      dist(static_cast<std::size_t>(ns) * ns, 0.0) {
  require(ns > 0 && na > 0, "TabularMdp: sizes must be positive");
}

void TabularMdp::validate() const {
  require(gamma > 0.0 && gamma < 1.0, "TabularMdp: gamma must lie in (0, 1)");
  require(task_goal >= 0 && task_goal < n_states, "TabularMdp: task goal out of range");
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) {
      check_row(&P[(static_cast<std::size_t>(s) * n_actions + a) * n_states], n_states,
                "TabularMdp transition");
    }
  }
  for (int i = 0; i < n_states; ++i) {
    require(d(i, i) == 0.0, "TabularMdp: d(s, s) must be 0");
    for (int j = 0; j < n_states; ++j) {
      require(d(i, j) >= 0.0 && d(i, j) == d(j, i), "TabularMdp: d must be symmetric, >= 0");
      for (int m = 0; m < n_states; ++m) {
        require(d(i, m) <= d(i, j) + d(j, m) + 1e-12, "TabularMdp: d violates the triangle inequality");
      }
    }
  }
}

double TabularMdp::r_max() const {
  double m = 0.0;
  for (double v : r) m = std::max(m, std::abs(v));
  return m;
}

FlatPolicy::FlatPolicy(int ns, int na)
    : n_states(ns), n_actions(na), prob(static_cast<std::size_t>(ns) * na, 0.0) {}

void FlatPolicy::validate() const {
  for (int s = 0; s < n_states; ++s) {
    check_row(&prob[static_cast<std::size_t>(s) * n_actions], n_actions, "FlatPolicy");
  }
}

TabularHierPolicy::TabularHierPolicy(int ns, int na)
    : n_states(ns), n_actions(na), high(static_cast<std::size_t>(ns) * ns, 0.0),
      low(static_cast<std::size_t>(ns) * ns * na, 0.0) {}

FlatPolicy TabularHierPolicy::low_for_goal(int g) const {
  FlatPolicy f(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    for (int a = 0; a < n_actions; ++a) f(s, a) = l(s, g, a);
  }
  return f;
}

void TabularHierPolicy::validate() const {
  for (int s = 0; s < n_states; ++s) {
    check_row(&high[static_cast<std::size_t>(s) * n_states], n_states, "TabularHierPolicy high");
    for (int g = 0; g < n_states; ++g) {
      check_row(&low[(static_cast<std::size_t>(s) * n_states + g) * n_actions], n_actions,
                "TabularHierPolicy low");
    }
  }
}

Matrix transition_matrix(const TabularMdp& mdp, const FlatPolicy& pi) {
  require(pi.n_states == mdp.n_states && pi.n_actions == mdp.n_actions,
          "transition_matrix: policy shape does not match the MDP");
  Matrix m = Matrix::Zero(mdp.n_states, mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      const double w = pi(s, a);
      if (w == 0.0) continue;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) m(s, s2) += w * mdp.p(s, a, s2);
    }
  }
  return m;
}

Vector reward_vector(const TabularMdp& mdp, const FlatPolicy& pi) {
  Vector v = Vector::Zero(mdp.n_states);
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) v(s) += pi(s, a) * mdp.reward(s, a);
  }
  return v;
}

Vector flat_value(const TabularMdp& mdp, const FlatPolicy& pi) {
  pi.validate();
  const Matrix P = transition_matrix(mdp, pi);
  const Matrix A = Matrix::Identity(mdp.n_states, mdp.n_states) - mdp.gamma * P;
  return A.partialPivLu().solve(reward_vector(mdp, pi));
}

FlatPolicy optimal_policy(const TabularMdp& mdp) {
  FlatPolicy pi(mdp.n_states, mdp.n_actions);
  std::vector<int> choice(mdp.n_states, 0);
  for (int s = 0; s < mdp.n_states; ++s) pi(s, 0) = 1.0;
  for (int iter = 0; iter < 10000; ++iter) {
    const Vector V = flat_value(mdp, pi);
    bool changed = false;
    for (int s = 0; s < mdp.n_states; ++s) {
      std::vector<double> q(mdp.n_actions);
      for (int a = 0; a < mdp.n_actions; ++a) {
        double ev = 0.0;
        for (int s2 = 0; s2 < mdp.n_states; ++s2) ev += mdp.p(s, a, s2) * V(s2);
        q[a] = mdp.reward(s, a) + mdp.gamma * ev;
      }
      int best = choice[s];
      for (int a = 0; a < mdp.n_actions; ++a) {
        if (q[a] > q[best] + 1e-12) best = a;
      }
      if (best != choice[s]) {
        pi(s, choice[s]) = 0.0;
        pi(s, best) = 1.0;
        choice[s] = best;
        changed = true;
      }
    }
    if (!changed) return pi;
  }
  throw NumericalError("optimal_policy: policy iteration did not converge", -1);
}

FlatPolicy goal_reaching_policy(const TabularMdp& mdp, int goal) {
  TabularMdp low = mdp;
  for (int s = 0; s < mdp.n_states; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      double ed = 0.0;
      for (int s2 = 0; s2 < mdp.n_states; ++s2) ed += mdp.p(s, a, s2) * mdp.d(s2, goal);
      low.reward(s, a) = -ed;
    }
  }
  return optimal_policy(low);
}

Vector subtask_return(const TabularMdp& mdp, const FlatPolicy& low, int k) {
  require(k >= 1, "subtask_return: k must be positive");
  const Matrix P = transition_matrix(mdp, low);
  Vector acc = reward_vector(mdp, low);
  Vector out = Vector::Zero(mdp.n_states);
  double disc = 1.0;
  for (int j = 0; j < k; ++j) {
    out += disc * acc;
    acc = P * acc;
    disc *= mdp.gamma;
  }
  return out;
}

Vector joint_value(const TabularMdp& mdp, const TabularHierPolicy& pi, int k, double tol) {
  require(k >= 1, "joint_value: k must be positive");
  pi.validate();
  const int n = mdp.n_states;
  Vector c = Vector::Zero(n);
  Matrix M = Matrix::Zero(n, n);
  for (int g = 0; g < n; ++g) {
    const FlatPolicy low = pi.low_for_goal(g);
    const Vector vt = subtask_return(mdp, low, k);
    const Matrix K = matrix_power(transition_matrix(mdp, low), k);
    for (int s = 0; s < n; ++s) {
      const double w = pi.h(s, g);
      if (w == 0.0) continue;
      c(s) += w * vt(s);
      M.row(s) += w * K.row(s);
    }
  }
  const double gk = std::pow(mdp.gamma, k);
  Vector V = Vector::Zero(n);
  for (int iter = 0; iter < 1000000; ++iter) {
    const Vector next = c + gk * (M * V);
    const double change = (next - V).cwiseAbs().maxCoeff();
    V = next;
    if (change <= tol * (1.0 + V.cwiseAbs().maxCoeff())) return V;
  }
  throw NumericalError("joint_value: fixed-point iteration did not converge", -1);
}

double verify_lemma1(const TabularMdp& mdp, const TabularHierPolicy& pi, int k, const Vector& V) {
  const int n = mdp.n_states;
  const int na = mdp.n_actions;
  require(V.size() == n, "verify_lemma1: value vector has the wrong size");
  const double gk = std::pow(mdp.gamma, k);
  double worst = 0.0;
  std::vector<double> mu(n), next(n), joint(static_cast<std::size_t>(n) * na);
  for (int s0 = 0; s0 < n; ++s0) {
    double rhs = 0.0;
    for (int g = 0; g < n; ++g) {
      const double w = pi.h(s0, g);
      if (w == 0.0) continue;
      std::fill(mu.begin(), mu.end(), 0.0);
      mu[s0] = 1.0;
      double within = 0.0;
      double disc = 1.0;
      for (int j = 0; j < k; ++j) {
        // state-action marginal at step j of the subtask
        for (int s = 0; s < n; ++s) {
          for (int a = 0; a < na; ++a) joint[static_cast<std::size_t>(s) * na + a] = mu[s] * pi.l(s, g, a);
        }
        double expected_r = 0.0;
        std::fill(next.begin(), next.end(), 0.0);
        for (int s = 0; s < n; ++s) {
          for (int a = 0; a < na; ++a) {
            const double m = joint[static_cast<std::size_t>(s) * na + a];
            if (m == 0.0) continue;
            expected_r += m * mdp.reward(s, a);
            for (int s2 = 0; s2 < n; ++s2) next[s2] += m * mdp.p(s, a, s2);
          }
        }
        within += disc * expected_r;
        disc *= mdp.gamma;
        mu.swap(next);
      }
      double ev = 0.0;
      for (int s = 0; s < n; ++s) ev += mu[s] * V(s);
      rhs += w * (within + gk * ev);
    }
    worst = std::max(worst, std::abs(V(s0) - rhs));
  }
  return worst;
}

TabularHierPolicy induce_hier_from_flat(const TabularMdp& mdp, const FlatPolicy& pi_star, int k) {
  require(k >= 1, "induce_hier_from_flat: k must be positive");
  pi_star.validate();
  const int n = mdp.n_states;
  const Matrix K = matrix_power(transition_matrix(mdp, pi_star), k);
  TabularHierPolicy out(n, mdp.n_actions);
  for (int s = 0; s < n; ++s) {
    for (int g = 0; g < n; ++g) {
      out.h(s, g) = K(s, g);
      for (int a = 0; a < mdp.n_actions; ++a) out.l(s, g, a) = pi_star(s, a);
    }
  }
  return out;
}

double total_variation(const double* p, const double* q, int n) {
  double acc = 0.0;
  for (int i = 0; i < n; ++i) acc += std::abs(p[i] - q[i]);
  return 0.5 * acc;
}

Lemma2Result verify_lemma2(const TabularMdp& mdp, const FlatPolicy& low_a, const FlatPolicy& low_b,
                           int t, int start) {
  require(t >= 0, "verify_lemma2: t must be non-negative");
  require(start >= 0 && start < mdp.n_states, "verify_lemma2: start state out of range");
  const int n = mdp.n_states;
  const int na = mdp.n_actions;
  Lemma2Result res;
  for (int s = 0; s < n; ++s) {
    res.eps = std::max(res.eps, total_variation(&low_a.prob[static_cast<std::size_t>(s) * na],
                                                &low_b.prob[static_cast<std::size_t>(s) * na], na));
  }
  const Matrix Pa = transition_matrix(mdp, low_a);
  const Matrix Pb = transition_matrix(mdp, low_b);
  Eigen::RowVectorXd ma = Eigen::RowVectorXd::Zero(n);
  ma(start) = 1.0;
  Eigen::RowVectorXd mb = ma;
  for (int i = 0; i < t; ++i) {
    ma = ma * Pa;
    mb = mb * Pb;
  }
  res.lhs = total_variation(ma.data(), mb.data(), n);
  res.rhs = t * res.eps;
  res.holds = res.lhs <= res.rhs + 1e-12;

  std::vector<double> ja(static_cast<std::size_t>(n) * na), jb(ja.size());
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < na; ++a) {
      ja[static_cast<std::size_t>(s) * na + a] = ma(s) * low_a(s, a);
      jb[static_cast<std::size_t>(s) * na + a] = mb(s) * low_b(s, a);
    }
  }
  res.state_action_tv = total_variation(ja.data(), jb.data(), n * na);
  res.state_action_rhs = (t + 1) * res.eps;
  res.state_action_holds = res.state_action_tv <= res.state_action_rhs + 1e-12;
  return res;
}

Vector expected_reachability(const TabularMdp& mdp, const TabularHierPolicy& pi, int k) {
  const int n = mdp.n_states;
  Vector out = Vector::Zero(n);
  for (int g = 0; g < n; ++g) {
    const Matrix K = matrix_power(transition_matrix(mdp, pi.low_for_goal(g)), k);
    for (int s = 0; s < n; ++s) {
      const double w = pi.h(s, g);
      const double d0 = mdp.d(s, g);
      if (w == 0.0 || d0 < kReachEps) continue;
      double ratio = 0.0;
      for (int s2 = 0; s2 < n; ++s2) ratio += K(s, s2) * mdp.d(s2, g) / d0;
      out(s) += w * ratio;
    }
  }
  return out;
}

double assemble_bound(double r_max, double gamma, int k, double ratio, double eps,
                      double reach_max) {
  const double lead = 2.0 * r_max / ((1.0 - gamma) * (1.0 - gamma));
  return lead * ((1.0 + gamma) * ratio * eps + 2.0 * (reach_max + 2.0 * std::pow(gamma, k)));
}

BoundTerms bound_rhs(const TabularMdp& mdp, const TabularHierPolicy& pi,
                     const TabularHierPolicy& pi_star, int k) {
  const int n = mdp.n_states;
  const int na = mdp.n_actions;
  BoundTerms t;
  for (int s = 0; s < n; ++s) {
    double ratio = 1.0;
    for (int g = 0; g < n; ++g) {
      const double h = pi.h(s, g);
      const double hs = pi_star.h(s, g);
      if (h > 0.0) {
        ratio += hs;
      } else if (hs > 0.0) {
        t.finite = false;
      }
      if (h > 0.0 || hs > 0.0) {
        const std::size_t off = (static_cast<std::size_t>(s) * n + g) * na;
        t.eps = std::max(t.eps, total_variation(&pi_star.low[off], &pi.low[off], na));
      }
    }
    t.ratio = std::max(t.ratio, ratio);
  }
  t.reach_max = expected_reachability(mdp, pi, k).maxCoeff();
  t.r_max = mdp.r_max();
  if (!t.finite) {
    t.ratio = std::numeric_limits<double>::infinity();
    t.C = std::numeric_limits<double>::infinity();
    return t;
  }
  t.C = assemble_bound(t.r_max, mdp.gamma, k, t.ratio, t.eps, t.reach_max);
  return t;
}

}  // namespace hrl::oracle
