#include "hrl/theorem.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

#include "hrl/errors.hpp"

namespace hrl::oracle {

namespace {

// Uniform weights normalized onto the simplex.
void random_simplex(double* out, int n, Rng& rng) {
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    out[i] = rng.uniform(0.05, 1.0);
    sum += out[i];
  }
  for (int i = 0; i < n; ++i) out[i] /= sum;
}

void fill_state_rewards(TabularMdp& mdp) {
  const int n = mdp.n_states;
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < mdp.n_actions; ++a) {
      double acc = 0.0;
      for (int s2 = 0; s2 < n; ++s2) {
        acc += mdp.p(s, a, s2) * (1.0 - mdp.d(s2, mdp.task_goal) / (n - 1));
      }
      mdp.reward(s, a) = acc;
    }
  }
}

double json_number(double v) {
  return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

}  // namespace

std::string to_string(Tier t) { return t == Tier::A ? "a" : "b"; }

FlatPolicy random_flat_policy(int n_states, int n_actions, Rng& rng) {
  FlatPolicy pi(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    random_simplex(&pi.prob[static_cast<std::size_t>(s) * n_actions], n_actions, rng);
  }
  return pi;
}

TabularHierPolicy random_hier_policy(int n_states, int n_actions, Rng& rng) {
  TabularHierPolicy pi(n_states, n_actions);
  for (int s = 0; s < n_states; ++s) {
    random_simplex(&pi.high[static_cast<std::size_t>(s) * n_states], n_states, rng);
    for (int g = 0; g < n_states; ++g) {
      random_simplex(&pi.low[(static_cast<std::size_t>(s) * n_states + g) * n_actions], n_actions,
                     rng);
    }
  }
  return pi;
}

TabularMdp make_chain_mdp(const InstanceParams& p, Rng& rng) {
  require(p.n_states >= 2, "make_chain_mdp: need at least 2 states");
  require(p.n_actions >= 3, "make_chain_mdp: need at least 3 actions");
  const int n = p.n_states;
  TabularMdp mdp(n, p.n_actions, p.gamma);
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) mdp.d(i, j) = std::abs(i - j);
  }
  mdp.task_goal = static_cast<int>(rng.index(n));
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < p.n_actions; ++a) {
      const int move = a == 0 ? -1 : (a == 2 ? 1 : 0);
      const double hit = rng.uniform(0.7, 0.95);
      const auto clampi = [n](int v) { return std::clamp(v, 0, n - 1); };
      mdp.p(s, a, clampi(s + move)) += hit;
      // Slip: the remaining mass goes to the two other outcomes.
      const double rest = 1.0 - hit;
      const double split = rng.uniform(0.0, 1.0);
      int others[2];
      int c = 0;
      for (int m : {-1, 0, 1}) {
        if (m != move) others[c++] = m;
      }
      mdp.p(s, a, clampi(s + others[0])) += rest * split;
      mdp.p(s, a, clampi(s + others[1])) += rest * (1.0 - split);
    }
  }
  fill_state_rewards(mdp);
  mdp.validate();
  return mdp;
}

TabularMdp make_random_mdp(const InstanceParams& p, Rng& rng) {
  const int n = p.n_states;
  require(n >= 2, "make_random_mdp: need at least 2 states");
  TabularMdp mdp(n, p.n_actions, p.gamma);
  for (int s = 0; s < n; ++s) {
    for (int a = 0; a < p.n_actions; ++a) {
      const int s1 = static_cast<int>(rng.index(n));
      int s2 = static_cast<int>(rng.index(n - 1));
      if (s2 >= s1) ++s2;
      const double w = rng.uniform(0.05, 0.95);
      mdp.p(s, a, s1) = w;
      mdp.p(s, a, s2) = 1.0 - w;
      mdp.reward(s, a) = rng.uniform(-1.0, 1.0);
    }
  }
  // Hop count on the undirected support graph; unreachable pairs get n.
  for (int src = 0; src < n; ++src) {
    std::vector<int> hops(n, -1);
    hops[src] = 0;
    std::deque<int> q{src};
    while (!q.empty()) {
      const int u = q.front();
      q.pop_front();
      for (int v = 0; v < n; ++v) {
        if (hops[v] >= 0) continue;
        bool edge = false;
        for (int a = 0; a < p.n_actions && !edge; ++a) {
          edge = mdp.p(u, a, v) > 0.0 || mdp.p(v, a, u) > 0.0;
        }
        if (edge) {
          hops[v] = hops[u] + 1;
          q.push_back(v);
        }
      }
    }
    for (int v = 0; v < n; ++v) mdp.d(src, v) = hops[v] >= 0 ? hops[v] : n;
  }
  mdp.task_goal = static_cast<int>(rng.index(n));
  mdp.validate();
  return mdp;
}

Instance make_tier_a_instance(const InstanceParams& p, Rng& rng) {
  Instance inst;
  inst.mdp = make_chain_mdp(p, rng);
  const int n = p.n_states;
  const int na = p.n_actions;
  inst.pi_star = optimal_policy(inst.mdp);
  inst.induced = induce_hier_from_flat(inst.mdp, inst.pi_star, p.k);
  inst.eta = rng.uniform(p.eta_min, p.eta_max);
  const double eta = inst.eta;
  inst.learned = TabularHierPolicy(n, na);
  for (int g = 0; g < n; ++g) {
    const FlatPolicy reach = goal_reaching_policy(inst.mdp, g);
    for (int s = 0; s < n; ++s) {
      for (int a = 0; a < na; ++a) {
        inst.learned.l(s, g, a) = (1.0 - eta) * reach(s, a) + eta / na;
      }
    }
  }
  for (int s = 0; s < n; ++s) {
    for (int g = 0; g < n; ++g) {
      inst.learned.h(s, g) = (1.0 - eta) * inst.induced.h(s, g) + eta / n;
    }
  }
  return inst;
}

Instance make_tier_b_instance(const InstanceParams& p, Rng& rng) {
  Instance inst;
  inst.mdp = make_random_mdp(p, rng);
  inst.pi_star = optimal_policy(inst.mdp);
  inst.induced = induce_hier_from_flat(inst.mdp, inst.pi_star, p.k);
  inst.learned = random_hier_policy(p.n_states, p.n_actions, rng);
  return inst;
}

std::uint64_t instance_seed(std::uint64_t seed, int index) {
  return splitmix64(seed ^ (0x5851f42d4c957f2dULL * static_cast<std::uint64_t>(index + 1)));
}

InstanceReport check_instance(const Instance& inst, int k, Tier tier, std::uint64_t seed) {
  InstanceReport r;
  r.seed = seed;
  r.tier = tier;
  const Vector v_star = joint_value(inst.mdp, inst.induced, k);
  const Vector v = joint_value(inst.mdp, inst.learned, k);
  r.gap = (v_star - v).maxCoeff();
  r.terms = bound_rhs(inst.mdp, inst.learned, inst.induced, k);
  r.bound = r.terms.C;
  r.slack = r.bound - r.gap;
  r.holds = r.gap <= r.bound;
  return r;
}

TheoremReport verify_theorem1(Tier tier, const InstanceParams& p, int n_instances,
                              std::uint64_t seed) {
  require(n_instances >= 1, "verify_theorem1: need at least one instance");
  TheoremReport rep;
  rep.tier = tier;
  rep.instances.resize(n_instances);
  // Instances are independent, each with its own stream.
#pragma omp parallel for schedule(dynamic)
  for (int i = 0; i < n_instances; ++i) {
    const std::uint64_t s = instance_seed(seed, i);
    Rng rng(s);
    const Instance inst =
        tier == Tier::A ? make_tier_a_instance(p, rng) : make_tier_b_instance(p, rng);
    rep.instances[i] = check_instance(inst, p.k, tier, s);
  }
  rep.min_slack = std::numeric_limits<double>::infinity();
  double slack_sum = 0.0;
  for (const auto& r : rep.instances) {
    if (!r.holds) ++rep.violations;
    rep.min_slack = std::min(rep.min_slack, r.slack);
    slack_sum += r.slack;
    rep.max_gap = std::max(rep.max_gap, r.gap);
  }
  rep.mean_slack = slack_sum / n_instances;
  return rep;
}

nlohmann::json to_json(const TheoremReport& report) {
  nlohmann::json instances = nlohmann::json::array();
  for (const auto& r : report.instances) {
    instances.push_back({
        {"seed", r.seed},
        {"gap", r.gap},
        {"bound", json_number(r.bound)},
        {"slack", json_number(r.slack)},
        {"holds", r.holds},
        {"tier", to_string(r.tier)},
        {"eps", r.terms.eps},
        {"ratio", json_number(r.terms.ratio)},
        {"reach_max", r.terms.reach_max},
        {"r_max", r.terms.r_max},
        {"finite", r.terms.finite},
    });
  }
  const bool assert_mode = report.tier == Tier::A;
  return {
      {"tier", to_string(report.tier)},
      {"instances", instances},
      {"summary",
       {{"n_instances", report.instances.size()},
        {"violations", report.violations},
        {"violations_are_failures", assert_mode},
        {"min_slack", json_number(report.min_slack)},
        {"mean_slack", json_number(report.mean_slack)},
        {"max_gap", report.max_gap}}},
  };
}

}  // namespace hrl::oracle
