#pragma once

#include <set>
#include <vector>

#include "petrigame/errors.hpp"
#include "petrigame/markov.hpp"
#include "petrigame/rational.hpp"

namespace petrigame {

struct MdpAction {
  Rational reward;
  SparseRow transitions;  // must sum to 1
};

/// Finite average-reward MDP; every state has at least one action.
struct Mdp {
  std::vector<std::vector<MdpAction>> states;
};

struct AverageRewardSolution {
  RatVec gain;
  RatVec bias;
  std::vector<int> policy;
  int iterations = 0;
};

/// Multichain policy iteration with gain/bias ordering, exact arithmetic.
/// Improvement is conservative: an action switch needs a strict improvement
/// in reachable gain, or, among gain-maximizers, in bias; ties keep the
/// incumbent. Finite convergence; a policy-set check guards against cycling
/// regardless.
inline AverageRewardSolution solve_average_reward(const Mdp& mdp, int max_iterations = 10'000) {
  const int n = static_cast<int>(mdp.states.size());
  for (const auto& actions : mdp.states)
    if (actions.empty()) throw Error("MDP state without actions");
  AverageRewardSolution sol;
  sol.policy.assign(n, 0);
  std::set<std::vector<int>> seen;

  for (int iter = 1; iter <= max_iterations; ++iter) {
    sol.iterations = iter;
    if (!seen.insert(sol.policy).second)
      throw SolverNonconvergence("policy iteration revisited a policy");

    SparseMatrix p(n);
    RatVec reward(n);
    for (int s = 0; s < n; ++s) {
      p[s] = mdp.states[s][sol.policy[s]].transitions;
      reward[s] = mdp.states[s][sol.policy[s]].reward;
    }
    const GainBias gb = evaluate_chain(p, reward);

    bool improved = false;
    for (int s = 0; s < n; ++s) {
      const int current = sol.policy[s];
      const int action_count = static_cast<int>(mdp.states[s].size());
      RatVec gval(action_count);
      for (int a = 0; a < action_count; ++a) {
        Rational v = 0;
        for (const auto& [target, prob] : mdp.states[s][a].transitions)
          v += prob * gb.gain[target];
        gval[a] = v;
      }
      Rational gmax = gval[0];
      for (int a = 1; a < action_count; ++a)
        if (gval[a] > gmax) gmax = gval[a];
      if (gval[current] < gmax) {
        for (int a = 0; a < action_count; ++a)
          if (gval[a] == gmax) {
            sol.policy[s] = a;
            break;
          }
        improved = true;
        continue;
      }
      std::vector<std::pair<int, Rational>> hval;  // gain-maximizers only
      for (int a = 0; a < action_count; ++a) {
        if (gval[a] != gmax) continue;
        Rational v = mdp.states[s][a].reward;
        for (const auto& [target, prob] : mdp.states[s][a].transitions)
          v += prob * gb.bias[target];
        hval.emplace_back(a, v);
      }
      Rational hcur;
      Rational hmax = hval.front().second;
      for (const auto& [a, v] : hval) {
        if (a == current) hcur = v;
        if (v > hmax) hmax = v;
      }
      if (hmax > hcur) {
        for (const auto& [a, v] : hval)
          if (v == hmax) {
            sol.policy[s] = a;
            break;
          }
        improved = true;
      }
    }
    if (!improved) {
      sol.gain = gb.gain;
      sol.bias = gb.bias;
      return sol;
    }
  }
  throw SolverNonconvergence("policy iteration hit the iteration cap");
}

}  // namespace petrigame
