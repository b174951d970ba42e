#include <catch2/catch_amalgamated.hpp>

#include <random>

#include "petrigame/markov.hpp"
#include "petrigame/mdp.hpp"

using namespace petrigame;

namespace {

SparseMatrix random_chain(std::mt19937& rng, int n) {
  SparseMatrix p(n);
  for (int s = 0; s < n; ++s) {
    const int fan = 1 + static_cast<int>(rng() % 3);
    RatVec weights;
    Rational total = 0;
    for (int k = 0; k < fan; ++k) {
      weights.push_back(Rational(1 + rng() % 4));
      total += weights.back();
    }
    SparseRow row;
    for (int k = 0; k < fan; ++k)
      row.emplace_back(static_cast<int>(rng() % n), weights[k] / total);
    p[s] = normalize_row(std::move(row));
  }
  return p;
}

}  // namespace

TEST_CASE("solve_linear") {
  // 2x + y = 5, x - y = 1  =>  x = 2, y = 1
  const RatVec x = solve_linear({{Rational(2), Rational(1)}, {Rational(1), Rational(-1)}},
                                RatVec{Rational(5), Rational(1)});
  CHECK(x[0] == Rational(2));
  CHECK(x[1] == Rational(1));
  CHECK_THROWS_AS(solve_linear({{Rational(1), Rational(1)}, {Rational(2), Rational(2)}},
                               RatVec{Rational(1), Rational(2)}),
                  Error);
}

TEST_CASE("stationary distribution of a two-state chain") {
  // p(0->1) = 1/3, p(1->0) = 1/2: pi = (3/5, 2/5)
  SparseMatrix p{{{0, Rational(2, 3)}, {1, Rational(1, 3)}},
                 {{0, Rational(1, 2)}, {1, Rational(1, 2)}}};
  const RatVec pi = stationary_distribution(p, {0, 1});
  CHECK(pi[0] == Rational(3, 5));
  CHECK(pi[1] == Rational(2, 5));
}

TEST_CASE("limiting average distribution with transients") {
  // 0 -> 1 or 2 with probability 1/2 each; 1 and 2 absorbing.
  SparseMatrix p{{{1, Rational(1, 2)}, {2, Rational(1, 2)}},
                 {{1, Rational(1)}},
                 {{2, Rational(1)}}};
  const RatVec mu = limiting_average_distribution(p, 0);
  CHECK(mu[0] == Rational(0));
  CHECK(mu[1] == Rational(1, 2));
  CHECK(mu[2] == Rational(1, 2));
}

TEST_CASE("evaluate_chain satisfies the gain/bias equations") {
  std::mt19937 rng(11);
  for (int round = 0; round < 25; ++round) {
    const int n = 2 + static_cast<int>(rng() % 5);
    const SparseMatrix p = random_chain(rng, n);
    RatVec reward(n);
    for (int s = 0; s < n; ++s) reward[s] = Rational(static_cast<int>(rng() % 7) - 3);
    const GainBias gb = evaluate_chain(p, reward);
    for (int s = 0; s < n; ++s) {
      Rational pg = 0, ph = 0;
      for (const auto& [j, q] : p[s]) {
        pg += q * gb.gain[j];
        ph += q * gb.bias[j];
      }
      CHECK(gb.gain[s] == pg);                          // g = P g
      CHECK(gb.gain[s] + gb.bias[s] == reward[s] + ph); // g + h = r + P h
    }
  }
}

TEST_CASE("policy iteration on a two-state decision chain") {
  // State 0: stay (reward 1) or move to 1 (reward 0); state 1: stay with
  // reward 2. Optimal gain from both states is 2.
  Mdp mdp;
  mdp.states.resize(2);
  mdp.states[0].push_back({Rational(1), {{0, Rational(1)}}});
  mdp.states[0].push_back({Rational(0), {{1, Rational(1)}}});
  mdp.states[1].push_back({Rational(2), {{1, Rational(1)}}});
  const AverageRewardSolution sol = solve_average_reward(mdp);
  CHECK(sol.gain[0] == Rational(2));
  CHECK(sol.gain[1] == Rational(2));
  CHECK(sol.policy[0] == 1);
}

TEST_CASE("policy iteration is multichain-safe") {
  // Two disconnected loops with different rewards plus a transient choice.
  Mdp mdp;
  mdp.states.resize(3);
  mdp.states[0].push_back({Rational(0), {{1, Rational(1)}}});
  mdp.states[0].push_back({Rational(0), {{2, Rational(1)}}});
  mdp.states[1].push_back({Rational(1), {{1, Rational(1)}}});
  mdp.states[2].push_back({Rational(3), {{2, Rational(1)}}});
  const AverageRewardSolution sol = solve_average_reward(mdp);
  CHECK(sol.gain[0] == Rational(3));
  CHECK(sol.gain[1] == Rational(1));
  CHECK(sol.gain[2] == Rational(3));
  CHECK(sol.policy[0] == 1);
}

TEST_CASE("policy iteration prefers better transient rewards at equal gain") {
  // Both actions end in the same zero-reward loop; action 1 collects 5 on
  // the way. Gains tie at 0, bias breaks the tie.
  Mdp mdp;
  mdp.states.resize(2);
  mdp.states[0].push_back({Rational(0), {{1, Rational(1)}}});
  mdp.states[0].push_back({Rational(5), {{1, Rational(1)}}});
  mdp.states[1].push_back({Rational(0), {{1, Rational(1)}}});
  const AverageRewardSolution sol = solve_average_reward(mdp);
  CHECK(sol.policy[0] == 1);
  CHECK(sol.gain[0] == Rational(0));
}
