#include <catch2/catch_amalgamated.hpp>

#include "petrigame/corpus.hpp"
#include "petrigame/fixtures.hpp"
#include "petrigame/game.hpp"

using namespace petrigame;

namespace {

Step step(const StochasticGame& g, const std::vector<std::string>& ids) {
  return step_of(g.net(), ids);
}

int state(const StochasticGame& g, const std::vector<std::string>& places) {
  const int s = g.state_index(marking_of(g.net(), places));
  REQUIRE(s >= 0);
  return s;
}

void check_rows_stochastic(const StochasticGame& g) {
  for (int s = 0; s < g.state_count(); ++s)
    for (const Step& profile : g.available_profiles(s)) {
      CHECK(row_sum(g.probability_row(s, profile)) == Rational(1));
    }
}

}  // namespace

TEST_CASE("maximal enabled sub-steps") {
  const auto games = fixtures::build_games(fixtures::n1());
  const StochasticGame& g = games.base;
  const int p2 = state(g, {"p2"});
  const auto subs = g.maximal_enabled_substeps(p2, step(g, {"t'", "t1"}));
  REQUIRE(subs.size() == 2);
  CHECK(std::find(subs.begin(), subs.end(), step(g, {"t'"})) != subs.end());
  CHECK(std::find(subs.begin(), subs.end(), step(g, {"t1"})) != subs.end());

  CHECK(g.maximal_enabled_substeps(state(g, {"p0"}), Step{}) == std::vector<Step>{Step{}});

  // At p1 the class {t', t1} intersects the step but t' is not enabled.
  CHECK(g.maximal_enabled_substeps(state(g, {"p1"}), step(g, {"t", "t'"})).empty());
}

TEST_CASE("fair-conflict transition probabilities") {
  const auto games = fixtures::build_games(fixtures::n1());
  const StochasticGame& base = games.base;
  const int p2 = state(base, {"p2"});
  CHECK(base.transition_probability(p2, step(base, {"t'", "t1"}), state(base, {"p1"})) ==
        Rational(1, 2));
  CHECK(base.transition_probability(p2, step(base, {"t'", "t1"}), state(base, {"p3"})) ==
        Rational(1, 2));
  const int p0 = state(base, {"p0"});
  CHECK(base.transition_probability(p0, Step{}, p0) == Rational(1));
}

TEST_CASE("base game construction") {
  const auto games = fixtures::build_games(fixtures::n1());
  const StochasticGame& g = games.base;
  CHECK(g.state_count() == 4);
  CHECK(g.player_count() == 4);
  CHECK(g.player_name(g.nature_player()) == "nature");
  const int p2 = state(g, {"p2"});
  CHECK(g.available_actions(p2, g.player_index("a")) ==
        std::vector<int>{StochasticGame::kIdleAction, g.net().transition_index("t1")});
  CHECK(g.available_actions(p2, g.player_index("c")) ==
        std::vector<int>{StochasticGame::kIdleAction, g.net().transition_index("t'")});
  CHECK(g.available_actions(p2, g.player_index("b")) ==
        std::vector<int>{StochasticGame::kIdleAction});

  // Final state {p3}: only idling, with a self-loop.
  const int p3 = state(g, {"p3"});
  for (int player = 0; player < g.player_count(); ++player)
    CHECK(g.available_actions(p3, player) == std::vector<int>{StochasticGame::kIdleAction});
  CHECK(g.transition_probability(p3, Step{}, p3) == Rational(1));

  const RatVec payoff = g.payoff(step(g, {"t1", "t'"}));
  CHECK(payoff[g.player_index("a")] == Rational(2));
  CHECK(payoff[g.player_index("b")] == Rational(0));
  CHECK(payoff[g.player_index("c")] == Rational(3));
  CHECK(payoff[g.nature_player()] == Rational(0));
}

TEST_CASE("expected stage payoff averages the fired sub-step") {
  const auto games = fixtures::build_games(fixtures::n1());
  const StochasticGame& g = games.base;
  const int p2 = state(g, {"p2"});
  const RatVec psi = g.expected_stage_payoff(p2, step(g, {"t1", "t'"}));
  CHECK(psi[g.player_index("a")] == Rational(1));
  CHECK(psi[g.player_index("b")] == Rational(0));
  CHECK(psi[g.player_index("c")] == Rational(3, 2));
  // Without conflicts the two payoff views coincide.
  const int p0 = state(g, {"p0"});
  CHECK(g.expected_stage_payoff(p0, step(g, {"t0"})) == g.payoff(step(g, {"t0"})));
}

TEST_CASE("restart game") {
  const auto games = fixtures::build_games(fixtures::n1());
  const StochasticGame& r = games.restart;
  CHECK(r.state_count() == 3);
  CHECK(r.state_index(marking_of(r.net(), {"p3"})) == -1);
  const int p2 = state(r, {"p2"});
  const int p0 = state(r, {"p0"});
  const int p1 = state(r, {"p1"});
  CHECK(r.transition_probability(p2, step(r, {"t1"}), p0) == Rational(1));
  CHECK(r.transition_probability(p2, step(r, {"t1", "t'"}), p0) == Rational(1, 2));
  CHECK(r.transition_probability(p2, step(r, {"t1", "t'"}), p1) == Rational(1, 2));
}

TEST_CASE("restart of a game without final states is identical") {
  // alice_bob minus the possibility of finishing: a two-place loop.
  PetriNet net({"x", "y"}, {{"go", {"x"}, {"y"}}, {"back", {"y"}, {"x"}}});
  const AnnotatedNet a(net, marking_of(net, {"x"}), {}, {}, {});
  const auto games = fixtures::build_games(a);
  CHECK(games.restart.state_count() == games.base.state_count());
  for (int s = 0; s < games.base.state_count(); ++s) {
    CHECK(games.restart.state(s) == games.base.state(s));
    for (const Step& profile : games.base.available_profiles(s))
      CHECK(games.restart.probability_row(s, profile) ==
            games.base.probability_row(s, profile));
  }
}

TEST_CASE("restart needs a non-final initial marking") {
  PetriNet net({"i", "o", "q"}, {{"t", {"q"}, {"o"}}});
  const AnnotatedNet a(net, marking_of(net, {"i"}), {}, {}, {});
  const auto space = explore(a);
  const StochasticGame base = build_base_game(std::make_shared<const AnnotatedNet>(a), space);
  CHECK_THROWS_AS(build_restart_game(base), InitialIsFinal);
}

TEST_CASE("row stochasticity of N1 games") {
  const auto games = fixtures::build_games(fixtures::n1());
  check_rows_stochastic(games.base);
  check_rows_stochastic(games.restart);
}

TEST_CASE("restart conservation") {
  const auto games = fixtures::build_games(fixtures::n1());
  const StochasticGame& base = games.base;
  const StochasticGame& restart = games.restart;
  for (int s = 0; s < restart.state_count(); ++s) {
    const int base_state = base.state_index(restart.state(s));
    for (const Step& profile : restart.available_profiles(s))
      CHECK(row_sum(restart.probability_row(s, profile)) ==
            row_sum(base.probability_row(base_state, profile)));
  }
}

TEST_CASE("sub-step count formula") {
  const auto games = fixtures::build_games(fixtures::alice_bob());
  const StochasticGame& g = games.base;
  const int s0 = state(g, {"a0", "b0"});
  // bob_work and alice_work sit in different classes: 1 * 1 sub-steps.
  CHECK(g.maximal_enabled_substeps(s0, step(g, {"bob_work", "alice_work"})).size() == 1);
  // (bob_work|bob_surf) x (alice_work|alice_fish): 2 * 2 = 4.
  CHECK(g.maximal_enabled_substeps(
             s0, step(g, {"bob_work", "bob_surf", "alice_work", "alice_fish"}))
            .size() == 4);
}

TEST_CASE("inadmissible steps have zero rows") {
  const auto games = fixtures::build_games(fixtures::n1());
  const StochasticGame& g = games.base;
  // t' is not enabled at p1, so the row for {t'} from p1 sums to zero.
  CHECK(row_sum(g.probability_row(state(g, {"p1"}), step(g, {"t'"}))) == Rational(0));
}

TEST_CASE("payoff tables are state-independent") {
  const auto games = fixtures::build_games(fixtures::n1());
  const StochasticGame& g = games.base;
  const Step s = step(g, {"t0"});
  const RatVec u = g.payoff(s);
  for (int other = 0; other < g.state_count(); ++other) CHECK(g.payoff(s) == u);
  // The expected stage payoff is state-independent across states where the
  // step is fully enabled.
  const Step conflicted = step(g, {"t1", "t'"});
  const int p2 = state(g, {"p2"});
  CHECK(g.expected_stage_payoff(p2, conflicted) ==
        games.restart.expected_stage_payoff(
            games.restart.state_index(marking_of(g.net(), {"p2"})), conflicted));
}

TEST_CASE("row stochasticity across the theorem corpus") {
  for (const auto& entry : corpus::theorem_corpus()) {
    const auto games = fixtures::build_games(entry.net);
    check_rows_stochastic(games.base);
    check_rows_stochastic(games.restart);
  }
}
