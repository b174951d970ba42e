#include <catch2/catch_amalgamated.hpp>

#include "petrigame/corpus.hpp"
#include "petrigame/fixtures.hpp"
#include "petrigame/statespace.hpp"

using namespace petrigame;

TEST_CASE("explore N1") {
  const AnnotatedNet a = fixtures::n1();
  const StateSpace ss = explore(a);
  REQUIRE(ss.states.size() == 4);
  CHECK(ss.states[0] == marking_of(a.net(), {"p0"}));
  CHECK(ss.index_of(marking_of(a.net(), {"p3"})) >= 0);
  // Only {p3} is final.
  int finals = 0;
  for (std::size_t s = 0; s < ss.states.size(); ++s)
    if (ss.final_state[s]) {
      ++finals;
      CHECK(ss.states[s] == marking_of(a.net(), {"p3"}));
    }
  CHECK(finals == 1);
}

TEST_CASE("explore is deterministic") {
  const AnnotatedNet a = fixtures::order_to_cash();
  const StateSpace first = explore(a);
  const StateSpace second = explore(a);
  CHECK(first.states == second.states);
  CHECK(first.edges == second.edges);
}

TEST_CASE("explore single transition and empty-transition nets") {
  PetriNet single({"i", "o"}, {{"t", {"i"}, {"o"}}});
  const AnnotatedNet a(single, marking_of(single, {"i"}), {}, {}, {});
  CHECK(explore(a).states.size() == 2);

  PetriNet bare({"i"}, {});
  const AnnotatedNet b(bare, marking_of(bare, {"i"}), {}, {}, {});
  CHECK(explore(b).states.size() == 1);
  CHECK(is_safe(b));
}

TEST_CASE("two-producer net is unsafe") {
  PetriNet net({"i", "x", "y"}, {{"t0", {"i"}, {"x", "y"}}, {"t1", {"x"}, {"y"}}});
  const AnnotatedNet a(net, marking_of(net, {"i"}), {}, {}, {});
  CHECK_THROWS_AS(explore(a), SafetyViolation);
  CHECK_FALSE(is_safe(a));
  CHECK(is_safe(fixtures::n1()));
}

TEST_CASE("state bound") {
  const AnnotatedNet a = fixtures::n1();
  CHECK_THROWS_AS(explore(a, 2), StateSpaceExceeded);
  CHECK(explore(a, 4).states.size() == 4);
}

TEST_CASE("soundness of W1") {
  const AnnotatedNet a = fixtures::w1();
  const auto shape = structural_checks(a).workflow;
  REQUIRE(shape.has_value());
  const SoundnessReport r = check_soundness(a, *shape);
  CHECK(r.option_to_complete);
  CHECK(r.proper_completion);
  CHECK(r.no_dead_transitions);
  CHECK(r.sound);
}

TEST_CASE("soundness of W2: dead transition") {
  const AnnotatedNet a = fixtures::w2();
  const auto shape = structural_checks(a).workflow;
  REQUIRE(shape.has_value());
  const SoundnessReport r = check_soundness(a, *shape);
  CHECK(r.option_to_complete);
  CHECK(r.proper_completion);
  CHECK_FALSE(r.no_dead_transitions);
  CHECK_FALSE(r.sound);
  REQUIRE(r.dead_transitions.size() == 1);
  CHECK(a.net().transition_id(r.dead_transitions[0]) == "t_b");
}

TEST_CASE("soundness of the single-transition workflow") {
  PetriNet net({"i", "o"}, {{"t", {"i"}, {"o"}}});
  const AnnotatedNet a(net, marking_of(net, {"i"}), {}, {}, {});
  const auto shape = structural_checks(a).workflow;
  REQUIRE(shape.has_value());
  CHECK(check_soundness(a, *shape).sound);
}

TEST_CASE("soundness witnesses") {
  // Improper completion: a token keeps circulating next to o.
  PetriNet net({"i", "x", "y", "o"},
               {{"t", {"i"}, {"o", "x"}}, {"u", {"x"}, {"y"}}, {"v", {"y"}, {"x"}}});
  const AnnotatedNet a(net, marking_of(net, {"i"}), {}, {}, {});
  const auto shape = structural_checks(a).workflow;
  REQUIRE(shape.has_value());
  const SoundnessReport r = check_soundness(a, *shape);
  CHECK_FALSE(r.sound);
  CHECK_FALSE(r.option_to_complete);
  CHECK_FALSE(r.proper_completion);
  CHECK(!r.pc_witnesses.empty());
  CHECK(r.no_dead_transitions);
}

TEST_CASE("final states of sound corpus nets are exactly the final marking") {
  for (const auto& entry : corpus::theorem_corpus()) {
    const auto shape = structural_checks(entry.net).workflow;
    REQUIRE(shape.has_value());
    const SoundnessReport r = check_soundness(entry.net, *shape);
    if (!r.sound) continue;
    const StateSpace ss = explore(entry.net);
    int finals = 0;
    for (std::size_t s = 0; s < ss.states.size(); ++s)
      if (ss.final_state[s]) {
        ++finals;
        CHECK(ss.states[s] == Marking{{shape->final_place}});
      }
    CHECK(finals == 1);
  }
}

TEST_CASE("check_soundness requires the marked initial place") {
  const AnnotatedNet a = fixtures::w1();
  WorkflowShape wrong{a.net().place_index("p1"), a.net().place_index("p3")};
  CHECK_THROWS_AS(check_soundness(a, wrong), NotAWorkflowNet);
}
