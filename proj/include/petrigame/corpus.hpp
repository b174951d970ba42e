#pragma once

#include <string>
#include <vector>

#include "petrigame/annotations.hpp"
#include "petrigame/petri.hpp"

namespace petrigame::corpus {

struct CorpusEntry {
  std::string name;
  AnnotatedNet net;        // single role, unit utilities
  std::string defect;      // empty when generated sound
};

namespace detail {

inline CorpusEntry entry(std::string name, PetriNet net, std::string defect = "") {
  const Marking initial = marking_of(net, {"i"});
  return CorpusEntry{std::move(name), unit_annotation(net, initial), std::move(defect)};
}

/// i -> u1 -> s1 -> ... -> uk -> o
inline PetriNet chain_net(int k) {
  std::vector<std::string> places{"i", "o"};
  std::vector<TransitionSpec> transitions;
  std::string previous = "i";
  for (int j = 1; j <= k; ++j) {
    const std::string target = j == k ? "o" : "s" + std::to_string(j);
    if (target != "o") places.push_back(target);
    transitions.push_back({"u" + std::to_string(j), {previous}, {target}});
    previous = target;
  }
  return PetriNet(places, transitions);
}

/// i branches into b conflict-sharing alternatives, each a short path to o.
inline PetriNet choice_net(int branches, bool long_branches) {
  std::vector<std::string> places{"i", "o"};
  std::vector<TransitionSpec> transitions;
  for (int j = 1; j <= branches; ++j) {
    const std::string mid = "m" + std::to_string(j);
    places.push_back(mid);
    transitions.push_back({"pick" + std::to_string(j), {"i"}, {mid}});
    if (long_branches) {
      const std::string late = "n" + std::to_string(j);
      places.push_back(late);
      transitions.push_back({"work" + std::to_string(j), {mid}, {late}});
      transitions.push_back({"done" + std::to_string(j), {late}, {"o"}});
    } else {
      transitions.push_back({"done" + std::to_string(j), {mid}, {"o"}});
    }
  }
  return PetriNet(places, transitions);
}

/// Rework loop: progress to a review place, then redo or accept.
inline PetriNet loop_net(int lead_in) {
  std::vector<std::string> places{"i", "work", "review", "o"};
  std::vector<TransitionSpec> transitions;
  std::string previous = "i";
  for (int j = 1; j <= lead_in; ++j) {
    const std::string target = j == lead_in ? "work" : "l" + std::to_string(j);
    if (target != "work") places.push_back(target);
    transitions.push_back({"lead" + std::to_string(j), {previous}, {target}});
    previous = target;
  }
  transitions.push_back({"do", {"work"}, {"review"}});
  transitions.push_back({"redo", {"review"}, {"work"}});
  transitions.push_back({"accept", {"review"}, {"o"}});
  return PetriNet(places, transitions);
}

/// Fork into b concurrent branches, then join. Optional self-loop rework on
/// the first branch keeps the net extended free choice.
inline PetriNet parallel_net(int branches, bool rework, bool tail) {
  std::vector<std::string> places{"i"};
  std::vector<TransitionSpec> transitions;
  std::vector<std::string> fork_targets;
  std::vector<std::string> join_sources;
  for (int j = 1; j <= branches; ++j) {
    const std::string x = "x" + std::to_string(j);
    const std::string y = "y" + std::to_string(j);
    places.push_back(x);
    places.push_back(y);
    fork_targets.push_back(x);
    join_sources.push_back(y);
    transitions.push_back({"work" + std::to_string(j), {x}, {y}});
  }
  if (rework) transitions.push_back({"retry1", {"x1"}, {"x1"}});
  transitions.push_back({"split", {"i"}, fork_targets});
  if (tail) {
    places.push_back("t");
    places.push_back("o");
    transitions.push_back({"join", join_sources, {"t"}});
    transitions.push_back({"wrap", {"t"}, {"o"}});
  } else {
    places.push_back("o");
    transitions.push_back({"join", join_sources, {"o"}});
  }
  return PetriNet(places, transitions);
}

/// Choice where one branch detours through an extra stage before rejoining.
inline PetriNet choice_with_detour() {
  return PetriNet({"i", "m1", "m2", "o"}, {{"go1", {"i"}, {"m1"}},
                                           {"go2", {"i"}, {"m2"}},
                                           {"detour", {"m2"}, {"m1"}},
                                           {"finish", {"m1"}, {"o"}}});
}

/// Dead transition hanging off an unmarked place, W2-style.
inline PetriNet dead_branch_net() {
  return PetriNet({"i", "m", "o", "q"}, {{"go", {"i"}, {"m"}},
                                         {"finish", {"m"}, {"o"}},
                                         {"ghost", {"q"}, {"m"}}});
}

/// A join whose second input place can never be marked: the first branch
/// deadlocks in front of it and the join is dead.
inline PetriNet starved_join_net() {
  return PetriNet({"i", "p", "q", "o"},
                  {{"go", {"i"}, {"p"}}, {"join", {"p", "q"}, {"o"}}});
}

/// Choice between completing and entering a cycle with no exit.
inline PetriNet livelock_net(int lead_in) {
  std::vector<std::string> places{"i", "g", "c1", "c2", "o"};
  std::vector<TransitionSpec> transitions;
  std::string branch_point = "i";
  for (int j = 1; j <= lead_in; ++j) {
    const std::string target = "b" + std::to_string(j);
    places.push_back(target);
    transitions.push_back({"lead" + std::to_string(j), {branch_point}, {target}});
    branch_point = target;
  }
  transitions.push_back({"good", {branch_point}, {"g"}});
  transitions.push_back({"trap", {branch_point}, {"c1"}});
  transitions.push_back({"finish", {"g"}, {"o"}});
  transitions.push_back({"spin1", {"c1"}, {"c2"}});
  transitions.push_back({"spin2", {"c2"}, {"c1"}});
  return PetriNet(places, transitions);
}

/// Choice between completing and a branch that starves in front of a join.
inline PetriNet deadlock_choice_net() {
  return PetriNet({"i", "g", "c", "q", "o"}, {{"good", {"i"}, {"g"}},
                                              {"finish", {"g"}, {"o"}},
                                              {"trap", {"i"}, {"c"}},
                                              {"join", {"c", "q"}, {"o"}}});
}

/// Completion leaves a token behind that keeps circulating: the final place
/// gets marked together with a second token, so completion is improper.
inline PetriNet improper_net(bool long_cycle) {
  std::vector<std::string> places{"i", "x", "y", "o"};
  std::vector<TransitionSpec> transitions{{"t", {"i"}, {"o", "x"}},
                                          {"u", {"x"}, {"y"}}};
  if (long_cycle) {
    places.push_back("z");
    transitions.push_back({"v", {"y"}, {"z"}});
    transitions.push_back({"w", {"z"}, {"x"}});
  } else {
    transitions.push_back({"v", {"y"}, {"x"}});
  }
  return PetriNet(places, transitions);
}

}  // namespace detail

/// Deterministic desk-scale corpus of safe extended-free-choice elementary
/// workflow nets with a single unit-utility role: the test bed for the
/// soundness characterization. Defect labels record the generator's intent;
/// the checks recompute everything.
inline std::vector<CorpusEntry> theorem_corpus() {
  using namespace detail;
  std::vector<CorpusEntry> out;
  for (int k = 1; k <= 5; ++k)
    out.push_back(entry("chain-" + std::to_string(k), chain_net(k)));
  out.push_back(entry("choice-2", choice_net(2, false)));
  out.push_back(entry("choice-3", choice_net(3, false)));
  out.push_back(entry("choice-2-long", choice_net(2, true)));
  out.push_back(entry("choice-3-long", choice_net(3, true)));
  out.push_back(entry("loop-1", loop_net(1)));
  out.push_back(entry("loop-3", loop_net(3)));
  out.push_back(entry("choice-detour", choice_with_detour()));
  out.push_back(entry("parallel-2", parallel_net(2, false, false)));
  out.push_back(entry("parallel-3", parallel_net(3, false, false)));
  out.push_back(entry("parallel-2-rework", parallel_net(2, true, false)));
  out.push_back(entry("parallel-2-tail", parallel_net(2, false, true)));

  out.push_back(entry("dead-branch", dead_branch_net(), "dead-transition"));
  out.push_back(entry("starved-join", starved_join_net(), "dead-transition"));
  out.push_back(entry("livelock-0", livelock_net(0), "no-option-to-complete"));
  out.push_back(entry("livelock-2", livelock_net(2), "no-option-to-complete"));
  out.push_back(entry("deadlock-choice", deadlock_choice_net(), "deadlock"));
  out.push_back(entry("improper-short", improper_net(false), "improper-completion"));
  out.push_back(entry("improper-long", improper_net(true), "improper-completion"));
  out.push_back(entry("dead-on-loop", PetriNet({"i", "p1", "p2", "o", "z"},
                                               {{"a", {"i"}, {"p1"}},
                                                {"b", {"p1"}, {"p2"}},
                                                {"c", {"p2"}, {"p1"}},
                                                {"d", {"p2"}, {"o"}},
                                                {"e", {"z"}, {"p1"}}}),
                      "dead-transition"));
  return out;
}

}  // namespace petrigame::corpus
