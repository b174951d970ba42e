#pragma once

#include <cstddef>
#include <deque>
#include <map>
#include <string>
#include <vector>

#include "petrigame/errors.hpp"
#include "petrigame/petri.hpp"

namespace petrigame {

inline constexpr std::size_t kDefaultStateBound = 1'000'000;

/// Reachability graph over safe markings. Edges carry singleton steps;
/// multi-transition steps are synthesized on demand by the game module.
struct StateSpace {
  std::vector<Marking> states;  // BFS discovery order, states[0] = initial
  // Per state: (transition, target state) pairs in ascending transition order.
  std::vector<std::vector<std::pair<int, int>>> edges;
  std::vector<bool> final_state;  // marking disjoint from every pre-set
  int initial = 0;

  int index_of(const Marking& m) const {
    const auto it = index_.find(m);
    return it == index_.end() ? -1 : it->second;
  }

  std::map<Marking, int> index_;
};

inline bool is_final_marking(const PetriNet& net, const Marking& m) {
  for (int t = 0; t < net.transition_count(); ++t) {
    std::vector<int> common;
    std::set_intersection(m.places.begin(), m.places.end(), net.pre(t).begin(),
                          net.pre(t).end(), std::back_inserter(common));
    if (!common.empty()) return false;
  }
  return true;
}

/// Breadth-first closure of the initial marking under single-transition
/// firing. Deterministic: successors are expanded in transition order.
inline StateSpace explore(const AnnotatedNet& a, std::size_t bound = kDefaultStateBound) {
  if (bound < 1) throw Error("state bound must be at least 1");
  const PetriNet& net = a.net();
  StateSpace ss;
  ss.states.push_back(a.initial());
  ss.index_[a.initial()] = 0;
  std::deque<int> frontier{0};
  while (!frontier.empty()) {
    const int s = frontier.front();
    frontier.pop_front();
    std::vector<std::pair<int, int>> out;
    for (int t : enabled(net, ss.states[s])) {
      const Marking next = fire_step(net, ss.states[s], Step{{t}});
      int target = ss.index_of(next);
      if (target < 0) {
        if (ss.states.size() >= bound)
          throw StateSpaceExceeded("state space exceeds bound of " + std::to_string(bound));
        target = static_cast<int>(ss.states.size());
        ss.states.push_back(next);
        ss.index_[next] = target;
        frontier.push_back(target);
      }
      out.emplace_back(t, target);
    }
    ss.edges.resize(ss.states.size());
    ss.edges[s] = std::move(out);
  }
  ss.edges.resize(ss.states.size());
  ss.final_state.resize(ss.states.size());
  for (std::size_t s = 0; s < ss.states.size(); ++s)
    ss.final_state[s] = is_final_marking(net, ss.states[s]);
  return ss;
}

/// True iff exploration completes without a safety violation.
inline bool is_safe(const AnnotatedNet& a, std::size_t bound = kDefaultStateBound) {
  try {
    explore(a, bound);
    return true;
  } catch (const SafetyViolation&) {
    return false;
  }
}

struct SoundnessReport {
  bool option_to_complete = false;
  bool proper_completion = false;
  bool no_dead_transitions = false;
  bool sound = false;
  std::vector<Marking> otc_witnesses;   // markings from which [o] is unreachable
  std::vector<Marking> pc_witnesses;    // reachable markings covering o, != [o]
  std::vector<int> dead_transitions;    // never enabled at a reachable marking
  std::size_t state_count = 0;
};

/// The classical three soundness conditions over the reachability graph.
/// Reachability of [o] from every state is decided by one backward traversal
/// from [o] over the edge relation.
inline SoundnessReport check_soundness(const AnnotatedNet& a, const WorkflowShape& shape,
                                       std::size_t bound = kDefaultStateBound) {
  if (a.initial().places != std::vector<int>{shape.initial_place})
    throw NotAWorkflowNet("initial marking must consist of the initial place");
  const StateSpace ss = explore(a, bound);
  const PetriNet& net = a.net();
  SoundnessReport report;
  report.state_count = ss.states.size();

  const Marking final_marking{{shape.final_place}};
  const int final_index = ss.index_of(final_marking);

  // Backward reachability from [o].
  std::vector<bool> can_complete(ss.states.size(), false);
  if (final_index >= 0) {
    std::vector<std::vector<int>> reverse(ss.states.size());
    for (std::size_t s = 0; s < ss.states.size(); ++s)
      for (const auto& [t, target] : ss.edges[s]) reverse[target].push_back(static_cast<int>(s));
    std::deque<int> queue{final_index};
    can_complete[final_index] = true;
    while (!queue.empty()) {
      const int s = queue.front();
      queue.pop_front();
      for (int p : reverse[s])
        if (!can_complete[p]) {
          can_complete[p] = true;
          queue.push_back(p);
        }
    }
  }
  report.option_to_complete = true;
  for (std::size_t s = 0; s < ss.states.size(); ++s)
    if (!can_complete[s]) {
      report.option_to_complete = false;
      report.otc_witnesses.push_back(ss.states[s]);
    }

  report.proper_completion = true;
  for (const Marking& m : ss.states)
    if (m.contains(shape.final_place) && m != final_marking) {
      report.proper_completion = false;
      report.pc_witnesses.push_back(m);
    }

  std::vector<bool> fired(net.transition_count(), false);
  for (const auto& out : ss.edges)
    for (const auto& [t, target] : out) fired[t] = true;
  report.no_dead_transitions = true;
  for (int t = 0; t < net.transition_count(); ++t)
    if (!fired[t]) {
      report.no_dead_transitions = false;
      report.dead_transitions.push_back(t);
    }

  report.sound =
      report.option_to_complete && report.proper_completion && report.no_dead_transitions;
  return report;
}

}  // namespace petrigame
