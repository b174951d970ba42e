#pragma once

#include <deque>
#include <map>
#include <optional>
#include <string>
#include <tuple>
#include <utility>
#include <vector>

#include "petrigame/device.hpp"
#include "petrigame/errors.hpp"
#include "petrigame/game.hpp"
#include "petrigame/mdp.hpp"
#include "petrigame/statespace.hpp"
#include "petrigame/strategy.hpp"

namespace petrigame {

inline const Rational kDefaultEpsilon = Rational(1, 1'000'000);

struct DeviationGain {
  int player = -1;
  Rational best_response_value;
  Rational profile_value;
  Rational gain;  // best_response_value - profile_value, never negative
};

namespace detail {

/// Decision process of one deviating player against the profile of the
/// others: states are (game state, device state, emitted signal vector),
/// which is exactly the deviator's knowledge under a trivial or publicly
/// broadcast device.
struct BestResponseMdp {
  Mdp mdp;
  struct Node {
    int state;
    int device_state;
    int emission_index;
    bool operator<(const Node& o) const {
      return std::tie(state, device_state, emission_index) <
             std::tie(o.state, o.device_state, o.emission_index);
    }
  };
  std::vector<Node> nodes;
  std::map<Node, int> index;
  std::vector<std::vector<int>> node_actions;  // action encoding per node (idle = -1)
  int start_state = 0;                         // game state the start nodes share
};

inline std::vector<std::pair<Step, Rational>> others_support(const StochasticGame& game,
                                                             const StrategyProfile& profile,
                                                             int deviator, int state,
                                                             const SignalVector& m) {
  std::vector<const ActionDistribution*> dists;
  std::vector<int> players;
  for (int player = 0; player < game.player_count(); ++player) {
    if (player == deviator) continue;
    players.push_back(player);
    dists.push_back(&profile.action_distribution(player, state, m[player]));
  }
  std::vector<std::pair<Step, Rational>> out;
  std::vector<std::size_t> pick(dists.size(), 0);
  while (true) {
    Rational joint = 1;
    std::vector<int> members;
    for (std::size_t i = 0; i < dists.size(); ++i) {
      const auto& [action, p] = dists[i]->mass[pick[i]];
      joint *= p;
      if (action != StochasticGame::kIdleAction) members.push_back(action);
    }
    if (joint != 0) {
      std::sort(members.begin(), members.end());
      out.emplace_back(Step{std::move(members)}, joint);
    }
    std::size_t i = dists.size();
    bool done = true;
    while (i > 0) {
      --i;
      if (++pick[i] < dists[i]->mass.size()) {
        done = false;
        break;
      }
      pick[i] = 0;
    }
    if (done) break;
  }
  return out;
}

inline BestResponseMdp build_best_response_mdp(const StochasticGame& game,
                                               const CorrelationDevice& device,
                                               const StrategyProfile& profile, int deviator,
                                               int start) {
  if (!profile.stationary())
    throw NonStationaryStrategy("best response needs a stationary profile");
  if (!device.is_trivial() && !device.is_public_broadcast())
    throw UnsupportedDevice(
        "exact best response supports trivial or publicly-broadcast devices only; "
        "use the heuristic deviation estimator for private signals");

  BestResponseMdp br;
  br.start_state = start;
  const int e0 = device.start_state();
  for (std::size_t mi = 0; mi < device.emission(e0).size(); ++mi) {
    if (device.emission(e0)[mi].second == 0) continue;
    const BestResponseMdp::Node node{start, e0, static_cast<int>(mi)};
    br.index[node] = static_cast<int>(br.nodes.size());
    br.nodes.push_back(node);
  }
  for (std::size_t at = 0; at < br.nodes.size(); ++at) {
    const auto node = br.nodes[at];
    const SignalVector& m = device.emission(node.device_state)[node.emission_index].first;
    const int e2 = device.successor(node.device_state, m);
    const auto folded = others_support(game, profile, deviator, node.state, m);
    std::vector<MdpAction> actions;
    std::vector<int> encodings;
    for (int a : game.available_actions(node.state, deviator)) {
      MdpAction action;
      action.reward = 0;
      SparseRow row;
      for (const auto& [others, w] : folded) {
        std::vector<int> members = others.transitions;
        if (a != StochasticGame::kIdleAction) {
          members.push_back(a);
          std::sort(members.begin(), members.end());
        }
        const Step step{std::move(members)};
        action.reward += w * game.expected_stage_payoff(node.state, step)[deviator];
        for (const auto& [target, q] : game.probability_row(node.state, step)) {
          for (std::size_t mi = 0; mi < device.emission(e2).size(); ++mi) {
            const Rational pm = device.emission(e2)[mi].second;
            if (pm == 0) continue;
            const BestResponseMdp::Node succ{target, e2, static_cast<int>(mi)};
            auto it = br.index.find(succ);
            int idx;
            if (it == br.index.end()) {
              idx = static_cast<int>(br.nodes.size());
              br.index[succ] = idx;
              br.nodes.push_back(succ);
            } else {
              idx = it->second;
            }
            row.emplace_back(idx, w * q * pm);
          }
        }
      }
      action.transitions = normalize_row(std::move(row));
      actions.push_back(std::move(action));
      encodings.push_back(a);
    }
    br.mdp.states.push_back(std::move(actions));
    br.node_actions.push_back(std::move(encodings));
  }
  return br;
}

}  // namespace detail

struct BestResponse {
  DeviationGain gain;
  /// The optimal pure stationary policy, foldable to a (state, signal)
  /// strategy only under a trivial device.
  std::optional<StationaryStrategy> strategy;
  int solver_iterations = 0;
};

/// Exact best-response gain of one player against a stationary profile,
/// evaluated from the given start state (the game's initial state for the
/// public operation). Multichain-safe policy iteration underneath.
inline BestResponse best_response_against(const StochasticGame& game,
                                          const CorrelationDevice& device,
                                          const StrategyProfile& profile, int player,
                                          int start) {
  if (player == game.nature_player()) {
    // Nature's payoff is identically zero; no deviation can gain.
    return BestResponse{DeviationGain{player, 0, 0, 0}, std::nullopt, 0};
  }
  const detail::BestResponseMdp br =
      detail::build_best_response_mdp(game, device, profile, player, start);
  const AverageRewardSolution sol = solve_average_reward(br.mdp);

  Rational best = 0;
  const int e0 = device.start_state();
  for (std::size_t mi = 0; mi < device.emission(e0).size(); ++mi) {
    const Rational pm = device.emission(e0)[mi].second;
    if (pm == 0) continue;
    const auto it = br.index.find({start, e0, static_cast<int>(mi)});
    best += pm * sol.gain[it->second];
  }
  const Rational profile_value =
      longrun_average_payoff_from(game, device, start, profile)[player];

  BestResponse out;
  out.gain = DeviationGain{player, best, profile_value, best - profile_value};
  out.solver_iterations = sol.iterations;
  if (device.is_trivial()) {
    StationaryStrategy s;
    s.table.resize(game.state_count());
    for (int state = 0; state < game.state_count(); ++state) {
      ActionDistribution dist = idle_point_mass();
      const auto it = br.index.find({state, 0, 0});
      if (it != br.index.end())
        dist = ActionDistribution{{{br.node_actions[it->second][sol.policy[it->second]], 1}}};
      s.table[state] = {dist};
    }
    out.strategy = std::move(s);
  }
  return out;
}

inline DeviationGain best_response_gain(const StochasticGame& game,
                                        const CorrelationDevice& device,
                                        const StrategyProfile& profile, int player) {
  return best_response_against(game, device, profile, player, game.initial_state()).gain;
}

struct EquilibriumCheck {
  bool is_equilibrium = false;
  Rational epsilon;
  std::vector<DeviationGain> gains;  // per player, nature last with zero gain
};

/// Autonomous correlated eps-equilibrium test: every player's exact
/// long-run deviation gain stays within eps. The existence of the stage
/// threshold n0 follows from convergence of Cesaro averages on finite
/// chains and is not computed.
inline EquilibriumCheck verify_epsilon_equilibrium(const StochasticGame& game,
                                                   const CorrelationDevice& device,
                                                   const StrategyProfile& profile,
                                                   const Rational& epsilon = kDefaultEpsilon) {
  EquilibriumCheck check;
  check.epsilon = epsilon;
  check.is_equilibrium = true;
  for (int player = 0; player < game.player_count(); ++player) {
    const DeviationGain g = best_response_gain(game, device, profile, player);
    if (g.gain > epsilon) check.is_equilibrium = false;
    check.gains.push_back(g);
  }
  return check;
}

struct PositivityCheck {
  bool eventually_positive = false;
  RatVec longrun;  // per role (nature excluded)
};

/// Every role's exact long-run average payoff from the initial state is
/// strictly positive. Ties at zero are negative verdicts.
inline PositivityCheck eventually_positive(const StochasticGame& game,
                                           const CorrelationDevice& device,
                                           const StrategyProfile& profile) {
  PositivityCheck check;
  const RatVec value = longrun_average_payoff(game, device, profile);
  check.eventually_positive = true;
  for (int r = 0; r < game.nature_player(); ++r) {
    check.longrun.push_back(value[r]);
    if (value[r] <= 0) check.eventually_positive = false;
  }
  return check;
}

namespace detail {

/// Positive-probability moves of a stationary profile over product states
/// (game state, device state), edges labeled by the chosen union step.
struct SupportGraph {
  struct Edge {
    int target;
    Step label;
  };
  std::vector<ProductNode> nodes;  // all (state, device_state) pairs
  std::vector<std::vector<Edge>> edges;
  int node_of(int state, int device_state, int device_count) const {
    return state * device_count + device_state;
  }
};

inline SupportGraph build_support_graph(const StochasticGame& game,
                                        const CorrelationDevice& device,
                                        const StrategyProfile& profile) {
  SupportGraph sg;
  const int ec = device.state_count();
  for (int s = 0; s < game.state_count(); ++s)
    for (int e = 0; e < ec; ++e) sg.nodes.push_back({s, e});
  sg.edges.resize(sg.nodes.size());
  for (int s = 0; s < game.state_count(); ++s)
    for (int e = 0; e < ec; ++e) {
      auto& out = sg.edges[sg.node_of(s, e, ec)];
      for (const auto& [m, pm] : device.emission(e)) {
        if (pm == 0) continue;
        const int e2 = device.successor(e, m);
        for (const auto& [step, joint] : joint_action_support(game, profile, s, m))
          for (const auto& [target, q] : game.probability_row(s, step))
            if (q != 0) out.push_back({sg.node_of(target, e2, ec), step});
      }
    }
  return sg;
}

/// Nodes of R(x0) reachable from some cycle inside R(x0); a node on a cycle
/// counts as reachable from it. On these graphs every node has an outgoing
/// edge, so arbitrarily long positive-probability histories through a node
/// exist exactly when the node lies in this set.
inline std::vector<bool> late_reachable_set(const SupportGraph& sg, int x0) {
  const int n = static_cast<int>(sg.nodes.size());
  std::vector<bool> in_r(n, false);
  std::deque<int> queue{x0};
  in_r[x0] = true;
  while (!queue.empty()) {
    const int x = queue.front();
    queue.pop_front();
    for (const auto& edge : sg.edges[x])
      if (!in_r[edge.target]) {
        in_r[edge.target] = true;
        queue.push_back(edge.target);
      }
  }
  std::vector<std::vector<int>> adjacency(n);
  for (int x = 0; x < n; ++x) {
    if (!in_r[x]) continue;
    for (const auto& edge : sg.edges[x]) adjacency[x].push_back(edge.target);
  }
  std::vector<bool> late(n, false);
  std::deque<int> seeds;
  for (const auto& component : strongly_connected_components(adjacency)) {
    if (!in_r[component.front()]) continue;
    bool cyclic = component.size() > 1;
    if (!cyclic)
      for (const auto& edge : sg.edges[component.front()])
        if (edge.target == component.front()) cyclic = true;
    if (!cyclic) continue;
    for (int x : component)
      if (!late[x]) {
        late[x] = true;
        seeds.push_back(x);
      }
  }
  while (!seeds.empty()) {
    const int x = seeds.front();
    seeds.pop_front();
    for (const auto& edge : sg.edges[x])
      if (in_r[edge.target] && !late[edge.target]) {
        late[edge.target] = true;
        seeds.push_back(edge.target);
      }
  }
  return late;
}

}  // namespace detail

enum class AlignmentMode { proper_completion, full_liveness };

inline std::string to_string(AlignmentMode mode) {
  return mode == AlignmentMode::proper_completion ? "proper-completion" : "full-liveness";
}

struct AlignmentVerdict {
  AlignmentMode mode = AlignmentMode::proper_completion;
  bool aligned = false;
  bool inconclusive = false;  // search gave up; never set by the witness check
  Rational epsilon;
  std::vector<DeviationGain> gains;
  RatVec longrun;                       // per role
  std::vector<std::string> failures;    // human-readable defects
};

/// Checks one (device, profile) witness: eps-equilibrium, eventual
/// positivity, and the support-graph condition for the requested mode.
inline AlignmentVerdict check_alignment_witness(const StochasticGame& game,
                                                const CorrelationDevice& device,
                                                const StrategyProfile& profile,
                                                AlignmentMode mode,
                                                const Rational& epsilon = kDefaultEpsilon) {
  AlignmentVerdict verdict;
  verdict.mode = mode;
  verdict.epsilon = epsilon;

  const EquilibriumCheck eq = verify_epsilon_equilibrium(game, device, profile, epsilon);
  verdict.gains = eq.gains;
  for (const DeviationGain& g : eq.gains)
    if (g.gain > epsilon)
      verdict.failures.push_back("player '" + game.player_name(g.player) + "' gains " +
                                 to_fraction_string(g.gain) + " by unilateral deviation");

  const PositivityCheck pos = eventually_positive(game, device, profile);
  verdict.longrun = pos.longrun;
  for (int r = 0; r < game.nature_player(); ++r)
    if (pos.longrun[r] <= 0)
      verdict.failures.push_back("player '" + game.player_name(r) + "' long-run payoff " +
                                 to_fraction_string(pos.longrun[r]) + " is not positive");

  const detail::SupportGraph sg = detail::build_support_graph(game, device, profile);
  const int ec = device.state_count();
  const int e0 = device.start_state();
  if (mode == AlignmentMode::proper_completion) {
    const int x0 = sg.node_of(game.initial_state(), e0, ec);
    const std::vector<bool> late = detail::late_reachable_set(sg, x0);
    bool supported = false;
    for (std::size_t x = 0; x < sg.nodes.size(); ++x) {
      if (!late[x]) continue;
      for (const auto& edge : sg.edges[x])
        if (sg.nodes[edge.target].state == game.initial_state()) supported = true;
    }
    if (!supported)
      verdict.failures.push_back(
          "no positive-probability return to the initial marking at arbitrarily late stages");
  } else {
    const int transition_count = game.net().transition_count();
    for (int start = 0; start < game.state_count(); ++start) {
      const std::vector<bool> late =
          detail::late_reachable_set(sg, sg.node_of(start, e0, ec));
      std::vector<bool> supported(transition_count, false);
      for (std::size_t x = 0; x < sg.nodes.size(); ++x) {
        if (!late[x]) continue;
        for (const auto& edge : sg.edges[x])
          for (int t : edge.label.transitions) supported[t] = true;
      }
      for (int t = 0; t < transition_count; ++t)
        if (!supported[t])
          verdict.failures.push_back("transition '" + game.net().transition_id(t) +
                                     "' has no late positive-probability occurrence from state " +
                                     game.state_label(start));
    }
  }
  verdict.aligned = verdict.failures.empty();
  return verdict;
}

struct SearchResult {
  bool found = false;
  bool effort_exhausted = false;
  AlignmentVerdict verdict;
  std::optional<StrategyProfile> witness;
  int rounds = 0;
};

/// Bounded witness search over the trivial device: the uniform always-act
/// seed, then rounds of per-player best-response replacement. A failed
/// search is inconclusive, never a negative verdict; only the theorem
/// bridge can certify misalignment.
inline SearchResult search_alignment(const StochasticGame& game, AlignmentMode mode,
                                     const Rational& epsilon = kDefaultEpsilon,
                                     int effort = 8) {
  if (effort < 0) throw Error("search effort must be non-negative");
  const CorrelationDevice device = trivial_device(game.player_count());
  StrategyProfile candidate = StrategyProfile::all_act(game, device);

  SearchResult result;
  AlignmentVerdict verdict = check_alignment_witness(game, device, candidate, mode, epsilon);
  if (verdict.aligned) {
    result.found = true;
    result.verdict = verdict;
    result.witness = candidate;
    return result;
  }

  for (int round = 1; round <= effort; ++round) {
    result.rounds = round;
    bool changed = false;
    for (int player = 0; player < game.nature_player(); ++player) {
      const BestResponse br =
          best_response_against(game, device, candidate, player, game.initial_state());
      if (br.gain.gain > epsilon && br.strategy) {
        candidate.set_stationary(player, *br.strategy);
        changed = true;
      }
    }
    verdict = check_alignment_witness(game, device, candidate, mode, epsilon);
    if (verdict.aligned) {
      result.found = true;
      result.verdict = verdict;
      result.witness = candidate;
      return result;
    }
    if (!changed) break;  // stable profile that still fails; more rounds cannot help
  }
  result.effort_exhausted = true;
  verdict.inconclusive = true;
  result.verdict = verdict;
  return result;
}

struct BridgeReport {
  SoundnessReport soundness;
  AlignmentVerdict alignment;
  bool sound = false;
  bool aligned_full_liveness = false;
  bool agree = false;
  std::size_t state_count = 0;
};

/// Theorem bridge for single-role unit-utility workflow nets: soundness and
/// full-liveness alignment of the restart game under the uniform-random
/// stationary witness must coincide. The witness is complete for this class,
/// so a failed check certifies misalignment.
inline BridgeReport soundness_alignment_bridge(const AnnotatedNet& a,
                                               std::size_t bound = kDefaultStateBound,
                                               const Rational& epsilon = kDefaultEpsilon) {
  std::vector<std::string> violations;
  if (a.role_count() != 1) violations.push_back("exactly one role required");
  const StructuralReport structure = structural_checks(a);
  if (!structure.extended_free_choice) violations.push_back("extended free choice required");
  if (!structure.workflow) violations.push_back("elementary workflow-net shape required");
  if (a.role_count() == 1) {
    for (int t = 0; t < a.net().transition_count(); ++t) {
      if (a.owner(t) != 0) {
        violations.push_back("every transition must be assigned to the single role");
        break;
      }
    }
    for (int t = 0; t < a.net().transition_count(); ++t) {
      if (a.utility(0, t) != 1) {
        violations.push_back("constant utility-1 function required");
        break;
      }
    }
  }
  if (!violations.empty()) {
    std::string message = "theorem hypotheses violated:";
    for (const auto& v : violations) message += " " + v + ";";
    throw HypothesisViolated(message);
  }

  StateSpace space;
  try {
    space = explore(a, bound);
  } catch (const SafetyViolation& e) {
    throw HypothesisViolated(std::string("safe net required: ") + e.what());
  }

  BridgeReport report;
  report.state_count = space.states.size();
  report.soundness = check_soundness(a, *structure.workflow, bound);
  report.sound = report.soundness.sound;

  const auto shared = std::make_shared<const AnnotatedNet>(a);
  const StochasticGame base = build_base_game(shared, space);
  const StochasticGame restart = build_restart_game(base);
  const CorrelationDevice device = trivial_device(restart.player_count());
  const StrategyProfile witness = StrategyProfile::all_act(restart, device);
  report.alignment =
      check_alignment_witness(restart, device, witness, AlignmentMode::full_liveness, epsilon);
  report.aligned_full_liveness = report.alignment.aligned;
  report.agree = report.sound == report.aligned_full_liveness;
  return report;
}

struct EstimatedGain {
  int player = -1;
  double value = 0.0;      // max simulated gain over the library; lower bound
  double std_error = 0.0;
  bool heuristic = true;
  std::string best_deviation;
};

/// Named deviation strategies tried by the heuristic estimator: pure
/// stationary maps, all signal-ignoring.
inline std::vector<std::pair<std::string, StationaryStrategy>> default_deviation_library(
    const StochasticGame& game, const CorrelationDevice& device, int player) {
  std::vector<std::pair<std::string, StationaryStrategy>> lib;
  lib.emplace_back("always-idle", StrategyProfile::idle_strategy(game, device, player));
  lib.emplace_back("uniform-enabled",
                   StrategyProfile::uniform_enabled_strategy(game, device, player));
  std::vector<int> owned;
  for (int t = 0; t < game.net().transition_count(); ++t)
    if (game.acting_player(t) == player) owned.push_back(t);
  for (int t : owned) {
    StationaryStrategy s = StrategyProfile::uniform_enabled_strategy(game, device, player);
    for (int state = 0; state < game.state_count(); ++state) {
      const auto& own = game.own_enabled(state, player);
      if (std::binary_search(own.begin(), own.end(), t))
        for (auto& dist : s.table[state]) dist = ActionDistribution{{{t, 1}}};
    }
    lib.emplace_back("prefer-" + game.net().transition_id(t), std::move(s));
  }
  return lib;
}

/// Simulated lower bound on the best-response gain; the fallback for
/// private-signal devices. Reported as heuristic, never exact.
inline EstimatedGain estimate_deviation_gain(
    const StochasticGame& game, const CorrelationDevice& device, const StrategyProfile& profile,
    int player, const std::vector<std::pair<std::string, StationaryStrategy>>& library,
    int stages, int trials, std::uint64_t seed) {
  EstimatedGain out;
  out.player = player;
  if (library.empty()) return out;  // vacuous lower bound of zero
  const SimulationResult base =
      simulate(game, device, game.initial_state(), profile, stages, trials, seed);
  bool first = true;
  for (const auto& [name, strategy] : library) {
    StrategyProfile deviated = profile;
    deviated.set_stationary(player, strategy);
    const SimulationResult dev =
        simulate(game, device, game.initial_state(), deviated, stages, trials, seed + 1);
    const double gain = dev.mean[player] - base.mean[player];
    if (first || gain > out.value) {
      out.value = gain;
      out.std_error = std::sqrt(dev.std_error[player] * dev.std_error[player] +
                                base.std_error[player] * base.std_error[player]);
      out.best_deviation = name;
      first = false;
    }
  }
  return out;
}

}  // namespace petrigame
