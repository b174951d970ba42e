#pragma once

#include <map>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "petrigame/annotations.hpp"
#include "petrigame/device.hpp"
#include "petrigame/game.hpp"
#include "petrigame/petri.hpp"
#include "petrigame/statespace.hpp"
#include "petrigame/strategy.hpp"

namespace petrigame::fixtures {

/// Running example: a chain with a rework loop. Roles a, b, c; a pays one
/// unit to start, b earns one per forward step, c earns on rework and on
/// completion, a earns two on completion.
inline AnnotatedNet n1() {
  PetriNet net({"p0", "p1", "p2", "p3"},
               {{"t0", {"p0"}, {"p1"}},
                {"t", {"p1"}, {"p2"}},
                {"t'", {"p2"}, {"p1"}},
                {"t1", {"p2"}, {"p3"}}});
  const Marking initial = marking_of(net, {"p0"});
  std::map<std::pair<std::string, std::string>, Rational> utilities{
      {{"a", "t0"}, Rational(-1)}, {{"b", "t"}, Rational(1)},   {{"c", "t'"}, Rational(1)},
      {{"a", "t1"}, Rational(2)},  {{"c", "t1"}, Rational(2)},
  };
  std::map<std::string, std::string> assignment{
      {"t0", "a"}, {"t", "b"}, {"t'", "c"}, {"t1", "a"}};
  return AnnotatedNet(std::move(net), initial, {"a", "b", "c"}, utilities, assignment);
}

/// The same net read as a workflow with a single role and unit utilities.
inline AnnotatedNet w1() {
  const AnnotatedNet a = n1();
  return unit_annotation(a.net(), a.initial());
}

/// Workflow net with a structurally dead transition: q is never marked.
inline AnnotatedNet w2() {
  PetriNet net({"i", "o", "q"}, {{"t_a", {"i"}, {"o"}}, {"t_b", {"q"}, {"o"}}});
  const Marking initial = marking_of(net, {"i"});
  return unit_annotation(net, initial);
}

/// Two co-founders, one of whom should work each day; the secretary rolls a
/// ten-sided die each morning and tells both who goes in. Utilities are
/// fixture choices: Bob earns 2 working and 3 surfing, Alice 4 working and
/// 2 fishing.
inline AnnotatedNet alice_bob() {
  PetriNet net({"a0", "a1", "b0", "b1"},
               {{"bob_work", {"b0"}, {"b1"}},
                {"bob_surf", {"b0"}, {"b1"}},
                {"alice_work", {"a0"}, {"a1"}},
                {"alice_fish", {"a0"}, {"a1"}}});
  const Marking initial = marking_of(net, {"a0", "b0"});
  std::map<std::pair<std::string, std::string>, Rational> utilities{
      {{"bob", "bob_work"}, Rational(2)},
      {{"bob", "bob_surf"}, Rational(3)},
      {{"alice", "alice_work"}, Rational(4)},
      {{"alice", "alice_fish"}, Rational(2)},
  };
  std::map<std::string, std::string> assignment{{"bob_work", "bob"},
                                                {"bob_surf", "bob"},
                                                {"alice_work", "alice"},
                                                {"alice_fish", "alice"}};
  return AnnotatedNet(std::move(net), initial, {"alice", "bob"}, utilities, assignment);
}

/// Bob works on six faces of the die, Alice on the other four.
inline CorrelationDevice alice_bob_device(const StochasticGame& game) {
  return broadcast_iid_device(game.player_count(), {"WORK_B", "WORK_A"},
                              {Rational(3, 5), Rational(2, 5)});
}

/// Both obey the mediator: on WORK_B Bob works and Alice fishes, on WORK_A
/// Alice works and Bob surfs.
inline StrategyProfile alice_bob_obedient(const StochasticGame& game,
                                          const CorrelationDevice& device) {
  StrategyProfile profile(game, device);
  const auto follow = [&](const std::string& player_name, const std::string& on_work_b,
                          const std::string& on_work_a) {
    const int player = game.player_index(player_name);
    StationaryStrategy s;
    s.table.resize(game.state_count());
    for (int state = 0; state < game.state_count(); ++state) {
      s.table[state].resize(2);
      for (int signal = 0; signal < 2; ++signal) {
        const std::string& wanted = signal == 0 ? on_work_b : on_work_a;
        const int t = game.net().transition_index(wanted);
        const auto& own = game.own_enabled(state, player);
        s.table[state][signal] = std::binary_search(own.begin(), own.end(), t)
                                     ? ActionDistribution{{{t, 1}}}
                                     : idle_point_mass();
      }
    }
    profile.set_stationary(player, std::move(s));
  };
  follow("bob", "bob_work", "bob_surf");
  follow("alice", "alice_fish", "alice_work");
  return profile;
}

/// Hand-encoded simplified order-to-cash process. Utilities are fixture
/// choices in round numbers: the customer pays 5 up front and values the
/// goods at 8, the supplier nets 4 on fulfillment, the shipper earns 1 per
/// shipment and pays 1 when nature damages the parcel (forcing a re-ship).
inline AnnotatedNet order_to_cash() {
  PetriNet net({"i", "p_ordered", "p_fulfilled", "p_shipped", "o"},
               {{"place_order", {"i"}, {"p_ordered"}},
                {"fulfill", {"p_ordered"}, {"p_fulfilled"}},
                {"ship", {"p_fulfilled"}, {"p_shipped"}},
                {"deliver", {"p_shipped"}, {"o"}},
                {"damage", {"p_shipped"}, {"p_fulfilled"}}});
  const Marking initial = marking_of(net, {"i"});
  std::map<std::pair<std::string, std::string>, Rational> utilities{
      {{"customer", "place_order"}, Rational(-5)},
      {{"supplier", "fulfill"}, Rational(4)},
      {{"shipper", "ship"}, Rational(1)},
      {{"customer", "deliver"}, Rational(8)},
      {{"shipper", "damage"}, Rational(-1)},
  };
  std::map<std::string, std::string> assignment{{"place_order", "customer"},
                                                {"fulfill", "supplier"},
                                                {"ship", "shipper"},
                                                {"deliver", "shipper"}};
  // "damage" stays unassigned: nature decides whether the parcel arrives.
  return AnnotatedNet(std::move(net), initial, {"customer", "shipper", "supplier"}, utilities,
                      assignment);
}

struct GamePair {
  std::shared_ptr<const AnnotatedNet> net;
  StochasticGame base;
  StochasticGame restart;
};

inline GamePair build_games(const AnnotatedNet& a, std::size_t bound = kDefaultStateBound) {
  auto shared = std::make_shared<const AnnotatedNet>(a);
  const StateSpace space = explore(*shared, bound);
  StochasticGame base = build_base_game(shared, space);
  StochasticGame restart = build_restart_game(base);
  return GamePair{shared, std::move(base), std::move(restart)};
}

/// The two profiles the restart(N1) analyses revolve around.
inline StrategyProfile n1_all_act(const StochasticGame& game, const CorrelationDevice& device) {
  return StrategyProfile::all_act(game, device);
}

inline StrategyProfile n1_c_idles(const StochasticGame& game, const CorrelationDevice& device) {
  return StrategyProfile::all_act(game, device)
      .with_player_idle(game, device, game.player_index("c"));
}

}  // namespace petrigame::fixtures
