#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "petrigame/device.hpp"
#include "petrigame/errors.hpp"
#include "petrigame/game.hpp"
#include "petrigame/strategy.hpp"

namespace petrigame {

// ---------------------------------------------------------------------------
// Correlation devices
//
// { "kind": "trivial" }
// { "kind": "iid", "signals": ["WORK_B","WORK_A"],
//   "distribution": { "WORK_B": "3/5", "WORK_A": "2/5" } }
// { "kind": "automaton", "states": [...], "start": "d0",
//   "alphabets": { "<player>": ["s1","s2"] },
//   "emissions": { "d0": [ { "vector": {"<player>": "s1"}, "prob": "1/2" } ] },
//   "successors": { "d0": [ { "vector": {...}, "next": "d1" } ] } }
//
// Players omitted from "alphabets" (nature, typically) get the singleton
// alphabet; the iid form broadcasts the same signal to every player.
// ---------------------------------------------------------------------------

inline CorrelationDevice device_from_json(const nlohmann::json& doc, const StochasticGame& game) {
  if (!doc.is_object()) throw SchemaError("device document must be a JSON object");
  const std::string kind = doc.value("kind", "trivial");
  if (kind == "trivial") return trivial_device(game.player_count());
  if (kind == "iid") {
    if (!doc.contains("signals") || !doc["signals"].is_array())
      throw SchemaError("iid device needs a 'signals' array");
    std::vector<std::string> signals;
    for (const auto& s : doc["signals"]) signals.push_back(s.get<std::string>());
    if (!doc.contains("distribution") || !doc["distribution"].is_object())
      throw SchemaError("iid device needs a 'distribution' object");
    RatVec probabilities;
    for (const std::string& s : signals) {
      if (!doc["distribution"].contains(s))
        throw InvalidDistribution("no probability for signal '" + s + "'");
      probabilities.push_back(parse_rational(doc["distribution"][s].get<std::string>()));
    }
    return broadcast_iid_device(game.player_count(), std::move(signals), std::move(probabilities));
  }
  if (kind != "automaton") throw SchemaError("unknown device kind '" + kind + "'");

  std::vector<std::string> state_names;
  for (const auto& s : doc.at("states")) state_names.push_back(s.get<std::string>());
  std::map<std::string, int> state_index;
  for (std::size_t i = 0; i < state_names.size(); ++i)
    state_index[state_names[i]] = static_cast<int>(i);
  const std::string start_name = doc.at("start").get<std::string>();
  if (!state_index.count(start_name)) throw SchemaError("unknown start state '" + start_name + "'");

  std::vector<std::vector<std::string>> alphabets(game.player_count(), {"TOP"});
  if (doc.contains("alphabets"))
    for (const auto& [player, signals] : doc["alphabets"].items()) {
      std::vector<std::string> names;
      for (const auto& s : signals) names.push_back(s.get<std::string>());
      alphabets[game.player_index(player)] = std::move(names);
    }
  const auto signal_index = [&](int player, const std::string& name) {
    for (std::size_t k = 0; k < alphabets[player].size(); ++k)
      if (alphabets[player][k] == name) return static_cast<int>(k);
    throw SchemaError("signal '" + name + "' not in the alphabet of player " +
                      game.player_name(player));
  };
  const auto parse_vector = [&](const nlohmann::json& vec) {
    SignalVector m(game.player_count(), 0);
    for (const auto& [player, signal] : vec.items())
      m[game.player_index(player)] = signal_index(game.player_index(player),
                                                  signal.get<std::string>());
    return m;
  };

  std::vector<std::vector<std::pair<SignalVector, Rational>>> emissions(state_names.size());
  for (const auto& [state, dist] : doc.at("emissions").items()) {
    if (!state_index.count(state)) throw SchemaError("unknown device state '" + state + "'");
    for (const auto& entry : dist)
      emissions[state_index[state]].emplace_back(
          parse_vector(entry.at("vector")), parse_rational(entry.at("prob").get<std::string>()));
  }
  std::map<std::pair<int, SignalVector>, int> successors;
  if (doc.contains("successors"))
    for (const auto& [state, rules] : doc["successors"].items()) {
      if (!state_index.count(state)) throw SchemaError("unknown device state '" + state + "'");
      for (const auto& rule : rules) {
        const std::string next = rule.at("next").get<std::string>();
        if (!state_index.count(next)) throw SchemaError("unknown device state '" + next + "'");
        successors[{state_index[state], parse_vector(rule.at("vector"))}] = state_index[next];
      }
    }
  return CorrelationDevice(std::move(state_names), state_index[start_name], std::move(alphabets),
                           std::move(emissions), std::move(successors));
}

inline nlohmann::ordered_json device_to_json(const CorrelationDevice& device,
                                             const StochasticGame& game) {
  nlohmann::ordered_json doc;
  if (device.is_trivial()) {
    doc["kind"] = "trivial";
    return doc;
  }
  doc["kind"] = "automaton";
  nlohmann::ordered_json states = nlohmann::ordered_json::array();
  for (int e = 0; e < device.state_count(); ++e) states.push_back(device.state_name(e));
  doc["states"] = std::move(states);
  doc["start"] = device.state_name(device.start_state());
  nlohmann::ordered_json alphabets = nlohmann::ordered_json::object();
  for (int player = 0; player < device.player_count(); ++player)
    alphabets[game.player_name(player)] = device.alphabet(player);
  doc["alphabets"] = std::move(alphabets);
  nlohmann::ordered_json emissions = nlohmann::ordered_json::object();
  for (int e = 0; e < device.state_count(); ++e) {
    nlohmann::ordered_json dist = nlohmann::ordered_json::array();
    for (const auto& [vec, prob] : device.emission(e)) {
      nlohmann::ordered_json vector = nlohmann::ordered_json::object();
      for (int player = 0; player < device.player_count(); ++player)
        vector[game.player_name(player)] = device.signal_name(player, vec[player]);
      dist.push_back({{"vector", std::move(vector)}, {"prob", to_fraction_string(prob)}});
    }
    emissions[device.state_name(e)] = std::move(dist);
  }
  doc["emissions"] = std::move(emissions);
  return doc;
}

// ---------------------------------------------------------------------------
// Strategy profiles
//
// { "players": {
//     "a": { "default": "uniform-enabled",
//            "rules": [ { "marking": ["p2"], "signal": "TOP",
//                         "actions": { "t1": "1/2", "idle": "1/2" } } ] } } }
//
// "signal" omitted applies the rule to every signal. Players omitted
// default to uniform-available (nature's neutral default).
// ---------------------------------------------------------------------------

inline StrategyProfile profile_from_json(const nlohmann::json& doc, const StochasticGame& game,
                                         const CorrelationDevice& device) {
  if (!doc.is_object()) throw SchemaError("profile document must be a JSON object");
  StrategyProfile profile(game, device);
  if (!doc.contains("players")) return profile;
  if (!doc["players"].is_object()) throw SchemaError("'players' must be an object");
  for (const auto& [name, spec] : doc["players"].items()) {
    const int player = game.player_index(name);
    const std::string def = spec.value("default", "uniform-available");
    StationaryStrategy strategy;
    if (def == "uniform-available")
      strategy = StrategyProfile::uniform_available_strategy(game, device, player);
    else if (def == "uniform-enabled")
      strategy = StrategyProfile::uniform_enabled_strategy(game, device, player);
    else if (def == "idle")
      strategy = StrategyProfile::idle_strategy(game, device, player);
    else
      throw SchemaError("unknown default '" + def + "' for player '" + name + "'");
    if (spec.contains("rules")) {
      for (const auto& rule : spec["rules"]) {
        std::vector<std::string> place_ids;
        for (const auto& p : rule.at("marking")) place_ids.push_back(p.get<std::string>());
        const int state = game.state_index(marking_of(game.net(), place_ids));
        if (state < 0)
          throw SchemaError("rule marking is not a state of the game for player '" + name + "'");
        std::vector<int> signals;
        if (rule.contains("signal")) {
          const std::string signal = rule["signal"].get<std::string>();
          const auto& alphabet = device.alphabet(player);
          bool found = false;
          for (std::size_t k = 0; k < alphabet.size(); ++k)
            if (alphabet[k] == signal) {
              signals.push_back(static_cast<int>(k));
              found = true;
            }
          if (!found) throw SchemaError("unknown signal '" + signal + "'");
        } else {
          for (std::size_t k = 0; k < device.alphabet(player).size(); ++k)
            signals.push_back(static_cast<int>(k));
        }
        ActionDistribution dist;
        for (const auto& [action, prob] : rule.at("actions").items()) {
          const int a = action == "idle" ? StochasticGame::kIdleAction
                                         : game.net().transition_index(action);
          dist.mass.emplace_back(a, parse_rational(prob.get<std::string>()));
        }
        std::sort(dist.mass.begin(), dist.mass.end());
        dist.validate();
        const std::vector<int> available = game.available_actions(state, player);
        for (const auto& [a, p] : dist.mass)
          if (p != 0 && !std::binary_search(available.begin(), available.end(), a))
            throw InvalidDistribution("profile puts mass on an unavailable action at " +
                                      game.state_label(state));
        for (int signal : signals) strategy.table[state][signal] = dist;
      }
    }
    profile.set_stationary(player, std::move(strategy));
  }
  return profile;
}

inline nlohmann::ordered_json profile_to_json(const StrategyProfile& profile,
                                              const StochasticGame& game,
                                              const CorrelationDevice& device) {
  nlohmann::ordered_json players = nlohmann::ordered_json::object();
  for (int player = 0; player < game.player_count(); ++player) {
    nlohmann::ordered_json rules = nlohmann::ordered_json::array();
    const StationaryStrategy& strategy = profile.stationary_strategy(player);
    for (int state = 0; state < game.state_count(); ++state) {
      for (std::size_t signal = 0; signal < device.alphabet(player).size(); ++signal) {
        const ActionDistribution& dist = strategy.at(state, static_cast<int>(signal));
        nlohmann::ordered_json actions = nlohmann::ordered_json::object();
        for (const auto& [a, p] : dist.mass) {
          if (p == 0) continue;
          const std::string key =
              a == StochasticGame::kIdleAction ? "idle" : game.net().transition_id(a);
          actions[key] = to_fraction_string(p);
        }
        nlohmann::ordered_json rule;
        nlohmann::ordered_json marking = nlohmann::ordered_json::array();
        for (int p : game.state(state).places) marking.push_back(game.net().place_id(p));
        rule["marking"] = std::move(marking);
        rule["signal"] = device.signal_name(player, static_cast<int>(signal));
        rule["actions"] = std::move(actions);
        rules.push_back(std::move(rule));
      }
    }
    players[game.player_name(player)] = {{"rules", std::move(rules)}};
  }
  return nlohmann::ordered_json{{"players", std::move(players)}};
}

inline nlohmann::json load_json_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("JSON error in '" + path + "': " + e.what());
  }
}

}  // namespace petrigame
