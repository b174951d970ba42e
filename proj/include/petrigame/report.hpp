#pragma once

#include <cstdint>
#include <iomanip>
#include <sstream>
#include <string>

#include <json.hpp>

#include "petrigame/equilibrium.hpp"
#include "petrigame/game.hpp"
#include "petrigame/rational.hpp"

namespace petrigame {

inline constexpr const char* kToolName = "petrigame";
inline constexpr const char* kToolVersion = "0.1.0";

/// FNV-1a 64-bit digest of input bytes, hex-encoded.
inline std::string fnv1a64(const std::string& bytes) {
  std::uint64_t h = 0xCBF29CE484222325ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 0x100000001B3ull;
  }
  std::ostringstream out;
  out << std::hex << std::setfill('0') << std::setw(16) << h;
  return out.str();
}

/// Every numeric report field carries the exact fraction and a decimal
/// rendering rounded to six places.
inline nlohmann::ordered_json json_rational(const Rational& r) {
  return nlohmann::ordered_json{{"exact", to_fraction_string(r)}, {"approx", approx6(r)}};
}

inline nlohmann::ordered_json json_marking(const PetriNet& net, const Marking& m) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (int p : m.places) out.push_back(net.place_id(p));
  return out;
}

inline nlohmann::ordered_json json_step(const PetriNet& net, const Step& s) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (int t : s.transitions) out.push_back(net.transition_id(t));
  return out;
}

/// Full tabulated export of a game for external solvers: every state, the
/// per-player available actions, and per available profile the sparse
/// probability row (exact fraction strings) plus the payoff table entry.
inline nlohmann::ordered_json export_game_json(const StochasticGame& game) {
  nlohmann::ordered_json doc;
  doc["variant"] = game.is_restart() ? "restart" : "base";
  nlohmann::ordered_json players = nlohmann::ordered_json::array();
  for (int player = 0; player < game.player_count(); ++player)
    players.push_back(game.player_name(player));
  doc["players"] = std::move(players);
  nlohmann::ordered_json states = nlohmann::ordered_json::array();
  for (int s = 0; s < game.state_count(); ++s)
    states.push_back(json_marking(game.net(), game.state(s)));
  doc["states"] = std::move(states);
  doc["initial"] = game.initial_state();
  if (!game.is_restart()) {
    nlohmann::ordered_json finals = nlohmann::ordered_json::array();
    for (int s : game.final_states()) finals.push_back(s);
    doc["final_states"] = std::move(finals);
  }

  nlohmann::ordered_json actions = nlohmann::ordered_json::array();
  for (int s = 0; s < game.state_count(); ++s) {
    nlohmann::ordered_json per_player = nlohmann::ordered_json::object();
    for (int player = 0; player < game.player_count(); ++player) {
      nlohmann::ordered_json list = nlohmann::ordered_json::array();
      for (int a : game.available_actions(s, player))
        list.push_back(a == StochasticGame::kIdleAction ? "idle"
                                                        : game.net().transition_id(a));
      per_player[game.player_name(player)] = std::move(list);
    }
    actions.push_back(std::move(per_player));
  }
  doc["available_actions"] = std::move(actions);

  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (int s = 0; s < game.state_count(); ++s) {
    for (const Step& profile : game.available_profiles(s)) {
      nlohmann::ordered_json entry;
      entry["state"] = s;
      entry["step"] = json_step(game.net(), profile);
      nlohmann::ordered_json row = nlohmann::ordered_json::object();
      for (const auto& [target, q] : game.probability_row(s, profile))
        row[std::to_string(target)] = to_fraction_string(q);
      entry["prob"] = std::move(row);
      nlohmann::ordered_json payoff = nlohmann::ordered_json::object();
      const RatVec u = game.payoff(profile);
      for (int player = 0; player < game.player_count(); ++player)
        payoff[game.player_name(player)] = to_fraction_string(u[player]);
      entry["payoff"] = std::move(payoff);
      rows.push_back(std::move(entry));
    }
  }
  doc["transitions"] = std::move(rows);
  return doc;
}

inline nlohmann::ordered_json json_gains(const StochasticGame& game,
                                         const std::vector<DeviationGain>& gains) {
  nlohmann::ordered_json out = nlohmann::ordered_json::array();
  for (const DeviationGain& g : gains) {
    nlohmann::ordered_json entry;
    entry["player"] = game.player_name(g.player);
    entry["best_response"] = json_rational(g.best_response_value);
    entry["profile_value"] = json_rational(g.profile_value);
    entry["gain"] = json_rational(g.gain);
    out.push_back(std::move(entry));
  }
  return out;
}

inline nlohmann::ordered_json json_soundness(const PetriNet& net, const SoundnessReport& r) {
  nlohmann::ordered_json out;
  out["option_to_complete"] = r.option_to_complete;
  out["proper_completion"] = r.proper_completion;
  out["no_dead_transitions"] = r.no_dead_transitions;
  out["sound"] = r.sound;
  out["states"] = r.state_count;
  nlohmann::ordered_json witnesses;
  if (!r.otc_witnesses.empty()) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const Marking& m : r.otc_witnesses) list.push_back(json_marking(net, m));
    witnesses["cannot_complete_from"] = std::move(list);
  }
  if (!r.pc_witnesses.empty()) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (const Marking& m : r.pc_witnesses) list.push_back(json_marking(net, m));
    witnesses["improper_completions"] = std::move(list);
  }
  if (!r.dead_transitions.empty()) {
    nlohmann::ordered_json list = nlohmann::ordered_json::array();
    for (int t : r.dead_transitions) list.push_back(net.transition_id(t));
    witnesses["dead_transitions"] = std::move(list);
  }
  if (!witnesses.empty()) out["witnesses"] = std::move(witnesses);
  return out;
}

inline nlohmann::ordered_json report_header(std::uint64_t seed) {
  nlohmann::ordered_json out;
  out["tool"] = {{"name", kToolName}, {"version", kToolVersion}};
  out["seed"] = seed;
  return out;
}

namespace detail {
inline void render_text(const nlohmann::ordered_json& value, const std::string& prefix,
                        std::ostringstream& out) {
  if (value.is_object()) {
    for (const auto& [key, child] : value.items())
      render_text(child, prefix.empty() ? key : prefix + "." + key, out);
  } else if (value.is_array()) {
    if (value.empty()) out << prefix << ": []\n";
    int k = 0;
    for (const auto& child : value) render_text(child, prefix + "[" + std::to_string(k++) + "]", out);
  } else {
    out << prefix << ": " << value.dump() << "\n";
  }
}
}  // namespace detail

/// Deterministic serialization: stable key order in JSON, flattened
/// key-path lines in text form.
inline std::string emit_report(const nlohmann::ordered_json& report, const std::string& format) {
  if (format == "json") return report.dump(2) + "\n";
  if (format != "text") throw Error("unknown report format '" + format + "'");
  std::ostringstream out;
  detail::render_text(report, "", out);
  return out.str();
}

}  // namespace petrigame
