#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <random>
#include <string>
#include <utility>
#include <vector>

#include "petrigame/device.hpp"
#include "petrigame/errors.hpp"
#include "petrigame/game.hpp"
#include "petrigame/markov.hpp"
#include "petrigame/rational.hpp"

namespace petrigame {

/// Distribution over one player's actions; kIdleAction (-1) first, then
/// transitions ascending.
struct ActionDistribution {
  std::vector<std::pair<int, Rational>> mass;

  Rational probability(int action) const {
    for (const auto& [a, p] : mass)
      if (a == action) return p;
    return 0;
  }
  void validate() const {
    Rational total = 0;
    for (const auto& [a, p] : mass) {
      if (p < 0) throw InvalidDistribution("negative action probability");
      total += p;
    }
    if (total != 1) throw InvalidDistribution("action probabilities must sum to 1");
  }
};

inline ActionDistribution idle_point_mass() { return ActionDistribution{{{StochasticGame::kIdleAction, 1}}}; }

/// Stationary strategy of one player: (state, current own signal) -> action
/// distribution.
struct StationaryStrategy {
  // table[state][signal]
  std::vector<std::vector<ActionDistribution>> table;

  const ActionDistribution& at(int state, int signal) const { return table.at(state).at(signal); }
};

/// What one player has seen: the states, their own signal components, and
/// the action profiles of the play so far.
struct Observation {
  std::vector<int> states;
  std::vector<int> own_signals;
  std::vector<Step> profiles;
  int current_state() const { return states.back(); }
  int current_signal() const { return own_signals.back(); }
};

using GeneralStrategy = std::function<ActionDistribution(const Observation&)>;

/// Per-player strategies. Stationary everywhere is required by the exact
/// analyses; general (observation-dependent) strategies are handled by the
/// simulator only.
class StrategyProfile {
 public:
  StrategyProfile(const StochasticGame& game, const CorrelationDevice& device)
      : player_count_(game.player_count()) {
    if (device.player_count() != game.player_count())
      throw Error("device arity does not match the game's player count");
    stationary_.resize(player_count_);
    general_.resize(player_count_);
    for (int player = 0; player < player_count_; ++player)
      stationary_[player] = uniform_available_strategy(game, device, player);
  }

  int player_count() const { return player_count_; }

  bool stationary() const {
    for (const auto& g : general_)
      if (g) return false;
    return true;
  }

  const StationaryStrategy& stationary_strategy(int player) const {
    if (general_[player])
      throw NonStationaryStrategy("player " + std::to_string(player) +
                                  " uses an observation-dependent strategy");
    return stationary_[player];
  }

  const ActionDistribution& action_distribution(int player, int state, int signal) const {
    return stationary_strategy(player).at(state, signal);
  }

  ActionDistribution sample_source(int player, const Observation& obs) const {
    if (general_[player]) return general_[player](obs);
    return stationary_[player].at(obs.current_state(), obs.current_signal());
  }

  void set_stationary(int player, StationaryStrategy strategy) {
    stationary_[player] = std::move(strategy);
    general_[player] = nullptr;
  }
  void set_general(int player, GeneralStrategy strategy) { general_[player] = std::move(strategy); }

  /// Uniform over every available action, idle included. This is the
  /// default for nature, which the construction keeps absolutely neutral.
  static StationaryStrategy uniform_available_strategy(const StochasticGame& game,
                                                       const CorrelationDevice& device,
                                                       int player) {
    StationaryStrategy s;
    s.table.resize(game.state_count());
    const int signals = static_cast<int>(device.alphabet(player).size());
    for (int state = 0; state < game.state_count(); ++state) {
      const std::vector<int> actions = game.available_actions(state, player);
      ActionDistribution dist;
      for (int a : actions) dist.mass.emplace_back(a, Rational(1, actions.size()));
      s.table[state].assign(signals, dist);
    }
    return s;
  }

  /// Uniform over the player's enabled transitions; idles only when nothing
  /// is enabled. This is the always-act profile the alignment search seeds
  /// with, and the witness the soundness bridge replays.
  static StationaryStrategy uniform_enabled_strategy(const StochasticGame& game,
                                                     const CorrelationDevice& device,
                                                     int player) {
    StationaryStrategy s;
    s.table.resize(game.state_count());
    const int signals = static_cast<int>(device.alphabet(player).size());
    for (int state = 0; state < game.state_count(); ++state) {
      const std::vector<int>& own = game.own_enabled(state, player);
      ActionDistribution dist;
      if (own.empty()) {
        dist = idle_point_mass();
      } else {
        for (int t : own) dist.mass.emplace_back(t, Rational(1, own.size()));
      }
      s.table[state].assign(signals, dist);
    }
    return s;
  }

  static StationaryStrategy idle_strategy(const StochasticGame& game,
                                          const CorrelationDevice& device, int player) {
    StationaryStrategy s;
    s.table.resize(game.state_count());
    const int signals = static_cast<int>(device.alphabet(player).size());
    for (int state = 0; state < game.state_count(); ++state)
      s.table[state].assign(signals, idle_point_mass());
    return s;
  }

  static StrategyProfile all_act(const StochasticGame& game, const CorrelationDevice& device) {
    StrategyProfile p(game, device);
    for (int player = 0; player < game.player_count(); ++player)
      if (player != game.nature_player())
        p.set_stationary(player, uniform_enabled_strategy(game, device, player));
    return p;
  }

  static StrategyProfile all_idle(const StochasticGame& game, const CorrelationDevice& device) {
    StrategyProfile p(game, device);
    for (int player = 0; player < game.player_count(); ++player)
      p.set_stationary(player, idle_strategy(game, device, player));
    return p;
  }

  StrategyProfile with_player_idle(const StochasticGame& game, const CorrelationDevice& device,
                                   int player) const {
    StrategyProfile p = *this;
    p.set_stationary(player, idle_strategy(game, device, player));
    return p;
  }

 private:
  int player_count_;
  std::vector<StationaryStrategy> stationary_;
  std::vector<GeneralStrategy> general_;
};

/// Global history: states, emitted signal vectors, chosen action profiles.
struct History {
  std::vector<int> states;
  std::vector<SignalVector> signals;
  std::vector<Step> profiles;
};

/// Per-player decomposition of a union step at a state; throws
/// MalformedHistory when the step is not assembled from available actions.
inline std::vector<int> decompose_profile(const StochasticGame& game, int state,
                                          const Step& profile) {
  std::vector<int> action(game.player_count(), StochasticGame::kIdleAction);
  for (int t : profile.transitions) {
    if (t < 0 || t >= game.net().transition_count())
      throw MalformedHistory("profile transition out of range");
    const int player = game.acting_player(t);
    if (action[player] != StochasticGame::kIdleAction)
      throw MalformedHistory("profile fires two transitions of one player");
    if (!std::binary_search(game.enabled_transitions(state).begin(),
                            game.enabled_transitions(state).end(), t))
      throw MalformedHistory("profile contains a transition not enabled at the state");
    action[player] = t;
  }
  return action;
}

/// Probability of a finite history under device, start state and stationary
/// profile, by the recursion over its length.
inline Rational history_probability(const StochasticGame& game, const CorrelationDevice& device,
                                    int start, const StrategyProfile& profile,
                                    const History& h) {
  const std::size_t n = h.states.size();
  if (n == 0 || h.signals.size() != n || h.profiles.size() + 1 != n)
    throw MalformedHistory("history components have inconsistent lengths");
  for (int s : h.states)
    if (s < 0 || s >= game.state_count()) throw MalformedHistory("history state out of range");
  for (const SignalVector& m : h.signals) {
    if (m.size() != static_cast<std::size_t>(game.player_count()))
      throw MalformedHistory("signal vector arity mismatch");
    for (int player = 0; player < game.player_count(); ++player)
      if (m[player] < 0 || m[player] >= static_cast<int>(device.alphabet(player).size()))
        throw MalformedHistory("signal index outside the player's alphabet");
  }
  if (!profile.stationary())
    throw NonStationaryStrategy("history probability needs a stationary profile");

  if (h.states.front() != start) return 0;
  Rational prob = device.emission_probability(device.start_state(), h.signals.front());
  int e = device.start_state();
  for (std::size_t k = 0; k + 1 < n; ++k) {
    const int s = h.states[k];
    const std::vector<int> actions = decompose_profile(game, s, h.profiles[k]);
    for (int player = 0; player < game.player_count(); ++player)
      prob *= profile.action_distribution(player, s, h.signals[k][player])
                  .probability(actions[player]);
    prob *= game.transition_probability(s, h.profiles[k], h.states[k + 1]);
    e = device.successor(e, h.signals[k]);
    prob *= device.emission_probability(e, h.signals[k + 1]);
    if (prob == 0) return 0;
  }
  return prob;
}

namespace detail {

/// Support of the joint action distribution at (state, signal vector):
/// pairs (union step, joint probability), in lexicographic per-player order.
inline std::vector<std::pair<Step, Rational>> joint_action_support(
    const StochasticGame& game, const StrategyProfile& profile, int state,
    const SignalVector& m) {
  std::vector<const ActionDistribution*> dists;
  for (int player = 0; player < game.player_count(); ++player)
    dists.push_back(&profile.action_distribution(player, state, m[player]));
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

struct ProductNode {
  int state;
  int device_state;
  bool operator<(const ProductNode& o) const {
    return std::tie(state, device_state) < std::tie(o.state, o.device_state);
  }
};

/// The product chain of game and device under a stationary profile, with
/// per-node expected stage payoffs (fired-sub-step expectation).
struct ProductChain {
  std::vector<ProductNode> nodes;
  std::map<ProductNode, int> index;
  SparseMatrix transitions;
  std::vector<RatVec> rewards;  // per node, per player
  int start = 0;
};

inline ProductChain build_product_chain(const StochasticGame& game,
                                        const CorrelationDevice& device,
                                        const StrategyProfile& profile, int start_state) {
  if (!profile.stationary())
    throw NonStationaryStrategy("exact analysis needs a stationary profile");
  ProductChain chain;
  const ProductNode root{start_state, device.start_state()};
  chain.nodes.push_back(root);
  chain.index[root] = 0;
  for (std::size_t next = 0; next < chain.nodes.size(); ++next) {
    const ProductNode node = chain.nodes[next];
    SparseRow row;
    RatVec reward(game.player_count(), Rational(0));
    for (const auto& [m, pm] : device.emission(node.device_state)) {
      if (pm == 0) continue;
      const int e2 = device.successor(node.device_state, m);
      for (const auto& [step, joint] : joint_action_support(game, profile, node.state, m)) {
        const Rational weight = pm * joint;
        const RatVec& psi = game.expected_stage_payoff(node.state, step);
        for (int r = 0; r < game.player_count(); ++r) reward[r] += weight * psi[r];
        for (const auto& [target, q] : game.probability_row(node.state, step)) {
          const ProductNode succ{target, e2};
          auto it = chain.index.find(succ);
          int idx;
          if (it == chain.index.end()) {
            idx = static_cast<int>(chain.nodes.size());
            chain.nodes.push_back(succ);
            chain.index[succ] = idx;
          } else {
            idx = it->second;
          }
          row.emplace_back(idx, weight * q);
        }
      }
    }
    chain.transitions.push_back(normalize_row(std::move(row)));
    chain.rewards.push_back(std::move(reward));
  }
  return chain;
}

}  // namespace detail

/// Mean expected payoff for stage n: forward dynamic programming over the
/// product of game and device states; equals the probability-weighted
/// history sum for stationary profiles.
inline RatVec mean_expected_payoff(const StochasticGame& game, const CorrelationDevice& device,
                                   int start, const StrategyProfile& profile, int stages) {
  if (stages < 1) throw Error("stage count must be at least 1");
  const detail::ProductChain chain = detail::build_product_chain(game, device, profile, start);
  RatVec dist(chain.nodes.size(), Rational(0));
  dist[chain.start] = 1;
  RatVec total(game.player_count(), Rational(0));
  for (int k = 0; k < stages; ++k) {
    RatVec next(chain.nodes.size(), Rational(0));
    for (std::size_t node = 0; node < chain.nodes.size(); ++node) {
      if (dist[node] == 0) continue;
      for (int r = 0; r < game.player_count(); ++r)
        total[r] += dist[node] * chain.rewards[node][r];
      for (const auto& [target, q] : chain.transitions[node]) next[target] += dist[node] * q;
    }
    dist = std::move(next);
  }
  for (Rational& v : total) v /= stages;
  return total;
}

/// Cesàro limit of the mean expected payoff: recurrent classes of the
/// product chain weighted by absorption probabilities. Exact.
inline RatVec longrun_average_payoff_from(const StochasticGame& game,
                                          const CorrelationDevice& device, int start,
                                          const StrategyProfile& profile) {
  const detail::ProductChain chain = detail::build_product_chain(game, device, profile, start);
  const RatVec mu = limiting_average_distribution(chain.transitions, chain.start);
  RatVec value(game.player_count(), Rational(0));
  for (std::size_t node = 0; node < chain.nodes.size(); ++node) {
    if (mu[node] == 0) continue;
    for (int r = 0; r < game.player_count(); ++r) value[r] += mu[node] * chain.rewards[node][r];
  }
  return value;
}

inline RatVec longrun_average_payoff(const StochasticGame& game, const CorrelationDevice& device,
                                     const StrategyProfile& profile) {
  return longrun_average_payoff_from(game, device, game.initial_state(), profile);
}

struct SimulationResult {
  std::vector<double> mean;       // per player
  std::vector<double> std_error;  // per player
  std::uint64_t stages = 0;
  std::uint64_t trials = 0;
  std::uint64_t seed = 0;
};

namespace detail {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ull;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ull;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBull;
  return x ^ (x >> 31);
}

template <class Rng>
std::size_t sample_cumulative(const std::vector<double>& cumulative, Rng& rng) {
  const double u = std::generate_canonical<double, 53>(rng);
  for (std::size_t k = 0; k < cumulative.size(); ++k)
    if (u < cumulative[k]) return k;
  return cumulative.size() - 1;
}

}  // namespace detail

/// Monte Carlo estimate of the mean expected payoff for stage n: each trial
/// samples one trajectory up to a uniformly random stage K <= n and records
/// the utility earned at stage K, which is unbiased for the stage-n mean by
/// the tower property. Sampling one stage instead of averaging the whole
/// trajectory keeps the reported standard error dominant over the O(1/n)
/// gap between the stage-n mean and its limit, so comparisons against
/// long-run values at a few standard errors stay meaningful. Per-trial
/// seeds are derived from the base seed; observation-dependent strategies
/// are supported.
inline SimulationResult simulate(const StochasticGame& game, const CorrelationDevice& device,
                                 int start, const StrategyProfile& profile, int stages,
                                 int trials, std::uint64_t seed) {
  if (trials < 1 || stages < 1) throw Error("simulate needs trials >= 1 and stages >= 1");
  const int players = game.player_count();

  // Per-device-state emission tables as cumulative doubles.
  std::vector<std::vector<double>> emission_cumulative(device.state_count());
  for (int e = 0; e < device.state_count(); ++e) {
    double acc = 0;
    for (const auto& [vec, p] : device.emission(e)) {
      acc += to_double(p);
      emission_cumulative[e].push_back(acc);
    }
  }
  std::vector<std::vector<double>> utility(players, std::vector<double>(
                                                        game.net().transition_count(), 0.0));
  for (int r = 0; r + 1 < players; ++r)
    for (int t = 0; t < game.net().transition_count(); ++t)
      utility[r][t] = to_double(game.annotated().utility(r, t));

  // Stationary strategies get their cumulative tables compiled up front;
  // observation bookkeeping only happens when some player is general.
  const bool all_stationary = profile.stationary();
  struct CompiledAction {
    std::vector<int> actions;
    std::vector<double> cumulative;
  };
  std::vector<std::vector<std::vector<CompiledAction>>> compiled;  // [player][state][signal]
  if (all_stationary) {
    compiled.resize(players);
    for (int player = 0; player < players; ++player) {
      compiled[player].resize(game.state_count());
      for (int s = 0; s < game.state_count(); ++s) {
        const int signals = static_cast<int>(device.alphabet(player).size());
        compiled[player][s].resize(signals);
        for (int signal = 0; signal < signals; ++signal) {
          const ActionDistribution& dist = profile.action_distribution(player, s, signal);
          CompiledAction& c = compiled[player][s][signal];
          double acc = 0;
          for (const auto& [a, p] : dist.mass) {
            acc += to_double(p);
            c.actions.push_back(a);
            c.cumulative.push_back(acc);
          }
        }
      }
    }
  }

  std::vector<double> mean(players, 0.0), m2(players, 0.0);
  std::vector<Observation> observations(players);
  std::vector<int> members;
  for (int trial = 0; trial < trials; ++trial) {
    std::mt19937_64 rng(detail::splitmix64(seed + 0x51ED2701ull * (trial + 1)));
    for (auto& obs : observations) {
      obs.states.clear();
      obs.own_signals.clear();
      obs.profiles.clear();
    }
    const int sampled_stage = 1 + static_cast<int>(rng() % stages);
    int s = start;
    int e = device.start_state();
    std::vector<double> sample(players, 0.0);
    for (int stage = 1; stage <= sampled_stage; ++stage) {
      const std::size_t mi = detail::sample_cumulative(emission_cumulative[e], rng);
      const SignalVector& m = device.emission(e)[mi].first;
      if (!all_stationary)
        for (int player = 0; player < players; ++player) {
          observations[player].states.push_back(s);
          observations[player].own_signals.push_back(m[player]);
        }
      members.clear();
      for (int player = 0; player < players; ++player) {
        int action;
        if (all_stationary) {
          const CompiledAction& c = compiled[player][s][m[player]];
          action = c.actions[detail::sample_cumulative(c.cumulative, rng)];
        } else {
          const ActionDistribution dist = profile.sample_source(player, observations[player]);
          double acc = 0;
          std::vector<double> cumulative;
          for (const auto& [a, p] : dist.mass) {
            acc += to_double(p);
            cumulative.push_back(acc);
          }
          action = dist.mass[detail::sample_cumulative(cumulative, rng)].first;
        }
        if (action != StochasticGame::kIdleAction) members.push_back(action);
      }
      std::sort(members.begin(), members.end());
      const Step chosen{members};
      const Step fired = game.sample_fired_substep(s, chosen, rng);
      if (stage == sampled_stage)
        for (int t : fired.transitions)
          for (int r = 0; r + 1 < players; ++r) sample[r] += utility[r][t];
      if (!all_stationary)
        for (int player = 0; player < players; ++player)
          observations[player].profiles.push_back(chosen);
      s = game.fire_to_state(s, fired);
      e = device.successor(e, m);
    }
    for (int r = 0; r < players; ++r) {
      const double delta = sample[r] - mean[r];
      mean[r] += delta / (trial + 1);
      m2[r] += delta * (sample[r] - mean[r]);
    }
  }
  SimulationResult result;
  result.mean = mean;
  result.std_error.resize(players, 0.0);
  for (int r = 0; r < players; ++r)
    result.std_error[r] = trials > 1 ? std::sqrt(m2[r] / (trials - 1) / trials) : 0.0;
  result.stages = stages;
  result.trials = trials;
  result.seed = seed;
  return result;
}

}  // namespace petrigame
