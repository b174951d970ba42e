#pragma once

#include <map>
#include <string>
#include <utility>
#include <vector>

#include "petrigame/errors.hpp"
#include "petrigame/rational.hpp"

namespace petrigame {

/// One signal per player, as indices into the per-player alphabets.
using SignalVector = std::vector<int>;

/// Finite-state autonomous correlation device: emissions depend only on the
/// device state, the successor only on the emitted signal vector. Game states
/// never enter; that is what makes the device autonomous.
class CorrelationDevice {
 public:
  CorrelationDevice(std::vector<std::string> state_names, int start,
                    std::vector<std::vector<std::string>> alphabets,
                    std::vector<std::vector<std::pair<SignalVector, Rational>>> emissions,
                    std::map<std::pair<int, SignalVector>, int> successors = {})
      : state_names_(std::move(state_names)),
        start_(start),
        alphabets_(std::move(alphabets)),
        emissions_(std::move(emissions)),
        successors_(std::move(successors)) {
    if (state_names_.empty()) throw InvalidDistribution("device needs at least one state");
    if (start_ < 0 || start_ >= state_count()) throw InvalidDistribution("bad start state");
    if (emissions_.size() != state_names_.size())
      throw InvalidDistribution("one emission distribution per device state required");
    for (const auto& alphabet : alphabets_)
      if (alphabet.empty()) throw InvalidDistribution("empty signal alphabet");
    for (const auto& dist : emissions_) {
      Rational total = 0;
      for (const auto& [vec, prob] : dist) {
        if (prob < 0) throw InvalidDistribution("negative emission probability");
        if (vec.size() != alphabets_.size())
          throw InvalidDistribution("signal vector arity mismatch");
        for (std::size_t i = 0; i < vec.size(); ++i)
          if (vec[i] < 0 || vec[i] >= static_cast<int>(alphabets_[i].size()))
            throw InvalidDistribution("signal index out of alphabet");
        total += prob;
      }
      if (total != 1) throw InvalidDistribution("emission probabilities must sum to 1");
    }
    for (const auto& [key, target] : successors_)
      if (target < 0 || target >= state_count())
        throw InvalidDistribution("successor state out of range");
  }

  int state_count() const { return static_cast<int>(state_names_.size()); }
  int start_state() const { return start_; }
  const std::string& state_name(int e) const { return state_names_.at(e); }
  int player_count() const { return static_cast<int>(alphabets_.size()); }
  const std::vector<std::string>& alphabet(int player) const { return alphabets_.at(player); }
  const std::string& signal_name(int player, int signal) const {
    return alphabets_.at(player).at(signal);
  }

  const std::vector<std::pair<SignalVector, Rational>>& emission(int e) const {
    return emissions_.at(e);
  }

  Rational emission_probability(int e, const SignalVector& vec) const {
    for (const auto& [candidate, prob] : emissions_.at(e))
      if (candidate == vec) return prob;
    return 0;
  }

  int successor(int e, const SignalVector& vec) const {
    const auto it = successors_.find({e, vec});
    return it == successors_.end() ? e : it->second;  // identity by default
  }

  bool is_trivial() const {
    if (state_count() != 1) return false;
    for (const auto& alphabet : alphabets_)
      if (alphabet.size() != 1) return false;
    return true;
  }

  /// All players receive the same signal name in every emitted vector.
  bool is_public_broadcast() const {
    for (int e = 0; e < state_count(); ++e)
      for (const auto& [vec, prob] : emissions_.at(e)) {
        if (prob == 0) continue;
        for (std::size_t i = 1; i < vec.size(); ++i)
          if (signal_name(static_cast<int>(i), vec[i]) != signal_name(0, vec[0])) return false;
      }
    return true;
  }

 private:
  std::vector<std::string> state_names_;
  int start_;
  std::vector<std::vector<std::string>> alphabets_;
  std::vector<std::vector<std::pair<SignalVector, Rational>>> emissions_;
  std::map<std::pair<int, SignalVector>, int> successors_;
};

/// Single state, one signal per player, emitted with probability one.
inline CorrelationDevice trivial_device(int player_count) {
  std::vector<std::vector<std::string>> alphabets(player_count, {"TOP"});
  SignalVector top(player_count, 0);
  return CorrelationDevice({"d0"}, 0, std::move(alphabets), {{{top, Rational(1)}}});
}

/// Memoryless device: one state, a fixed distribution over signal vectors.
inline CorrelationDevice iid_device(
    std::vector<std::vector<std::string>> alphabets,
    std::vector<std::pair<SignalVector, Rational>> distribution) {
  return CorrelationDevice({"d0"}, 0, std::move(alphabets), {std::move(distribution)});
}

/// Broadcast shorthand: the same named signal goes to every player.
inline CorrelationDevice broadcast_iid_device(int player_count, std::vector<std::string> signals,
                                              RatVec probabilities) {
  if (signals.size() != probabilities.size())
    throw InvalidDistribution("one probability per signal required");
  std::vector<std::vector<std::string>> alphabets(player_count, signals);
  std::vector<std::pair<SignalVector, Rational>> dist;
  for (std::size_t k = 0; k < signals.size(); ++k)
    dist.emplace_back(SignalVector(player_count, static_cast<int>(k)), probabilities[k]);
  return iid_device(std::move(alphabets), std::move(dist));
}

}  // namespace petrigame
