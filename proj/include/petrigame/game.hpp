#pragma once

#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <utility>
#include <vector>

#include "petrigame/errors.hpp"
#include "petrigame/markov.hpp"
#include "petrigame/petri.hpp"
#include "petrigame/rational.hpp"
#include "petrigame/statespace.hpp"

namespace petrigame {

/// Stochastic game over the reachable markings of an annotated net. Players
/// are the roles plus nature; actions are "idle" or one owned enabled
/// transition; chosen steps are resolved by rolling a fair die per conflict
/// set. The restart variant removes final markings and redirects their
/// incoming probability mass to the initial marking.
///
/// Two payoff views coexist:
///   * payoff(step)             — utility of the chosen step (the game's
///                                payoff table, independent of the state);
///   * expected_stage_payoff    — expectation of the utility of the sub-step
///                                that actually fires under the fair dice.
/// Expectation engines use the latter; the former is the exported table.
class StochasticGame {
 public:
  enum class Variant { base, restart };

  Variant variant() const { return variant_; }
  bool is_restart() const { return variant_ == Variant::restart; }
  const AnnotatedNet& annotated() const { return *net_; }
  const PetriNet& net() const { return net_->net(); }
  std::shared_ptr<const AnnotatedNet> annotated_ptr() const { return net_; }

  int player_count() const { return net_->role_count() + 1; }
  int nature_player() const { return net_->role_count(); }
  std::string player_name(int player) const {
    return player == nature_player() ? std::string(AnnotatedNet::kNatureId)
                                     : net_->roles().at(player);
  }
  int player_index(const std::string& name) const {
    if (name == AnnotatedNet::kNatureId) return nature_player();
    return net_->role_index(name);
  }
  /// Player controlling a transition (owner role, or nature).
  int acting_player(int t) const {
    const int role = net_->owner(t);
    return role == AnnotatedNet::kNature ? nature_player() : role;
  }

  int state_count() const { return static_cast<int>(live_states_.size()); }
  const Marking& state(int s) const { return base_states_[live_states_.at(s)]; }
  int initial_state() const { return initial_live_; }
  int state_index(const Marking& m) const {
    const auto it = state_index_.find(m);
    return it == state_index_.end() ? -1 : it->second;
  }
  std::string state_label(int s) const { return marking_label(net(), state(s)); }

  const std::vector<std::vector<int>>& conflict_classes() const { return classes_; }
  int conflict_class(int t) const { return class_of_[t]; }

  const std::vector<int>& enabled_transitions(int s) const { return enabled_[s]; }
  const std::vector<int>& own_enabled(int s, int player) const {
    return own_enabled_[s][player];
  }
  /// Actions of a player at a state: idle (encoded -1) plus owned enabled
  /// transitions, ascending.
  std::vector<int> available_actions(int s, int player) const {
    std::vector<int> actions{kIdleAction};
    const auto& own = own_enabled_[s][player];
    actions.insert(actions.end(), own.begin(), own.end());
    return actions;
  }
  static constexpr int kIdleAction = -1;

  /// All maximal M-enabled sub-steps of a chosen step, in deterministic
  /// order. Empty when some intersecting conflict set has no enabled member.
  std::vector<Step> maximal_enabled_substeps(int s, const Step& chosen) const {
    std::vector<std::vector<int>> groups = enabled_groups(s, chosen);
    for (const auto& group : groups)
      if (group.empty()) return {};
    std::vector<Step> out;
    std::vector<std::size_t> pick(groups.size(), 0);
    while (true) {
      std::vector<int> members;
      members.reserve(groups.size());
      for (std::size_t g = 0; g < groups.size(); ++g) members.push_back(groups[g][pick[g]]);
      std::sort(members.begin(), members.end());
      out.push_back(Step{std::move(members)});
      std::size_t g = groups.size();
      while (g > 0) {
        --g;
        if (++pick[g] < groups[g].size()) break;
        pick[g] = 0;
        if (g == 0) return out;
      }
      if (groups.empty()) return out;
    }
  }

  /// Probability that every maximal enabled sub-step carries: one fair die
  /// per conflict set meeting the chosen step, one side per chosen member.
  Rational substep_weight(const Step& chosen) const {
    Rational w = 1;
    std::map<int, int> per_class;
    for (int t : chosen.transitions) per_class[class_of_[t]] += 1;
    for (const auto& [cls, count] : per_class) w /= count;
    return w;
  }

  const SparseRow& probability_row(int s, const Step& chosen) const {
    std::scoped_lock lock(*cache_mutex_);
    const auto key = std::make_pair(s, chosen.transitions);
    auto it = prob_cache_.find(key);
    if (it != prob_cache_.end()) return it->second;
    SparseRow row;
    const Rational w = substep_weight(chosen);
    for (const Step& sub : maximal_enabled_substeps(s, chosen))
      row.emplace_back(fire_to_state(s, sub), w);
    return prob_cache_.emplace(key, normalize_row(std::move(row))).first->second;
  }

  Rational transition_probability(int s, const Step& chosen, int target) const {
    for (const auto& [col, prob] : probability_row(s, chosen))
      if (col == target) return prob;
    return 0;
  }

  /// Chosen-step payoff table: per-player utility of the step, nature last
  /// with payoff zero. State-independent.
  RatVec payoff(const Step& chosen) const {
    RatVec u = net_->step_utility_vector(chosen);
    u.push_back(0);
    return u;
  }

  /// Expected utility of the sub-step the fair dice actually fire.
  const RatVec& expected_stage_payoff(int s, const Step& chosen) const {
    std::scoped_lock lock(*cache_mutex_);
    const auto key = std::make_pair(s, chosen.transitions);
    auto it = stage_payoff_cache_.find(key);
    if (it != stage_payoff_cache_.end()) return it->second;
    RatVec expected(player_count(), Rational(0));
    const Rational w = substep_weight(chosen);
    for (const Step& sub : maximal_enabled_substeps(s, chosen)) {
      const RatVec u = net_->step_utility_vector(sub);
      for (std::size_t r = 0; r < u.size(); ++r) expected[r] += w * u[r];
    }
    return stage_payoff_cache_.emplace(key, std::move(expected)).first->second;
  }

  /// Every action profile assembled from available actions, identified with
  /// its union step; lexicographic in the per-player choices.
  std::vector<Step> available_profiles(int s) const {
    std::vector<std::vector<int>> choices;
    for (int player = 0; player < player_count(); ++player)
      choices.push_back(available_actions(s, player));
    std::vector<Step> out;
    std::vector<std::size_t> pick(choices.size(), 0);
    while (true) {
      std::vector<int> members;
      for (std::size_t i = 0; i < choices.size(); ++i)
        if (choices[i][pick[i]] != kIdleAction) members.push_back(choices[i][pick[i]]);
      std::sort(members.begin(), members.end());
      out.push_back(Step{std::move(members)});
      std::size_t i = choices.size();
      while (i > 0) {
        --i;
        if (++pick[i] < choices[i].size()) break;
        pick[i] = 0;
        if (i == 0) return out;
      }
      if (choices.empty()) return out;
    }
  }

  /// Samples the fired sub-step of a chosen step: one uniform pick per
  /// conflict set among the chosen members (callers pass admissible steps,
  /// where every chosen member is enabled).
  template <class Rng>
  Step sample_fired_substep(int s, const Step& chosen, Rng& rng) const {
    (void)s;
    const std::size_t k = chosen.transitions.size();
    if (k <= 1) return chosen;
    std::vector<std::pair<int, int>> by_class;
    by_class.reserve(k);
    for (int t : chosen.transitions) by_class.emplace_back(class_of_[t], t);
    std::sort(by_class.begin(), by_class.end());
    std::vector<int> members;
    members.reserve(k);
    std::size_t i = 0;
    while (i < by_class.size()) {
      std::size_t j = i + 1;
      while (j < by_class.size() && by_class[j].first == by_class[i].first) ++j;
      const std::size_t count = j - i;
      members.push_back(
          by_class[count == 1 ? i : i + static_cast<std::size_t>(rng() % count)].second);
      i = j;
    }
    std::sort(members.begin(), members.end());
    return Step{std::move(members)};
  }

  /// Target state of firing an enabled sub-step, with the restart redirect
  /// applied when the base successor is final.
  int fire_to_state(int s, const Step& fired) const {
    int base = live_states_[s];
    for (int t : fired.transitions) {
      const auto& out = base_edges_[base];
      int next = -1;
      for (const auto& [tr, target] : out)
        if (tr == t) {
          next = target;
          break;
        }
      if (next < 0)
        throw StepNotEnabled("sub-step member '" + net().transition_id(t) +
                             "' not enabled along firing of " + step_label(net(), fired));
      base = next;
    }
    if (variant_ == Variant::restart && base_final_[base]) base = 0;
    const int live = base_to_live_[base];
    if (live < 0) throw Error("internal: fired into a removed state");
    return live;
  }

  /// Final markings of the underlying base space (empty for restart games,
  /// whose states exclude them).
  std::vector<int> final_states() const {
    std::vector<int> out;
    for (int s = 0; s < state_count(); ++s)
      if (base_final_[live_states_[s]]) out.push_back(s);
    return out;
  }

  friend StochasticGame build_base_game(std::shared_ptr<const AnnotatedNet> net,
                                        const StateSpace& space);
  friend StochasticGame build_restart_game(const StochasticGame& base);

 private:
  StochasticGame() = default;

  std::vector<std::vector<int>> enabled_groups(int s, const Step& chosen) const {
    // Chosen members grouped by conflict class (class order), filtered to
    // the ones enabled at s; a group may come out empty.
    std::map<int, std::vector<int>> per_class;
    for (int t : chosen.transitions) per_class[class_of_[t]];  // keep class even if none enabled
    for (int t : chosen.transitions)
      if (std::binary_search(enabled_[s].begin(), enabled_[s].end(), t))
        per_class[class_of_[t]].push_back(t);
    std::vector<std::vector<int>> groups;
    groups.reserve(per_class.size());
    for (auto& [cls, members] : per_class) groups.push_back(std::move(members));
    return groups;
  }

  void index_live_states() {
    base_to_live_.assign(base_states_.size(), -1);
    for (int s = 0; s < static_cast<int>(live_states_.size()); ++s) {
      base_to_live_[live_states_[s]] = s;
      state_index_[base_states_[live_states_[s]]] = s;
    }
    enabled_.clear();
    own_enabled_.clear();
    for (int s = 0; s < static_cast<int>(live_states_.size()); ++s) {
      std::vector<int> en;
      for (const auto& [t, target] : base_edges_[live_states_[s]]) en.push_back(t);
      std::sort(en.begin(), en.end());
      std::vector<std::vector<int>> own(player_count());
      for (int t : en) own[acting_player(t)].push_back(t);
      enabled_.push_back(std::move(en));
      own_enabled_.push_back(std::move(own));
    }
  }

  std::shared_ptr<const AnnotatedNet> net_;
  Variant variant_ = Variant::base;
  std::vector<Marking> base_states_;
  std::vector<std::vector<std::pair<int, int>>> base_edges_;
  std::vector<bool> base_final_;
  std::vector<int> live_states_;   // base indices, in base order
  std::vector<int> base_to_live_;
  int initial_live_ = 0;
  std::vector<std::vector<int>> classes_;
  std::vector<int> class_of_;
  std::map<Marking, int> state_index_;
  std::vector<std::vector<int>> enabled_;
  std::vector<std::vector<std::vector<int>>> own_enabled_;

  // Behind a pointer so the game stays movable.
  mutable std::unique_ptr<std::mutex> cache_mutex_ = std::make_unique<std::mutex>();
  mutable std::map<std::pair<int, std::vector<int>>, SparseRow> prob_cache_;
  mutable std::map<std::pair<int, std::vector<int>>, RatVec> stage_payoff_cache_;
};

inline StochasticGame build_base_game(std::shared_ptr<const AnnotatedNet> net,
                                      const StateSpace& space) {
  if (!is_extended_free_choice(net->net()))
    throw NotFreeChoice("base game needs an extended-free-choice net");
  StochasticGame g;
  g.net_ = std::move(net);
  g.variant_ = StochasticGame::Variant::base;
  g.base_states_ = space.states;
  g.base_edges_ = space.edges;
  g.base_final_.assign(space.final_state.begin(), space.final_state.end());
  g.live_states_.resize(space.states.size());
  for (std::size_t s = 0; s < space.states.size(); ++s) g.live_states_[s] = static_cast<int>(s);
  g.initial_live_ = space.initial;
  g.classes_ = conflict_sets(g.net_->net());
  g.class_of_ = conflict_class_of(g.net_->net());
  g.index_live_states();
  return g;
}

inline StochasticGame build_restart_game(const StochasticGame& base) {
  if (base.variant() != StochasticGame::Variant::base)
    throw Error("restart game is built from a base game");
  if (base.base_final_[0])
    throw InitialIsFinal("initial marking is final; restart game is degenerate");
  StochasticGame g;
  g.net_ = base.net_;
  g.variant_ = StochasticGame::Variant::restart;
  g.base_states_ = base.base_states_;
  g.base_edges_ = base.base_edges_;
  g.base_final_ = base.base_final_;
  for (std::size_t s = 0; s < g.base_states_.size(); ++s)
    if (!g.base_final_[s]) g.live_states_.push_back(static_cast<int>(s));
  g.initial_live_ = 0;  // base initial is state 0 and never final here
  g.classes_ = base.classes_;
  g.class_of_ = base.class_of_;
  g.index_live_states();
  return g;
}

}  // namespace petrigame
