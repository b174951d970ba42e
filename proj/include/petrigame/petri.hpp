#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "petrigame/errors.hpp"
#include "petrigame/rational.hpp"

namespace petrigame {

/// A safe marking, kept as a strictly ascending set of place indices.
struct Marking {
  std::vector<int> places;

  bool contains(int p) const {
    return std::binary_search(places.begin(), places.end(), p);
  }
  bool empty() const { return places.empty(); }
  std::size_t size() const { return places.size(); }
  bool operator==(const Marking&) const = default;
  bool operator<(const Marking& other) const { return places < other.places; }
};

/// A step: set of transitions fired together. Empty step = idle.
struct Step {
  std::vector<int> transitions;  // strictly ascending

  bool empty() const { return transitions.empty(); }
  std::size_t size() const { return transitions.size(); }
  bool contains(int t) const {
    return std::binary_search(transitions.begin(), transitions.end(), t);
  }
  bool operator==(const Step&) const = default;
  bool operator<(const Step& other) const {
    return transitions < other.transitions;
  }
};

struct TransitionSpec {
  std::string id;
  std::vector<std::string> pre;
  std::vector<std::string> post;
};

namespace detail {
inline std::vector<int> sorted_unique(std::vector<int> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}
}  // namespace detail

/// An elementary net system. Place and transition identifiers are opaque
/// strings; both index spaces are ordered lexicographically so that every
/// enumeration in the library is reproducible.
class PetriNet {
 public:
  PetriNet(std::vector<std::string> places, std::vector<TransitionSpec> transitions) {
    std::sort(places.begin(), places.end());
    if (std::adjacent_find(places.begin(), places.end()) != places.end())
      throw InvalidNet("duplicate place identifier");
    place_ids_ = std::move(places);
    std::sort(transitions.begin(), transitions.end(),
              [](const TransitionSpec& a, const TransitionSpec& b) { return a.id < b.id; });
    for (std::size_t k = 0; k + 1 < transitions.size(); ++k)
      if (transitions[k].id == transitions[k + 1].id)
        throw InvalidNet("duplicate transition identifier '" + transitions[k].id + "'");
    for (const TransitionSpec& spec : transitions) {
      if (spec.pre.empty() || spec.post.empty())
        throw InvalidNet("transition '" + spec.id + "' must have non-empty pre- and post-set");
      transition_ids_.push_back(spec.id);
      pre_.push_back(to_place_indices(spec.pre, spec.id));
      post_.push_back(to_place_indices(spec.post, spec.id));
    }
  }

  int place_count() const { return static_cast<int>(place_ids_.size()); }
  int transition_count() const { return static_cast<int>(transition_ids_.size()); }

  const std::string& place_id(int p) const { return place_ids_.at(p); }
  const std::string& transition_id(int t) const { return transition_ids_.at(t); }
  const std::vector<std::string>& place_ids() const { return place_ids_; }
  const std::vector<std::string>& transition_ids() const { return transition_ids_; }

  int place_index(const std::string& id) const {
    const auto it = std::lower_bound(place_ids_.begin(), place_ids_.end(), id);
    if (it == place_ids_.end() || *it != id) throw UnknownPlace("unknown place '" + id + "'");
    return static_cast<int>(it - place_ids_.begin());
  }
  int transition_index(const std::string& id) const {
    const auto it = std::lower_bound(transition_ids_.begin(), transition_ids_.end(), id);
    if (it == transition_ids_.end() || *it != id)
      throw UnknownTransition("unknown transition '" + id + "'");
    return static_cast<int>(it - transition_ids_.begin());
  }

  const std::vector<int>& pre(int t) const { return pre_.at(t); }
  const std::vector<int>& post(int t) const { return post_.at(t); }

 private:
  std::vector<int> to_place_indices(const std::vector<std::string>& ids,
                                    const std::string& owner) const {
    std::vector<int> out;
    out.reserve(ids.size());
    for (const std::string& id : ids) {
      try {
        out.push_back(place_index(id));
      } catch (const UnknownPlace&) {
        throw InvalidNet("transition '" + owner + "' references undeclared place '" + id + "'");
      }
    }
    return detail::sorted_unique(out);
  }

  std::vector<std::string> place_ids_;
  std::vector<std::string> transition_ids_;
  std::vector<std::vector<int>> pre_;
  std::vector<std::vector<int>> post_;
};

inline Marking marking_of(const PetriNet& net, const std::vector<std::string>& place_ids) {
  std::vector<int> idx;
  idx.reserve(place_ids.size());
  for (const std::string& id : place_ids) idx.push_back(net.place_index(id));
  return Marking{detail::sorted_unique(std::move(idx))};
}

inline Step step_of(const PetriNet& net, const std::vector<std::string>& transition_ids) {
  std::vector<int> idx;
  idx.reserve(transition_ids.size());
  for (const std::string& id : transition_ids) idx.push_back(net.transition_index(id));
  return Step{detail::sorted_unique(std::move(idx))};
}

inline std::string marking_label(const PetriNet& net, const Marking& m) {
  std::string out;
  for (int p : m.places) {
    if (!out.empty()) out += "+";
    out += net.place_id(p);
  }
  return out.empty() ? "<empty>" : out;
}

inline std::string step_label(const PetriNet& net, const Step& s) {
  std::string out = "{";
  bool first = true;
  for (int t : s.transitions) {
    if (!first) out += ",";
    out += net.transition_id(t);
    first = false;
  }
  return out + "}";
}

inline bool is_subset(const std::vector<int>& sub, const std::vector<int>& sup) {
  return std::includes(sup.begin(), sup.end(), sub.begin(), sub.end());
}

/// Transitions whose whole pre-set is marked.
inline std::vector<int> enabled(const PetriNet& net, const Marking& m) {
  std::vector<int> out;
  for (int t = 0; t < net.transition_count(); ++t)
    if (is_subset(net.pre(t), m.places)) out.push_back(t);
  return out;
}

inline bool is_enabled(const PetriNet& net, const Marking& m, int t) {
  return is_subset(net.pre(t), m.places);
}

/// Whether a whole step is enabled: in the safe representation the pre-sets
/// of the members must be pairwise disjoint and jointly contained in m.
inline bool is_step_enabled(const PetriNet& net, const Marking& m, const Step& s) {
  std::vector<int> consumed;
  for (int t : s.transitions) {
    if (!is_subset(net.pre(t), m.places)) return false;
    consumed.insert(consumed.end(), net.pre(t).begin(), net.pre(t).end());
  }
  std::sort(consumed.begin(), consumed.end());
  return std::adjacent_find(consumed.begin(), consumed.end()) == consumed.end();
}

/// Fires a step. Throws StepNotEnabled when the token demand is not met and
/// SafetyViolation when some place would end up with two tokens.
inline Marking fire_step(const PetriNet& net, const Marking& m, const Step& s) {
  if (!is_step_enabled(net, m, s))
    throw StepNotEnabled("step " + step_label(net, s) + " not enabled at " +
                         marking_label(net, m));
  std::vector<int> consumed;
  std::vector<int> produced;
  for (int t : s.transitions) {
    consumed.insert(consumed.end(), net.pre(t).begin(), net.pre(t).end());
    produced.insert(produced.end(), net.post(t).begin(), net.post(t).end());
  }
  std::sort(consumed.begin(), consumed.end());
  std::sort(produced.begin(), produced.end());
  if (std::adjacent_find(produced.begin(), produced.end()) != produced.end())
    throw SafetyViolation("step " + step_label(net, s) + " produces a place twice");
  std::vector<int> rest;
  std::set_difference(m.places.begin(), m.places.end(), consumed.begin(), consumed.end(),
                      std::back_inserter(rest));
  std::vector<int> overlap;
  std::set_intersection(rest.begin(), rest.end(), produced.begin(), produced.end(),
                        std::back_inserter(overlap));
  if (!overlap.empty())
    throw SafetyViolation("firing " + step_label(net, s) + " at " + marking_label(net, m) +
                          " puts a second token into '" + net.place_id(overlap.front()) + "'");
  std::vector<int> result;
  std::set_union(rest.begin(), rest.end(), produced.begin(), produced.end(),
                 std::back_inserter(result));
  return Marking{std::move(result)};
}

/// Extended free choice: intersecting pre-sets coincide.
inline bool is_extended_free_choice(const PetriNet& net) {
  for (int t = 0; t < net.transition_count(); ++t)
    for (int u = t + 1; u < net.transition_count(); ++u) {
      std::vector<int> common;
      std::set_intersection(net.pre(t).begin(), net.pre(t).end(), net.pre(u).begin(),
                            net.pre(u).end(), std::back_inserter(common));
      if (!common.empty() && net.pre(t) != net.pre(u)) return false;
    }
  return true;
}

/// Partition of the transitions into conflict sets (classes of the
/// pre-set-intersection relation). Requires extended free choice, which is
/// what makes the relation transitive.
inline std::vector<std::vector<int>> conflict_sets(const PetriNet& net) {
  if (!is_extended_free_choice(net))
    throw NotFreeChoice("conflict sets need an extended-free-choice net");
  std::map<std::vector<int>, std::vector<int>> by_preset;
  for (int t = 0; t < net.transition_count(); ++t) by_preset[net.pre(t)].push_back(t);
  std::vector<std::vector<int>> classes;
  classes.reserve(by_preset.size());
  for (auto& [pre, members] : by_preset) classes.push_back(std::move(members));
  std::sort(classes.begin(), classes.end());
  return classes;
}

/// Class index per transition, aligned with conflict_sets(net).
inline std::vector<int> conflict_class_of(const PetriNet& net) {
  const auto classes = conflict_sets(net);
  std::vector<int> of(net.transition_count(), -1);
  for (std::size_t c = 0; c < classes.size(); ++c)
    for (int t : classes[c]) of[t] = static_cast<int>(c);
  return of;
}

struct WorkflowShape {
  int initial_place = -1;
  int final_place = -1;
};

/// A net plus utility table and partial role assignment. Unassigned
/// transitions belong to nature, a reserved pseudo-role.
class AnnotatedNet {
 public:
  static constexpr int kNature = -1;
  static constexpr const char* kNatureId = "nature";

  AnnotatedNet(PetriNet net, Marking initial, std::vector<std::string> roles,
               const std::map<std::pair<std::string, std::string>, Rational>& utilities,
               const std::map<std::string, std::string>& assignment)
      : net_(std::move(net)), initial_(std::move(initial)) {
    std::sort(roles.begin(), roles.end());
    if (std::adjacent_find(roles.begin(), roles.end()) != roles.end())
      throw SchemaError("duplicate role identifier");
    for (const std::string& r : roles)
      if (r == kNatureId) throw SchemaError("role id 'nature' is reserved");
    roles_ = std::move(roles);
    for (int p : initial_.places)
      if (p < 0 || p >= net_.place_count()) throw InvalidNet("initial marking out of range");
    owner_.assign(net_.transition_count(), kNature);
    for (const auto& [tid, rid] : assignment)
      owner_[net_.transition_index(tid)] = role_index(rid);
    for (const auto& [key, value] : utilities) {
      const int r = role_index(key.first);
      const int t = net_.transition_index(key.second);
      if (value != 0) utility_[{r, t}] = value;
    }
  }

  const PetriNet& net() const { return net_; }
  const Marking& initial() const { return initial_; }
  const std::vector<std::string>& roles() const { return roles_; }
  int role_count() const { return static_cast<int>(roles_.size()); }

  int role_index(const std::string& id) const {
    const auto it = std::lower_bound(roles_.begin(), roles_.end(), id);
    if (it == roles_.end() || *it != id) throw UnknownRole("unknown role '" + id + "'");
    return static_cast<int>(it - roles_.begin());
  }

  /// Role owning a transition, or kNature.
  int owner(int t) const { return owner_.at(t); }

  Rational utility(int role, int t) const {
    const auto it = utility_.find({role, t});
    return it == utility_.end() ? Rational(0) : it->second;
  }

  Rational step_utility(int role, const Step& s) const {
    Rational sum = 0;
    for (int t : s.transitions) sum += utility(role, t);
    return sum;
  }

  /// Name-checked variant used at the API boundary.
  Rational step_utility(const std::string& role, const std::vector<std::string>& step) const {
    const int r = role_index(role);
    return step_utility(r, step_of(net_, step));
  }

  /// Utility vector of a step over all roles (nature excluded; its payoff
  /// is identically zero).
  RatVec step_utility_vector(const Step& s) const {
    RatVec out(roles_.size(), Rational(0));
    for (int t : s.transitions) {
      for (int r = 0; r < role_count(); ++r) {
        const auto it = utility_.find({r, t});
        if (it != utility_.end()) out[r] += it->second;
      }
    }
    return out;
  }

 private:
  PetriNet net_;
  Marking initial_;
  std::vector<std::string> roles_;
  std::vector<int> owner_;
  std::map<std::pair<int, int>, Rational> utility_;  // sparse, zero entries dropped
};

struct StructuralReport {
  bool extended_free_choice = false;
  std::optional<WorkflowShape> workflow;
  // Reachability-dependent checks (soundness) live in the statespace module.
  std::string note = "final-marking reachability checks deferred to soundness analysis";
};

/// Structural predicates only: extended free choice plus the elementary
/// workflow-net shape. The initial place is the initially marked one; the
/// final place is the unique place absent from every pre-set.
inline StructuralReport structural_checks(const AnnotatedNet& a) {
  const PetriNet& net = a.net();
  StructuralReport report;
  report.extended_free_choice = is_extended_free_choice(net);

  std::vector<bool> in_pre(net.place_count(), false);
  std::vector<bool> in_post(net.place_count(), false);
  for (int t = 0; t < net.transition_count(); ++t) {
    for (int p : net.pre(t)) in_pre[p] = true;
    for (int p : net.post(t)) in_post[p] = true;
  }
  bool every_place_adjacent = net.place_count() > 0;
  for (int p = 0; p < net.place_count(); ++p)
    if (!in_pre[p] && !in_post[p]) every_place_adjacent = false;

  std::vector<int> no_pre;
  for (int p = 0; p < net.place_count(); ++p)
    if (!in_pre[p]) no_pre.push_back(p);

  if (every_place_adjacent && no_pre.size() == 1 && a.initial().size() == 1) {
    const int i = a.initial().places.front();
    if (!in_post[i]) report.workflow = WorkflowShape{i, no_pre.front()};
  }
  return report;
}

}  // namespace petrigame
