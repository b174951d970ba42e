#pragma once

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "petrigame/errors.hpp"
#include "petrigame/petri.hpp"

namespace petrigame {

struct AnnotationResult {
  AnnotatedNet net;
  nlohmann::json metadata;
  /// Reserved schema extension point; accepted and surfaced, no semantics.
  bool has_probability_annotations = false;
};

/// Parses the annotation document:
/// {
///   "roles": ["a", "b"],
///   "transitions": {
///     "t0": { "role": "a", "utilities": { "a": "-1", "b": "1/2" } }
///   },
///   "metadata": { ... }
/// }
/// Omitted utilities are zero; transitions without a role belong to nature.
inline AnnotationResult parse_annotations(const std::string& json_text, const PetriNet& net,
                                          const Marking& initial) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(json_text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError(std::string("annotation JSON: ") + e.what());
  }
  if (!doc.is_object()) throw SchemaError("annotation document must be a JSON object");

  std::vector<std::string> roles;
  if (doc.contains("roles")) {
    if (!doc["roles"].is_array()) throw SchemaError("'roles' must be an array");
    for (const auto& r : doc["roles"]) {
      if (!r.is_string()) throw SchemaError("role ids must be strings");
      roles.push_back(r.get<std::string>());
    }
  }
  std::map<std::string, bool> declared;
  for (const std::string& r : roles) declared[r] = true;

  std::map<std::pair<std::string, std::string>, Rational> utilities;
  std::map<std::string, std::string> assignment;
  if (doc.contains("transitions")) {
    if (!doc["transitions"].is_object()) throw SchemaError("'transitions' must be an object");
    for (const auto& [tid, entry] : doc["transitions"].items()) {
      net.transition_index(tid);  // UnknownTransition on bad ids
      if (!entry.is_object()) throw SchemaError("entry for '" + tid + "' must be an object");
      if (entry.contains("role") && !entry["role"].is_null()) {
        if (!entry["role"].is_string()) throw SchemaError("role of '" + tid + "' must be a string");
        const std::string role = entry["role"].get<std::string>();
        if (!declared.count(role)) throw UnknownRole("undeclared role '" + role + "'");
        assignment[tid] = role;
      }
      if (entry.contains("utilities")) {
        if (!entry["utilities"].is_object())
          throw SchemaError("utilities of '" + tid + "' must be an object");
        for (const auto& [role, value] : entry["utilities"].items()) {
          if (!declared.count(role)) throw UnknownRole("undeclared role '" + role + "'");
          if (!value.is_string())
            throw SchemaError("utility of '" + tid + "' for '" + role +
                              "' must be a rational string");
          try {
            utilities[{role, tid}] = parse_rational(value.get<std::string>());
          } catch (const ParseError& e) {
            throw SchemaError(std::string("bad utility: ") + e.what());
          }
        }
      }
    }
  }

  AnnotationResult result{AnnotatedNet(net, initial, roles, utilities, assignment),
                          nlohmann::json::object(), false};
  if (doc.contains("metadata")) result.metadata = doc["metadata"];
  result.has_probability_annotations = doc.contains("transition_probabilities");
  return result;
}

inline AnnotationResult parse_annotations_file(const std::string& path, const PetriNet& net,
                                               const Marking& initial) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_annotations(buffer.str(), net, initial);
}

/// Single role owning every transition with utility one: the annotation
/// class of the soundness characterization.
inline AnnotatedNet unit_annotation(const PetriNet& net, const Marking& initial,
                                    const std::string& role = "sigma") {
  std::map<std::pair<std::string, std::string>, Rational> utilities;
  std::map<std::string, std::string> assignment;
  for (int t = 0; t < net.transition_count(); ++t) {
    utilities[{role, net.transition_id(t)}] = 1;
    assignment[net.transition_id(t)] = role;
  }
  return AnnotatedNet(net, initial, {role}, utilities, assignment);
}

/// Serializes an annotated net back to the document schema.
inline nlohmann::ordered_json annotations_to_json(const AnnotatedNet& a) {
  nlohmann::ordered_json doc;
  doc["roles"] = a.roles();
  nlohmann::ordered_json transitions = nlohmann::ordered_json::object();
  for (int t = 0; t < a.net().transition_count(); ++t) {
    nlohmann::ordered_json entry = nlohmann::ordered_json::object();
    if (a.owner(t) != AnnotatedNet::kNature) entry["role"] = a.roles()[a.owner(t)];
    nlohmann::ordered_json utilities = nlohmann::ordered_json::object();
    for (int r = 0; r < a.role_count(); ++r)
      if (a.utility(r, t) != 0) utilities[a.roles()[r]] = to_fraction_string(a.utility(r, t));
    if (!utilities.empty()) entry["utilities"] = std::move(utilities);
    if (!entry.empty()) transitions[a.net().transition_id(t)] = std::move(entry);
  }
  doc["transitions"] = std::move(transitions);
  return doc;
}

}  // namespace petrigame
