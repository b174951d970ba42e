#pragma once

#include <boost/property_tree/ptree.hpp>
#include <boost/property_tree/xml_parser.hpp>

#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "petrigame/errors.hpp"
#include "petrigame/petri.hpp"

namespace petrigame {

struct PnmlDocument {
  PetriNet net;
  Marking initial;
  std::string net_id;
};

namespace detail {

inline const boost::property_tree::ptree* find_single_net(const boost::property_tree::ptree& root) {
  const auto pnml = root.get_child_optional("pnml");
  if (!pnml) throw ParseError("no <pnml> element");
  const boost::property_tree::ptree* net = nullptr;
  for (const auto& [key, child] : *pnml) {
    if (key != "net") continue;
    if (net) throw UnsupportedFeature("exactly one <net> element is supported");
    net = &child;
  }
  if (!net) throw ParseError("no <net> element");
  return net;
}

}  // namespace detail

/// Parses the supported PNML subset: one net, at most one page, arcs of
/// weight one, 0/1 initial markings.
inline PnmlDocument parse_pnml(const std::string& xml_text) {
  namespace pt = boost::property_tree;
  pt::ptree root;
  try {
    std::istringstream in(xml_text);
    pt::read_xml(in, root, pt::xml_parser::trim_whitespace);
  } catch (const pt::xml_parser_error& e) {
    throw ParseError("PNML syntax error at line " + std::to_string(e.line()) + ": " +
                     e.message());
  }
  const pt::ptree* net_node = detail::find_single_net(root);
  const std::string net_id = net_node->get<std::string>("<xmlattr>.id", "net0");

  // Elements may sit directly under <net> or inside a single <page>.
  std::vector<const pt::ptree*> element_scopes{net_node};
  int pages = 0;
  for (const auto& [key, child] : *net_node) {
    if (key != "page") continue;
    if (++pages > 1) throw UnsupportedFeature("multiple <page> elements are not supported");
    element_scopes.push_back(&child);
  }

  std::vector<std::string> places;
  std::map<std::string, int> initial_tokens;
  struct ArcSpec {
    std::string id, source, target;
  };
  std::vector<std::string> transition_ids;
  std::vector<ArcSpec> arcs;
  for (const pt::ptree* scope : element_scopes) {
    for (const auto& [key, child] : *scope) {
      if (key == "place") {
        const auto id = child.get_optional<std::string>("<xmlattr>.id");
        if (!id) throw ParseError("place without id");
        places.push_back(*id);
        const auto tokens = child.get_optional<std::string>("initialMarking.text");
        if (tokens) {
          int count = 0;
          try {
            count = std::stoi(*tokens);
          } catch (const std::exception&) {
            throw ParseError("bad initial marking for place '" + *id + "'");
          }
          if (count < 0 || count > 1)
            throw UnsupportedFeature("initial marking of place '" + *id +
                                     "' must be 0 or 1 (safe nets only)");
          initial_tokens[*id] = count;
        }
      } else if (key == "transition") {
        const auto id = child.get_optional<std::string>("<xmlattr>.id");
        if (!id) throw ParseError("transition without id");
        transition_ids.push_back(*id);
      } else if (key == "arc") {
        ArcSpec arc;
        arc.id = child.get<std::string>("<xmlattr>.id", "");
        const auto source = child.get_optional<std::string>("<xmlattr>.source");
        const auto target = child.get_optional<std::string>("<xmlattr>.target");
        if (!source || !target) throw ParseError("arc '" + arc.id + "' lacks source or target");
        arc.source = *source;
        arc.target = *target;
        const auto weight = child.get_optional<std::string>("inscription.text");
        if (weight && *weight != "1")
          throw UnsupportedFeature("arc '" + arc.id + "' has weight " + *weight +
                                   "; only weight 1 is supported");
        arcs.push_back(std::move(arc));
      }
    }
  }
  if (places.empty()) throw ParseError("net has no places");

  std::map<std::string, TransitionSpec> transitions;
  for (const std::string& id : transition_ids) {
    if (transitions.count(id)) throw ParseError("duplicate transition id '" + id + "'");
    transitions[id] = TransitionSpec{id, {}, {}};
  }
  std::map<std::string, bool> is_place;
  for (const std::string& id : places) {
    if (is_place.count(id)) throw ParseError("duplicate place id '" + id + "'");
    is_place[id] = true;
  }
  for (const ArcSpec& arc : arcs) {
    const bool source_place = is_place.count(arc.source) > 0;
    const bool target_place = is_place.count(arc.target) > 0;
    const bool source_transition = transitions.count(arc.source) > 0;
    const bool target_transition = transitions.count(arc.target) > 0;
    if (source_place && target_transition)
      transitions[arc.target].pre.push_back(arc.source);
    else if (source_transition && target_place)
      transitions[arc.source].post.push_back(arc.target);
    else
      throw ParseError("arc '" + arc.id + "' must connect a place and a transition (" +
                       arc.source + " -> " + arc.target + ")");
  }

  std::vector<TransitionSpec> specs;
  specs.reserve(transitions.size());
  for (auto& [id, spec] : transitions) specs.push_back(std::move(spec));
  std::vector<std::string> marked;
  for (const auto& [id, count] : initial_tokens)
    if (count == 1) marked.push_back(id);
  try {
    PetriNet net(places, std::move(specs));
    Marking initial = marking_of(net, marked);
    return PnmlDocument{std::move(net), std::move(initial), net_id};
  } catch (const InvalidNet& e) {
    throw ParseError(std::string("invalid net: ") + e.what());
  }
}

inline PnmlDocument parse_pnml_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_pnml(buffer.str());
}

namespace detail {
inline std::string xml_escape(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '&': out += "&amp;"; break;
      case '<': out += "&lt;"; break;
      case '>': out += "&gt;"; break;
      case '"': out += "&quot;"; break;
      case '\'': out += "&apos;"; break;
      default: out += c;
    }
  }
  return out;
}
}  // namespace detail

/// Deterministic writer for the same subset; parse_pnml(write_pnml(..)) is
/// the identity on supported nets.
inline std::string write_pnml(const PetriNet& net, const Marking& initial,
                              const std::string& net_id = "net0") {
  std::ostringstream out;
  out << "<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n";
  out << "<pnml xmlns=\"http://www.pnml.org/version-2009/grammar/pnml\">\n";
  out << "  <net id=\"" << detail::xml_escape(net_id)
      << "\" type=\"http://www.pnml.org/version-2009/grammar/ptnet\">\n";
  for (int p = 0; p < net.place_count(); ++p) {
    out << "    <place id=\"" << detail::xml_escape(net.place_id(p)) << "\">";
    if (initial.contains(p)) out << "<initialMarking><text>1</text></initialMarking>";
    out << "</place>\n";
  }
  for (int t = 0; t < net.transition_count(); ++t)
    out << "    <transition id=\"" << detail::xml_escape(net.transition_id(t)) << "\"/>\n";
  int arc = 0;
  for (int t = 0; t < net.transition_count(); ++t) {
    for (int p : net.pre(t))
      out << "    <arc id=\"a" << arc++ << "\" source=\"" << detail::xml_escape(net.place_id(p))
          << "\" target=\"" << detail::xml_escape(net.transition_id(t)) << "\"/>\n";
    for (int p : net.post(t))
      out << "    <arc id=\"a" << arc++ << "\" source=\""
          << detail::xml_escape(net.transition_id(t)) << "\" target=\""
          << detail::xml_escape(net.place_id(p)) << "\"/>\n";
  }
  out << "  </net>\n</pnml>\n";
  return out.str();
}

}  // namespace petrigame
