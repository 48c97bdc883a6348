#include "claimpkg/pseudo_graph.hpp"

#include <algorithm>
#include <map>
#include <sstream>

#include "claimpkg/errors.hpp"

namespace claimpkg {

namespace {

std::vector<std::string> split_fields(const std::string& line) {
  static const std::string kSep = " || ";
  std::vector<std::string> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t next = line.find(kSep, pos);
    if (next == std::string::npos) {
      fields.push_back(line.substr(pos));
      break;
    }
    fields.push_back(line.substr(pos, next - pos));
    pos = next + kSep.size();
  }
  return fields;
}

EntityRef parse_entity_field(const std::string& field, std::size_t lineno,
                             const KnowledgeGraph* kg) {
  if (field.size() >= 7 && field.starts_with("<e>") && field.ends_with("</e>")) {
    std::string label = field.substr(3, field.size() - 7);
    if (label.empty()) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": empty entity span");
    }
    if (kg && !kg->has_entity(label)) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": entity not in KG: \"" + label + "\"");
    }
    return EntityRef::known(std::move(label));
  }
  if (field.starts_with("unknown_")) {
    std::string digits = field.substr(8);
    if (digits.empty() ||
        digits.find_first_not_of("0123456789") != std::string::npos) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": malformed unknown token: \"" + field + "\"");
    }
    return EntityRef::unknown(std::stoi(digits));
  }
  throw ParseError("line " + std::to_string(lineno) +
                   ": entity field is neither <e>-wrapped nor unknown_<i>: \"" +
                   field + "\"");
}

}  // namespace

PseudoSubgraph parse_pseudo_subgraph(const std::string& text,
                                     const KnowledgeGraph* kg) {
  PseudoSubgraph out;
  std::istringstream in(text);
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    auto fields = split_fields(line);
    if (fields.size() != 3) {
      throw ParseError("line " + std::to_string(lineno) + ": expected 3 \"" +
                       " || " + "\"-separated fields, got " +
                       std::to_string(fields.size()));
    }
    PseudoTriple triple;
    triple.head = parse_entity_field(fields[0], lineno, kg);
    triple.relation = fields[1];
    triple.tail = parse_entity_field(fields[2], lineno, kg);
    if (triple.relation.empty()) {
      throw ParseError("line " + std::to_string(lineno) + ": empty relation");
    }
    if (!triple.head.is_known && !triple.tail.is_known &&
        triple.head.unknown_index == triple.tail.unknown_index) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": both endpoints are the same unknown index");
    }
    out.triples.push_back(std::move(triple));
  }
  return out;
}

std::string serialize_entity_ref(const EntityRef& ref) {
  if (ref.is_known) return "<e>" + ref.label + "</e>";
  return "unknown_" + std::to_string(ref.unknown_index);
}

std::string serialize_pseudo_subgraph(const PseudoSubgraph& p) {
  std::string out;
  for (const auto& t : p.triples) {
    out += serialize_entity_ref(t.head);
    out += " || ";
    out += t.relation;
    out += " || ";
    out += serialize_entity_ref(t.tail);
    out += '\n';
  }
  return out;
}

Categorized categorize(const PseudoSubgraph& p) {
  Categorized out;
  for (const auto& t : p.triples) {
    (t.has_unknown() ? out.incomplete : out.complete).push_back(t);
  }
  return out;
}

GroupingResult group_by_unknown(const std::vector<PseudoTriple>& incomplete) {
  GroupingResult out;
  std::map<int, UnknownGroup> groups;  // ordered by index
  for (const auto& t : incomplete) {
    if (t.double_unknown()) {
      out.skipped.push_back(t);
      continue;
    }
    if (!t.head.is_known) {
      groups[t.head.unknown_index].members.push_back(
          {t.tail.label, t.relation, /*unknown_is_head=*/true});
    } else {
      groups[t.tail.unknown_index].members.push_back(
          {t.head.label, t.relation, /*unknown_is_head=*/false});
    }
  }
  for (auto& [index, group] : groups) {
    group.unknown_index = index;
    out.groups.push_back(std::move(group));
  }
  return out;
}

PseudoSubgraph canonicalize_unknown_indices(const PseudoSubgraph& p) {
  PseudoSubgraph out = p;
  std::map<int, int> remap;
  auto renumber = [&remap](EntityRef& ref) {
    if (ref.is_known) return;
    auto [it, inserted] =
        remap.emplace(ref.unknown_index, static_cast<int>(remap.size()));
    ref.unknown_index = it->second;
  };
  for (auto& t : out.triples) {
    renumber(t.head);
    renumber(t.tail);
  }
  return out;
}

nlohmann::json pseudo_subgraph_to_json(const PseudoSubgraph& p) {
  nlohmann::json triples = nlohmann::json::array();
  auto ref_json = [](const EntityRef& ref) -> nlohmann::json {
    if (ref.is_known) return ref.label;
    return nlohmann::json{{"unknown", ref.unknown_index}};
  };
  for (const auto& t : p.triples) {
    triples.push_back({{"head", ref_json(t.head)},
                       {"relation", t.relation},
                       {"tail", ref_json(t.tail)}});
  }
  nlohmann::json j{{"triples", triples}};
  if (p.beam_score) j["beam_score"] = *p.beam_score;
  return j;
}

PseudoSubgraph pseudo_subgraph_from_json(const nlohmann::json& j) {
  PseudoSubgraph out;
  auto ref_from = [](const nlohmann::json& v) {
    if (v.is_string()) return EntityRef::known(v.get<std::string>());
    if (v.is_object() && v.contains("unknown")) {
      return EntityRef::unknown(v["unknown"].get<int>());
    }
    throw ParseError("pseudo-subgraph json: bad entity ref");
  };
  for (const auto& t : j.at("triples")) {
    out.triples.push_back(PseudoTriple{ref_from(t.at("head")),
                                       t.at("relation").get<std::string>(),
                                       ref_from(t.at("tail"))});
  }
  if (j.contains("beam_score")) out.beam_score = j["beam_score"].get<double>();
  return out;
}

}  // namespace claimpkg
