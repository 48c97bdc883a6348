#pragma once

#include <optional>
#include <string>
#include <vector>

#include "claimpkg/kg_store.hpp"

#include "json.hpp"

namespace claimpkg {

// A pseudo-subgraph endpoint: a KG entity label or an unknown_i
// placeholder awaiting resolution.
struct EntityRef {
  static EntityRef known(std::string label) {
    return EntityRef{true, std::move(label), -1};
  }
  static EntityRef unknown(int index) { return EntityRef{false, {}, index}; }

  bool is_known = false;
  std::string label;       // valid when is_known
  int unknown_index = -1;  // valid when !is_known

  bool operator==(const EntityRef&) const = default;
  auto operator<=>(const EntityRef&) const = default;
};

struct PseudoTriple {
  EntityRef head;
  std::string relation;  // may carry a leading "~"
  EntityRef tail;

  bool operator==(const PseudoTriple&) const = default;
  auto operator<=>(const PseudoTriple&) const = default;

  bool has_unknown() const { return !head.is_known || !tail.is_known; }
  bool double_unknown() const { return !head.is_known && !tail.is_known; }
};

struct PseudoSubgraph {
  std::vector<PseudoTriple> triples;
  std::optional<double> beam_score;
};

// Parses the raw output grammar: one triplet per line, fields joined by
// " || ", entities wrapped <e>...</e>, placeholders written unknown_<i>.
// When kg is given, every known entity must exist in it.
PseudoSubgraph parse_pseudo_subgraph(const std::string& text,
                                     const KnowledgeGraph* kg = nullptr);

std::string serialize_pseudo_subgraph(const PseudoSubgraph& p);

// Evidence-style plain text form: "(head, relation, tail)" per line.
std::string serialize_entity_ref(const EntityRef& ref);

struct Categorized {
  std::vector<PseudoTriple> complete;
  std::vector<PseudoTriple> incomplete;
};

// Partition preserving order: incomplete = at least one unknown endpoint.
Categorized categorize(const PseudoSubgraph& p);

struct UnknownGroup {
  struct Member {
    std::string entity;    // the known anchor
    std::string relation;  // verbatim pseudo relation, "~" kept
    bool unknown_is_head;  // orientation of the placeholder
  };
  int unknown_index = 0;
  std::vector<Member> members;
};

struct GroupingResult {
  std::vector<UnknownGroup> groups;  // ordered by unknown index
  std::vector<PseudoTriple> skipped;  // double-unknown triples
};

GroupingResult group_by_unknown(const std::vector<PseudoTriple>& incomplete);

// Renumbers unknown indices by first appearance to 0,1,2,... Idempotent.
PseudoSubgraph canonicalize_unknown_indices(const PseudoSubgraph& p);

nlohmann::json pseudo_subgraph_to_json(const PseudoSubgraph& p);
PseudoSubgraph pseudo_subgraph_from_json(const nlohmann::json& j);

}  // namespace claimpkg
