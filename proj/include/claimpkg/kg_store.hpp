#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

#include "claimpkg/errors.hpp"

namespace claimpkg {

// Canonicalizes an entity/relation label: underscores become spaces,
// camelCase boundaries are split (the uppercase letter is lowercased),
// whitespace is collapsed and trimmed. Idempotent.
std::string normalize_label(std::string_view raw);

// Toggles the "~" inverse marker on a relation string.
std::string toggle_inverse(const std::string& relation);

struct Triple {
  std::string head;
  std::string relation;
  std::string tail;

  bool operator==(const Triple&) const = default;
  auto operator<=>(const Triple&) const = default;
};

inline constexpr std::size_t kDefaultHubCap = 10000;

// Read-only triple store with adjacency and pair indices. Built once,
// then safe for concurrent readers.
class KnowledgeGraph {
 public:
  static KnowledgeGraph load_tsv(std::istream& in);
  static KnowledgeGraph load_tsv_file(const std::string& path);
  static KnowledgeGraph from_triples(const std::vector<Triple>& raw);

  void save_index(const std::string& path) const;
  static KnowledgeGraph load_index(const std::string& path);

  bool has_entity(const std::string& label) const;
  const std::vector<std::string>& entities() const { return entities_; }
  const std::vector<std::string>& relations() const { return relations_; }
  std::size_t triple_count() const { return triples_.size(); }
  std::vector<Triple> all_triples() const;

  // True when (head, relation, tail) is a stored triple (canonical
  // direction, no inverse marker).
  bool has_triple(const std::string& head, const std::string& relation,
                  const std::string& tail) const;

  // True when the direction-annotated edge holds: relation may carry a
  // leading "~", meaning (tail', rel, head') is stored reversed.
  bool has_edge(const std::string& subject, const std::string& relation,
                const std::string& object) const;

  // All (relation, entity) pairs adjacent to e. Outgoing edges keep the
  // plain relation name; incoming edges are annotated with "~". Sorted by
  // annotated relation then entity; truncated deterministically at cap.
  std::vector<std::pair<std::string, std::string>> neighbors(
      const std::string& e, std::size_t cap = kDefaultHubCap) const;

  // Relations linking e1 to e2 (plain) and e2 to e1 ("~"-annotated),
  // sorted ascending. Empty when unconnected.
  std::vector<std::string> connected_relations(const std::string& e1,
                                               const std::string& e2) const;

 private:
  struct Edge {
    uint32_t relation;
    uint32_t other;
    bool inverse;  // true: edge stored as (other, relation, self)
  };

  void add_triple_ids(uint32_t h, uint32_t r, uint32_t t);
  void build_indices();
  uint32_t intern_entity(const std::string& label);
  uint32_t intern_relation(const std::string& label);
  const uint32_t* find_entity(const std::string& label) const;

  std::vector<std::string> entities_;
  std::vector<std::string> relations_;
  std::unordered_map<std::string, uint32_t> entity_ids_;
  std::unordered_map<std::string, uint32_t> relation_ids_;
  std::vector<std::array<uint32_t, 3>> triples_;  // sorted (h, r, t) ids
  std::vector<std::vector<Edge>> adjacency_;      // per entity, sorted
  std::unordered_map<uint64_t, std::vector<std::pair<uint32_t, uint32_t>>>
      pair_index_;  // key (min,max) -> [(relation, head)]
};

}  // namespace claimpkg
