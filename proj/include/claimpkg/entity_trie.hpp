#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "claimpkg/tokenizer.hpp"

namespace claimpkg {

// Token-sequence trie over the KG entity lexicon. Immutable after build;
// lookups are safe from any number of threads.
class EntityTrie {
 public:
  struct LookupResult {
    std::vector<TokenId> allowed;
    bool terminal = false;
  };

  // Throws BuildError when a label tokenizes to the empty sequence or
  // fails the tokenizer round-trip.
  static EntityTrie build(const std::vector<std::string>& entities,
                          const Tokenizer& tok);

  LookupResult lookup(std::span<const TokenId> prefix) const;
  bool contains(std::span<const TokenId> seq) const;
  std::size_t node_count() const { return nodes_.size(); }
  std::size_t entity_count() const { return entity_count_; }

  void save(const std::string& path) const;
  static EntityTrie load(const std::string& path);

 private:
  struct Node {
    std::vector<std::pair<TokenId, uint32_t>> children;  // sorted by token
    bool terminal = false;
  };

  const Node* walk(std::span<const TokenId> seq) const;
  uint32_t child_or_add(uint32_t node, TokenId token);

  std::vector<Node> nodes_{Node{}};
  std::size_t entity_count_ = 0;
};

// Bundles a trie with the tokenizer whose ids it was built over; this is
// what the trie snapshot file stores.
struct TrieSnapshot {
  PieceTokenizer tokenizer;
  EntityTrie trie;

  void save(const std::string& path) const;
  static TrieSnapshot load(const std::string& path);
};

}  // namespace claimpkg
