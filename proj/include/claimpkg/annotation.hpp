#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "claimpkg/pseudo_graph.hpp"
#include "claimpkg/reasoning_client.hpp"

#include "json.hpp"

namespace claimpkg {

// Source-side evidence: a relation path between two entities. Each hop may
// carry a leading "~".
struct EvidencePath {
  std::string head;
  std::vector<std::string> relations;
  std::string tail;
};

// One dataset record. `verdict_label` keeps the raw gold string; categories
// and other extras stay in the eval layer.
struct AnnotationRecord {
  std::string claim;
  std::string verdict_label;
  std::vector<std::string> entities;
  std::vector<EvidencePath> evidence;
};

AnnotationRecord record_from_json(const nlohmann::json& j);
nlohmann::json record_to_json(const AnnotationRecord& r);

struct TrainingExample {
  std::string input;  // claim text, verbatim
  std::string label;  // raw output grammar, canonical unknown order
};

// Splits an n-hop path into n chained triples through n-1 fresh
// placeholders, starting the numbering at next_unknown. Returns the triples
// and the updated counter.
std::pair<std::vector<PseudoTriple>, int> decompose_path(const EvidencePath& p,
                                                         int next_unknown);

struct EntityPartition {
  std::vector<std::string> in_claim;
  std::vector<std::string> out_of_claim;
  std::vector<std::string> diagnostics;
};

class EntityClassifier {
 public:
  virtual ~EntityClassifier() = default;
  virtual EntityPartition classify(
      const std::string& claim, const std::vector<std::string>& entities) const = 0;
};

// Offline default: an entity is in-claim when the claim contains its
// normalized form, or that form with a trailing parenthetical qualifier
// removed. Case-insensitive.
class SubstringClassifier : public EntityClassifier {
 public:
  EntityPartition classify(
      const std::string& claim,
      const std::vector<std::string>& entities) const override;
};

std::string build_entity_prompt(const std::string& claim,
                                const std::vector<std::string>& entities);

// Asks a chat model to partition the entities; anything the model drops,
// garbles, or fails on falls back to the offline matcher with a diagnostic.
class RemoteClassifier : public EntityClassifier {
 public:
  explicit RemoteClassifier(const ChatBackend& backend) : backend_(backend) {}
  EntityPartition classify(
      const std::string& claim,
      const std::vector<std::string>& entities) const override;

 private:
  const ChatBackend& backend_;
  SubstringClassifier fallback_;
};

// Builds the (claim, pseudo-subgraph label) pair: decompose every path
// (paths sharing a first hop share its placeholder), replace out-of-claim
// entities with placeholders, then optionally shuffle with the seed while
// keeping first occurrences of placeholder indices in ascending order.
// Without a seed the construction order is kept.
TrainingExample build_training_example(const AnnotationRecord& record,
                                       const EntityClassifier& classifier,
                                       std::optional<uint64_t> seed = {});

struct AnnotateStats {
  std::size_t written = 0;
  std::size_t skipped = 0;
  std::vector<std::string> errors;  // one per skipped record
};

// JSONL in, JSONL {"input","label"} out.
AnnotateStats annotate_file(const std::string& in_path,
                            const std::string& out_path,
                            const EntityClassifier& classifier,
                            std::optional<uint64_t> seed = {});

}  // namespace claimpkg
