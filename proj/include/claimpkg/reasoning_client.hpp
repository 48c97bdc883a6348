#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "claimpkg/pseudo_graph.hpp"
#include "claimpkg/subgraph_retrieval.hpp"

namespace claimpkg {

enum class Verdict { Supported, Refuted };

std::string verdict_wire(Verdict v);  // "true" / "false"

struct ChatParams {
  std::string model = "default";
  double temperature = 0.0;
  int max_attempts = 3;
  int backoff_ms = 200;  // doubles per retry
  int timeout_sec = 120;
};

// Single-turn chat transport; implementations must tolerate concurrent
// calls.
class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  virtual std::string complete(const std::string& prompt) const = 0;
};

// OpenAI-chat-completions-compatible client with exponential backoff.
class HttpChatBackend : public ChatBackend {
 public:
  HttpChatBackend(std::string endpoint, std::string api_key, ChatParams params);
  std::string complete(const std::string& prompt) const override;

 private:
  std::string endpoint_;
  std::string api_key_;
  ChatParams params_;
};

// Test/offline double: answers by first matching substring pattern.
class ScriptedChatBackend : public ChatBackend {
 public:
  void add_response(std::string prompt_substring, std::string response);
  void set_default(std::string response);
  std::string complete(const std::string& prompt) const override;

 private:
  std::vector<std::pair<std::string, std::string>> responses_;
  std::optional<std::string> default_;
};

// Renders the general-reasoning prompt over the claim and the serialized
// evidence triples. Byte-deterministic.
std::string build_reasoning_prompt(const std::string& claim,
                                   const EvidenceSubgraph& evidence);

std::string build_fewshot_prompt(const std::string& claim);

struct ParsedVerdict {
  std::string justification;
  Verdict verdict;
};

// Extracts the first JSON object carrying a "verdict" key from raw model
// output (code fences and surrounding prose tolerated).
ParsedVerdict parse_verdict(const std::string& raw);

struct FewshotResult {
  std::vector<PseudoSubgraph> graphs;
  // Per known entity absent from the KG (only when a KG is supplied).
  std::vector<std::string> invalid_entities;
  std::vector<std::string> diagnostics;
};

// Ablation path: few-shot generation without trie guarantees. Entity
// validity failures are reported, not fatal.
FewshotResult fewshot_generate_pseudo_subgraphs(const ChatBackend& backend,
                                                const std::string& claim,
                                                const KnowledgeGraph* kg = nullptr);

struct VerificationResult {
  std::string claim;
  std::vector<PseudoSubgraph> pseudo_subgraphs;
  EvidenceSubgraph evidence;
  std::string justification;
  Verdict verdict = Verdict::Refuted;
  std::vector<std::string> diagnostics;
};

}  // namespace claimpkg
