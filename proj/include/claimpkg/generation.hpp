#pragma once

#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "claimpkg/entity_trie.hpp"
#include "claimpkg/errors.hpp"
#include "claimpkg/tokenizer.hpp"

namespace claimpkg {

class LanguageModel {
 public:
  virtual ~LanguageModel() = default;
  // Probability vector over the vocabulary given the full context
  // (claim tokens followed by generated tokens). Must sum to 1.
  virtual std::vector<double> next_distribution(
      std::span<const TokenId> context) const = 0;
  virtual bool supports_concurrent_calls() const { return true; }
};

// Scripted test double: deterministic distributions selected by the
// longest matching context suffix.
class MockLM : public LanguageModel {
 public:
  explicit MockLM(std::size_t vocab_size) : vocab_size_(vocab_size) {}

  void add_rule(std::vector<TokenId> suffix,
                std::vector<std::pair<TokenId, double>> dist);
  void set_default(std::vector<std::pair<TokenId, double>> dist);

  std::vector<double> next_distribution(
      std::span<const TokenId> context) const override;

 private:
  struct Rule {
    std::vector<TokenId> suffix;
    std::vector<std::pair<TokenId, double>> dist;
  };
  std::vector<double> densify(
      const std::vector<std::pair<TokenId, double>>& sparse) const;

  std::size_t vocab_size_;
  std::vector<Rule> rules_;
  std::vector<std::pair<TokenId, double>> default_dist_;
};

struct DecoderConfig {
  int beam_size = 5;
  int max_length = 256;
  TokenId entity_open = kTokEntityOpen;
  TokenId entity_close = kTokEntityClose;
  TokenId eos = kTokEos;
  // When set, greedy decoding samples from the (masked) distribution
  // instead of taking the argmax.
  std::optional<uint64_t> sample_seed;
};

// Tokens strictly after the most recent unclosed entity-open marker;
// empty when every span is closed.
std::vector<TokenId> extract_prefix(std::span<const TokenId> seq,
                                    TokenId open = kTokEntityOpen,
                                    TokenId close = kTokEntityClose);

// Zeroes every entry outside `allowed` and renormalizes. Returns nullopt
// when the allowed mass is zero (dead end; the caller prunes).
std::optional<std::vector<double>> mask_distribution(
    const std::vector<double>& p, const std::vector<TokenId>& allowed);

struct DecodeOutcome {
  std::vector<TokenId> tokens;  // excludes the trailing EOS
  double score = 0.0;           // length-normalized sum of log-probs
};

// Greedy trie-constrained decoding. Throws
// DeadEndError when the constrained distribution has no mass and
// TruncationError when max_length is hit inside an entity span.
DecodeOutcome constrained_decode(const LanguageModel& lm,
                                 const std::string& claim,
                                 const EntityTrie& trie, const Tokenizer& tok,
                                 const DecoderConfig& cfg);

struct BeamResult {
  std::vector<DecodeOutcome> hypotheses;  // sorted by score desc
  std::vector<std::string> diagnostics;
};

// Length-normalized beam search where each hypothesis carries its own
// constraint state. Dead-end hypotheses are dropped silently.
BeamResult beam_decode(const LanguageModel& lm, const std::string& claim,
                       const EntityTrie& trie, const Tokenizer& tok,
                       const DecoderConfig& cfg);

}  // namespace claimpkg
