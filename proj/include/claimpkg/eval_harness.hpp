#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "claimpkg/annotation.hpp"
#include "claimpkg/generation.hpp"
#include "claimpkg/kg_store.hpp"
#include "claimpkg/pseudo_graph.hpp"
#include "claimpkg/reasoning_client.hpp"
#include "claimpkg/subgraph_retrieval.hpp"

#include "json.hpp"

namespace claimpkg {

// Fraction of gold triples reproduced by p. Both sides are canonicalized;
// placeholder indices match after renumbering. Empty gold counts as fully
// covered.
double coverage(const PseudoSubgraph& p, const PseudoSubgraph& q);
double coverage(const std::vector<PseudoSubgraph>& beams,
                const PseudoSubgraph& q);

// Fraction of distinct named entities that exist in the KG; placeholders
// are excluded. No named entities counts as 1.0.
double entity_correctness(const PseudoSubgraph& p, const KnowledgeGraph& g);
double entity_correctness(const std::vector<PseudoSubgraph>& beams,
                          const KnowledgeGraph& g);

// Distinct triples across all beams, after canonicalization.
std::size_t unique_triplet_count(const std::vector<PseudoSubgraph>& graphs);

// Produces candidate pseudo-subgraphs for a claim. Implementations append
// to diagnostics instead of throwing for recoverable problems.
class PseudoGraphGenerator {
 public:
  virtual ~PseudoGraphGenerator() = default;
  virtual std::vector<PseudoSubgraph> generate(
      const std::string& claim, std::vector<std::string>& diagnostics) const = 0;
};

// Trie-constrained beam search over a local model. Beams that fail to
// parse are dropped with a diagnostic; entity validity is guaranteed by
// construction.
class BeamSearchGenerator : public PseudoGraphGenerator {
 public:
  BeamSearchGenerator(const LanguageModel& lm, const EntityTrie& trie,
                      const Tokenizer& tok, DecoderConfig cfg = {})
      : lm_(lm), trie_(trie), tok_(tok), cfg_(cfg) {}
  std::vector<PseudoSubgraph> generate(
      const std::string& claim,
      std::vector<std::string>& diagnostics) const override;

 private:
  const LanguageModel& lm_;
  const EntityTrie& trie_;
  const Tokenizer& tok_;
  DecoderConfig cfg_;
};

// Canned raw beams per claim; unmatched claims yield nothing.
class ScriptedGenerator : public PseudoGraphGenerator {
 public:
  explicit ScriptedGenerator(const KnowledgeGraph* kg = nullptr) : kg_(kg) {}
  void add(std::string claim, std::vector<std::string> raw_beams);
  std::vector<PseudoSubgraph> generate(
      const std::string& claim,
      std::vector<std::string>& diagnostics) const override;

 private:
  const KnowledgeGraph* kg_;
  std::map<std::string, std::vector<std::string>> beams_;
};

// Few-shot prompting of a chat model; no entity guarantees.
class FewshotGenerator : public PseudoGraphGenerator {
 public:
  explicit FewshotGenerator(const ChatBackend& backend,
                            const KnowledgeGraph* kg = nullptr)
      : backend_(backend), kg_(kg) {}
  std::vector<PseudoSubgraph> generate(
      const std::string& claim,
      std::vector<std::string>& diagnostics) const override;

 private:
  const ChatBackend& backend_;
  const KnowledgeGraph* kg_;
};

// Full pipeline for one claim: generate, retrieve, reason. Transport
// errors from the reasoner propagate; everything else degrades into
// diagnostics (an unparseable reasoner reply defaults to Refuted).
VerificationResult verify_claim(const std::string& claim,
                                const KnowledgeGraph& kg,
                                const PseudoGraphGenerator& generator,
                                const RelationScorer& scorer,
                                const ChatBackend& reasoner,
                                const RetrievalConfig& retrieval = {});

struct DatasetRecord {
  std::string claim;
  std::optional<Verdict> gold;
  std::string category;
  std::vector<std::string> entities;
  std::vector<EvidencePath> evidence;  // source of the gold graph
};

DatasetRecord dataset_record_from_json(const nlohmann::json& j);

struct LoadedDataset {
  std::vector<DatasetRecord> records;
  std::size_t skipped = 0;
  std::vector<std::string> errors;
};

LoadedDataset load_dataset(const std::string& path);

struct EvalConfig {
  RetrievalConfig retrieval;
  int workers = 4;
  std::vector<std::string> categories;  // empty: no filter
  bool support_predicted_only = false;  // aggregate only Supported verdicts
};

struct ClaimOutcome {
  std::string claim;
  std::string category;
  bool skipped = false;
  std::string error;
  Verdict verdict = Verdict::Refuted;
  std::optional<bool> correct;
  double entity_correctness = 1.0;
  std::optional<double> coverage;
  std::size_t unique_triplets = 0;
  std::size_t evidence_size = 0;
};

struct MetricsReport {
  std::size_t total = 0;
  std::size_t evaluated = 0;
  std::size_t skipped = 0;
  std::optional<double> accuracy;
  std::map<std::string, double> category_accuracy;
  std::map<std::string, std::size_t> category_counts;
  double entity_correctness_mean = 1.0;
  std::optional<double> coverage_mean;
  double unique_triplet_mean = 0.0;
  double support_predicted_rate = 0.0;
  std::vector<ClaimOutcome> outcomes;  // dataset order
};

MetricsReport run_eval(const std::vector<DatasetRecord>& records,
                       const KnowledgeGraph& kg,
                       const PseudoGraphGenerator& generator,
                       const RelationScorer& scorer,
                       const ChatBackend& reasoner, const EvalConfig& cfg);

// Stable key order and formatting; two identical runs give identical bytes.
nlohmann::ordered_json report_to_json(const MetricsReport& report);

// Aligned text table: one row per category, then the average row.
std::string report_table(const MetricsReport& report);

}  // namespace claimpkg
