#pragma once

#include <map>
#include <string>
#include <vector>

#include "claimpkg/kg_store.hpp"
#include "claimpkg/pseudo_graph.hpp"
#include "claimpkg/relation_scoring.hpp"

namespace claimpkg {

struct RetrievalConfig {
  int k1 = 3;  // candidates kept per anchor set
  int k2 = 1;  // relations kept per connected complete triplet
  std::size_t hub_cap = kDefaultHubCap;
};

// Direction-annotated evidence triple: when relation starts with "~",
// the stored KG triple is (object, relation without "~", subject).
struct EvidenceTriple {
  std::string subject;
  std::string relation;
  std::string object;

  bool operator==(const EvidenceTriple&) const = default;
  auto operator<=>(const EvidenceTriple&) const = default;
};

struct EvidenceSubgraph {
  std::vector<EvidenceTriple> triples;  // first-occurrence order, deduped
  std::vector<std::string> warnings;
};

struct Candidate {
  std::string entity;
  std::string relation;  // best-scoring annotated edge to the anchor
  double score = 0.0;    // per-set score (max over parallel edges)
};

struct CandidateSet {
  std::string anchor;
  std::string anchor_relation;  // pseudo relation from the anchor's side
  std::vector<Candidate> candidates;  // score desc, ties by entity label
};

// Scores every KG neighbor of e against pseudo relation r; the per-set
// score of a neighbor is the max similarity over the annotated relations
// connecting it to e.
CandidateSet get_candidates_and_scores(const KnowledgeGraph& g,
                                       const std::string& e,
                                       const std::string& r,
                                       const RelationScorer& scorer,
                                       std::size_t hub_cap = kDefaultHubCap);

// Global score of an entity: sum of its per-set scores over the sets
// that contain it.
std::map<std::string, double> aggregate_global_score(
    const std::vector<CandidateSet>& sets);

// From each set, the top-k1 candidates by global score (ties by entity
// label), emitted as anchor-first annotated triples; union preserves
// first-occurrence order.
std::vector<EvidenceTriple> rank_top_k(
    const std::vector<CandidateSet>& sets,
    const std::map<std::string, double>& global, int k1);

EvidenceSubgraph retrieve_incomplete(const KnowledgeGraph& g,
                                     const std::vector<PseudoTriple>& incomplete,
                                     const RetrievalConfig& cfg,
                                     const RelationScorer& scorer);

EvidenceSubgraph retrieve_complete(const KnowledgeGraph& g,
                                   const std::vector<PseudoTriple>& complete,
                                   const RetrievalConfig& cfg,
                                   const RelationScorer& scorer);

EvidenceSubgraph retrieve_subgraph(const KnowledgeGraph& g,
                                   const std::vector<PseudoSubgraph>& graphs,
                                   const RetrievalConfig& cfg,
                                   const RelationScorer& scorer);

std::string serialize_evidence(const EvidenceSubgraph& s);

}  // namespace claimpkg
