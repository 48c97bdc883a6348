#pragma once

// Shared fixtures for the unit and acceptance suites: random instance
// builders, an independent brute-force retrieval reference, and a language
// model double that emits grammar-shaped token streams.

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "claimpkg/generation.hpp"
#include "claimpkg/kg_store.hpp"
#include "claimpkg/pseudo_graph.hpp"
#include "claimpkg/relation_scoring.hpp"
#include "claimpkg/subgraph_retrieval.hpp"

namespace testsupport {

using namespace claimpkg;

inline std::vector<Triple> random_triples(std::mt19937_64& rng,
                                          std::size_t n_entities,
                                          std::size_t n_relations,
                                          std::size_t n_triples) {
  std::uniform_int_distribution<std::size_t> ent(0, n_entities - 1);
  std::uniform_int_distribution<std::size_t> rel(0, n_relations - 1);
  std::vector<Triple> out;
  out.reserve(n_triples);
  for (std::size_t i = 0; i < n_triples; ++i) {
    std::size_t h = ent(rng), t = ent(rng);
    if (h == t) t = (t + 1) % n_entities;
    out.push_back({"ent " + std::to_string(h), "rel " + std::to_string(rel(rng)),
                   "ent " + std::to_string(t)});
  }
  return out;
}

inline KnowledgeGraph random_kg(std::mt19937_64& rng, std::size_t n_entities,
                                std::size_t n_relations,
                                std::size_t n_triples) {
  return KnowledgeGraph::from_triples(
      random_triples(rng, n_entities, n_relations, n_triples));
}

// Random pseudo-subgraph over a KG's entity set. Unknown indices come from
// a small pool so groups form; double-unknown triples are possible on
// purpose (the pipeline must skip them).
inline PseudoSubgraph random_pseudo_graph(std::mt19937_64& rng,
                                          const KnowledgeGraph& kg,
                                          std::size_t max_triples,
                                          bool allow_double_unknown = true) {
  std::uniform_int_distribution<std::size_t> n_dist(1, max_triples);
  std::uniform_int_distribution<std::size_t> ent(0, kg.entities().size() - 1);
  std::uniform_int_distribution<int> unk(0, 2);
  std::uniform_int_distribution<int> kind(0, 9);
  std::uniform_int_distribution<std::size_t> rel(
      0, kg.relations().empty() ? 0 : kg.relations().size() - 1);
  std::bernoulli_distribution inverse(0.3);
  std::bernoulli_distribution misspell(0.3);

  auto entity_ref = [&](bool force_known) {
    if (!force_known && kind(rng) < 4) return EntityRef::unknown(unk(rng));
    return EntityRef::known(kg.entities()[ent(rng)]);
  };
  auto relation = [&]() {
    std::string r = kg.relations().empty() ? "rel 0" : kg.relations()[rel(rng)];
    if (misspell(rng)) r += "x";
    if (inverse(rng)) r = "~" + r;
    return r;
  };

  PseudoSubgraph out;
  std::size_t n = n_dist(rng);
  for (std::size_t i = 0; i < n; ++i) {
    PseudoTriple t{entity_ref(false), relation(), entity_ref(false)};
    if (!allow_double_unknown && t.double_unknown()) t.head = entity_ref(true);
    if (t.double_unknown() && t.head.unknown_index == t.tail.unknown_index) {
      t.tail = EntityRef::unknown(t.tail.unknown_index + 1);
    }
    out.triples.push_back(std::move(t));
  }
  return out;
}

// ---- Brute-force retrieval reference -------------------------------------
// Recomputes retrieval from the raw triple list with no indices and no
// shared code paths beyond the scorer itself.

struct OracleEdge {
  std::string relation;  // annotated from the anchor's side
  std::string other;
};

inline std::vector<OracleEdge> oracle_edges(const std::vector<Triple>& triples,
                                            const std::string& anchor) {
  std::vector<OracleEdge> out;
  for (const auto& t : triples) {
    if (t.head == anchor) out.push_back({t.relation, t.tail});
    if (t.tail == anchor) out.push_back({"~" + t.relation, t.head});
  }
  return out;
}

struct OracleCandidate {
  std::string entity;
  std::string relation;
  double score;
};

inline std::vector<OracleCandidate> oracle_candidates(
    const std::vector<Triple>& triples, const std::string& anchor,
    const std::string& query_rel, const RelationScorer& scorer) {
  // Best annotated edge per neighbor; ties resolved toward the smaller
  // annotated relation string.
  std::map<std::string, OracleCandidate> best;
  for (const auto& e : oracle_edges(triples, anchor)) {
    double s = scorer.sim(query_rel, e.relation);
    auto it = best.find(e.other);
    if (it == best.end() || s > it->second.score ||
        (s == it->second.score && e.relation < it->second.relation)) {
      best[e.other] = {e.other, e.relation, s};
    }
  }
  std::vector<OracleCandidate> out;
  for (auto& [_, c] : best) out.push_back(c);
  return out;
}

inline std::set<EvidenceTriple> oracle_retrieve(
    const std::vector<Triple>& triples, const KnowledgeGraph& kg,
    const std::vector<PseudoSubgraph>& graphs, int k1, int k2,
    const RelationScorer& scorer) {
  std::set<EvidenceTriple> out;

  auto run_incomplete = [&](const std::vector<PseudoTriple>& incomplete) {
    // Group members by unknown index, skipping double-unknown triples and
    // anchors outside the KG.
    std::map<int, std::vector<std::pair<std::string, std::string>>> groups;
    for (const auto& t : incomplete) {
      if (t.double_unknown()) continue;
      bool unknown_is_head = !t.head.is_known;
      const std::string& anchor = unknown_is_head ? t.tail.label : t.head.label;
      if (!kg.has_entity(anchor)) continue;
      std::string query_rel =
          unknown_is_head ? toggle_inverse(t.relation) : t.relation;
      int index =
          unknown_is_head ? t.head.unknown_index : t.tail.unknown_index;
      groups[index].emplace_back(anchor, query_rel);
    }
    for (const auto& [index, members] : groups) {
      std::vector<std::vector<OracleCandidate>> sets;
      for (const auto& [anchor, query_rel] : members) {
        sets.push_back(oracle_candidates(triples, anchor, query_rel, scorer));
      }
      std::map<std::string, double> global;
      for (const auto& set : sets) {
        for (const auto& c : set) global[c.entity] += c.score;
      }
      for (std::size_t s = 0; s < sets.size(); ++s) {
        std::vector<OracleCandidate> ranked = sets[s];
        std::sort(ranked.begin(), ranked.end(),
                  [&](const OracleCandidate& a, const OracleCandidate& b) {
                    if (global[a.entity] != global[b.entity]) {
                      return global[a.entity] > global[b.entity];
                    }
                    return a.entity < b.entity;
                  });
        std::size_t keep =
            std::min<std::size_t>(ranked.size(), static_cast<std::size_t>(k1));
        for (std::size_t i = 0; i < keep; ++i) {
          out.insert({members[s].first, ranked[i].relation, ranked[i].entity});
        }
      }
    }
  };

  for (const auto& graph : graphs) {
    std::vector<PseudoTriple> incomplete;
    std::vector<PseudoTriple> complete;
    for (const auto& t : graph.triples) {
      (t.has_unknown() ? incomplete : complete).push_back(t);
    }
    run_incomplete(incomplete);

    for (const auto& t : complete) {
      std::set<std::string> rels;
      for (const auto& raw : triples) {
        if (raw.head == t.head.label && raw.tail == t.tail.label) {
          rels.insert(raw.relation);
        }
        if (raw.head == t.tail.label && raw.tail == t.head.label) {
          rels.insert("~" + raw.relation);
        }
      }
      if (!rels.empty()) {
        std::vector<std::pair<double, std::string>> scored;
        for (const auto& r : rels) scored.emplace_back(scorer.sim(t.relation, r), r);
        std::sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
          if (a.first != b.first) return a.first > b.first;
          return a.second < b.second;
        });
        std::size_t keep =
            std::min<std::size_t>(scored.size(), static_cast<std::size_t>(k2));
        for (std::size_t i = 0; i < keep; ++i) {
          out.insert({t.head.label, scored[i].second, t.tail.label});
        }
      } else {
        run_incomplete({PseudoTriple{t.head, t.relation, EntityRef::unknown(0)}});
        run_incomplete({PseudoTriple{EntityRef::unknown(0), t.relation, t.tail}});
      }
    }
  }
  return out;
}

inline std::set<EvidenceTriple> as_set(const EvidenceSubgraph& s) {
  return {s.triples.begin(), s.triples.end()};
}

// ---- Grammar-shaped language model ---------------------------------------
// Emits "<e>...</e> || <relation> || <e>...</e>" then EOS. Outside entity
// spans the next token is fully scripted; inside a span every vocabulary
// token gets equal mass, so the trie mask alone decides what the entity can
// be and sampling walks a random lexicon path.

class GrammarLM : public LanguageModel {
 public:
  GrammarLM(const PieceTokenizer& tok, std::size_t claim_tokens,
            const std::string& relation)
      : tok_(tok), claim_tokens_(claim_tokens) {
    glue_ = tok_.encode(" || " + relation + " || ");
  }

  std::vector<double> next_distribution(
      std::span<const TokenId> context) const override {
    auto generated = context.subspan(claim_tokens_);
    int opens = 0, closes = 0;
    std::size_t last_close = 0;
    for (std::size_t i = 0; i < generated.size(); ++i) {
      if (generated[i] == kTokEntityOpen) ++opens;
      if (generated[i] == kTokEntityClose) {
        ++closes;
        last_close = i;
      }
    }
    if (opens > closes) {
      return uniform();  // inside a span; the mask takes over
    }
    if (closes == 0) return one_hot(kTokEntityOpen);
    if (closes == 1) {
      std::size_t since = generated.size() - last_close - 1;
      if (since < glue_.size()) return one_hot(glue_[since]);
      return one_hot(kTokEntityOpen);
    }
    return one_hot(kTokEos);
  }

 private:
  std::vector<double> uniform() const {
    std::vector<double> p(tok_.vocab_size(),
                          1.0 / static_cast<double>(tok_.vocab_size()));
    return p;
  }
  std::vector<double> one_hot(TokenId t) const {
    std::vector<double> p(tok_.vocab_size(), 0.0);
    p[static_cast<std::size_t>(t)] = 1.0;
    return p;
  }

  const PieceTokenizer& tok_;
  std::size_t claim_tokens_;
  std::vector<TokenId> glue_;
};

}  // namespace testsupport
