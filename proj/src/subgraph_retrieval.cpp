#include "claimpkg/subgraph_retrieval.hpp"

#include <algorithm>
#include <unordered_set>

namespace claimpkg {

namespace {

std::string triple_key(const EvidenceTriple& t) {
  return t.subject + '\x1f' + t.relation + '\x1f' + t.object;
}

void append_union(EvidenceSubgraph& dst, const EvidenceSubgraph& src,
                  std::unordered_set<std::string>& seen) {
  for (const auto& t : src.triples) {
    if (seen.insert(triple_key(t)).second) dst.triples.push_back(t);
  }
  dst.warnings.insert(dst.warnings.end(), src.warnings.begin(),
                      src.warnings.end());
}

}  // namespace

CandidateSet get_candidates_and_scores(const KnowledgeGraph& g,
                                       const std::string& e,
                                       const std::string& r,
                                       const RelationScorer& scorer,
                                       std::size_t hub_cap) {
  CandidateSet set;
  set.anchor = e;
  set.anchor_relation = r;
  // Per neighbor, keep the best-scoring annotated edge (ties: relation asc,
  // which is the neighbor list order).
  std::map<std::string, Candidate> best;
  for (const auto& [rel, other] : g.neighbors(e, hub_cap)) {
    double score = scorer.sim(r, rel);
    auto it = best.find(other);
    if (it == best.end()) {
      best.emplace(other, Candidate{other, rel, score});
    } else if (score > it->second.score) {
      it->second.relation = rel;
      it->second.score = score;
    }
  }
  set.candidates.reserve(best.size());
  for (auto& [entity, cand] : best) set.candidates.push_back(std::move(cand));
  std::stable_sort(set.candidates.begin(), set.candidates.end(),
                   [](const Candidate& a, const Candidate& b) {
                     if (a.score != b.score) return a.score > b.score;
                     return a.entity < b.entity;
                   });
  return set;
}

std::map<std::string, double> aggregate_global_score(
    const std::vector<CandidateSet>& sets) {
  std::map<std::string, double> global;
  for (const auto& set : sets) {
    for (const auto& cand : set.candidates) global[cand.entity] += cand.score;
  }
  return global;
}

std::vector<EvidenceTriple> rank_top_k(
    const std::vector<CandidateSet>& sets,
    const std::map<std::string, double>& global, int k1) {
  std::vector<EvidenceTriple> out;
  std::unordered_set<std::string> seen;
  for (const auto& set : sets) {
    std::vector<const Candidate*> ranked;
    ranked.reserve(set.candidates.size());
    for (const auto& cand : set.candidates) ranked.push_back(&cand);
    std::stable_sort(ranked.begin(), ranked.end(),
                     [&global](const Candidate* a, const Candidate* b) {
                       double ga = global.at(a->entity);
                       double gb = global.at(b->entity);
                       if (ga != gb) return ga > gb;
                       return a->entity < b->entity;
                     });
    std::size_t keep = std::min<std::size_t>(ranked.size(),
                                             static_cast<std::size_t>(k1));
    for (std::size_t i = 0; i < keep; ++i) {
      EvidenceTriple t{set.anchor, ranked[i]->relation, ranked[i]->entity};
      if (seen.insert(triple_key(t)).second) out.push_back(std::move(t));
    }
  }
  return out;
}

EvidenceSubgraph retrieve_incomplete(const KnowledgeGraph& g,
                                     const std::vector<PseudoTriple>& incomplete,
                                     const RetrievalConfig& cfg,
                                     const RelationScorer& scorer) {
  EvidenceSubgraph out;
  std::unordered_set<std::string> seen;
  GroupingResult grouping = group_by_unknown(incomplete);
  for (const auto& skipped : grouping.skipped) {
    out.warnings.push_back("skipped double-unknown triplet: " +
                           serialize_entity_ref(skipped.head) + " || " +
                           skipped.relation + " || " +
                           serialize_entity_ref(skipped.tail));
  }
  for (const auto& group : grouping.groups) {
    std::vector<CandidateSet> sets;
    for (const auto& member : group.members) {
      if (!g.has_entity(member.entity)) {
        out.warnings.push_back("anchor entity not in KG: \"" + member.entity +
                               "\"");
        continue;
      }
      // When the unknown is the head of (u, r, e), the anchor sees the
      // relation from its own side, i.e. inverted.
      std::string query_rel =
          member.unknown_is_head ? toggle_inverse(member.relation)
                                 : member.relation;
      sets.push_back(get_candidates_and_scores(g, member.entity, query_rel,
                                               scorer, cfg.hub_cap));
    }
    auto global = aggregate_global_score(sets);
    for (auto& t : rank_top_k(sets, global, cfg.k1)) {
      if (seen.insert(triple_key(t)).second) out.triples.push_back(std::move(t));
    }
  }
  return out;
}

EvidenceSubgraph retrieve_complete(const KnowledgeGraph& g,
                                   const std::vector<PseudoTriple>& complete,
                                   const RetrievalConfig& cfg,
                                   const RelationScorer& scorer) {
  EvidenceSubgraph out;
  std::unordered_set<std::string> seen;
  for (const auto& triple : complete) {
    const std::string& e1 = triple.head.label;
    const std::string& e2 = triple.tail.label;
    std::vector<std::string> rels = g.connected_relations(e1, e2);
    if (!rels.empty()) {
      std::vector<std::pair<double, std::string>> scored;
      scored.reserve(rels.size());
      for (auto& rel : rels) {
        scored.emplace_back(scorer.sim(triple.relation, rel), std::move(rel));
      }
      std::stable_sort(scored.begin(), scored.end(),
                       [](const auto& a, const auto& b) {
                         if (a.first != b.first) return a.first > b.first;
                         return a.second < b.second;
                       });
      std::size_t keep = std::min<std::size_t>(scored.size(),
                                               static_cast<std::size_t>(cfg.k2));
      for (std::size_t i = 0; i < keep; ++i) {
        EvidenceTriple t{e1, scored[i].second, e2};
        if (seen.insert(triple_key(t)).second) {
          out.triples.push_back(std::move(t));
        }
      }
    } else {
      // No direct connection: decompose around a placeholder and resolve
      // each side independently.
      PseudoTriple left{triple.head, triple.relation, EntityRef::unknown(0)};
      PseudoTriple right{EntityRef::unknown(0), triple.relation, triple.tail};
      append_union(out, retrieve_incomplete(g, {left}, cfg, scorer), seen);
      append_union(out, retrieve_incomplete(g, {right}, cfg, scorer), seen);
    }
  }
  return out;
}

EvidenceSubgraph retrieve_subgraph(const KnowledgeGraph& g,
                                   const std::vector<PseudoSubgraph>& graphs,
                                   const RetrievalConfig& cfg,
                                   const RelationScorer& scorer) {
  EvidenceSubgraph out;
  std::unordered_set<std::string> seen;
  for (const auto& graph : graphs) {
    Categorized cats = categorize(graph);
    append_union(out, retrieve_incomplete(g, cats.incomplete, cfg, scorer),
                 seen);
    append_union(out, retrieve_complete(g, cats.complete, cfg, scorer), seen);
  }
  return out;
}

std::string serialize_evidence(const EvidenceSubgraph& s) {
  std::string out;
  for (const auto& t : s.triples) {
    out += '(' + t.subject + ", " + t.relation + ", " + t.object + ")\n";
  }
  return out;
}

}  // namespace claimpkg
