// Acceptance gate: eight self-contained checks, one pass/fail line each,
// no network. Exit status is the number of failed checks.

#include <cstdio>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "support/helpers.hpp"

#include "claimpkg/annotation.hpp"
#include "claimpkg/eval_harness.hpp"
#include "claimpkg/generation.hpp"
#include "claimpkg/reasoning_client.hpp"

using namespace claimpkg;
using namespace testsupport;

namespace {

int g_failures = 0;

void report(int number, const std::string& name, bool ok,
            const std::string& detail) {
  std::printf("[%s] %d. %s%s%s\n", ok ? "PASS" : "FAIL", number, name.c_str(),
              detail.empty() ? "" : " :: ", detail.c_str());
  if (!ok) ++g_failures;
}

// 1. Constrained decoding can only emit lexicon entities; the
//    unconstrained few-shot path can not make that guarantee.
void check_trie_soundness() {
  std::vector<Triple> triples;
  for (int i = 0; i < 1000; ++i) {
    triples.push_back({"ent " + std::to_string(i),
                       "rel " + std::to_string(i % 7),
                       "ent " + std::to_string((i * 13 + 1) % 1000)});
  }
  KnowledgeGraph kg = KnowledgeGraph::from_triples(triples);
  PieceTokenizer tok = PieceTokenizer::from_corpus(kg.entities());
  EntityTrie trie = EntityTrie::build(kg.entities(), tok);
  const std::string claim = "a synthetic claim";
  GrammarLM lm(tok, tok.encode(claim).size(), "rel 0");

  std::size_t decodes = 0;
  std::vector<PseudoSubgraph> graphs;
  for (uint64_t seed = 0; seed < 500; ++seed) {
    DecoderConfig cfg;
    cfg.sample_seed = seed;
    cfg.max_length = 1024;
    auto out = constrained_decode(lm, claim, trie, tok, cfg);
    graphs.push_back(parse_pseudo_subgraph(tok.decode(out.tokens)));
    ++decodes;
  }
  double constrained_score = entity_correctness(graphs, kg);

  ScriptedChatBackend adversary;
  adversary.set_default(
      "<e>ent 1</e> || rel 0 || <e>No Such Entity</e>\n"
      "<e>ent 2</e> || rel 0 || <e>ent 3</e>\n");
  FewshotGenerator fewshot(adversary, &kg);
  std::vector<std::string> diags;
  double unconstrained_score =
      entity_correctness(fewshot.generate("any claim", diags), kg);

  bool ok = decodes >= 500 && constrained_score == 1.0 &&
            unconstrained_score < 1.0;
  report(1, "trie-constrained decoding keeps every entity in the lexicon", ok,
         std::to_string(decodes) + " decodes, constrained correctness " +
             std::to_string(constrained_score) + ", unconstrained " +
             std::to_string(unconstrained_score));
}

struct RetrievalInstance {
  std::vector<Triple> triples;
  KnowledgeGraph kg;
  std::vector<PseudoSubgraph> graphs;
  int k1;
  int k2;
  bool use_exact;
};

RetrievalInstance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<std::size_t> ents(5, 50);
  std::uniform_int_distribution<std::size_t> trip(10, 200);
  std::uniform_int_distribution<int> graphs_n(1, 3);
  RetrievalInstance inst;
  inst.triples = random_triples(rng, ents(rng), 6, trip(rng));
  inst.kg = KnowledgeGraph::from_triples(inst.triples);
  int n = graphs_n(rng);
  for (int i = 0; i < n; ++i) {
    inst.graphs.push_back(random_pseudo_graph(rng, inst.kg, 6));
  }
  const int k1_choices[] = {1, 3, 5};
  const int k2_choices[] = {1, 3};
  inst.k1 = k1_choices[rng() % 3];
  inst.k2 = k2_choices[rng() % 2];
  inst.use_exact = (rng() % 2) == 0;
  return inst;
}

// 2 + 3. Optimized retrieval equals a brute-force reference, and every
//        anchor set contributes its guaranteed share before the union.
void check_retrieval_oracle_and_contribution() {
  std::mt19937_64 rng(90210);
  ExactScorer exact;
  FuzzyScorer fuzzy;
  std::size_t mismatches = 0;
  std::size_t contribution_violations = 0;

  for (int round = 0; round < 1000; ++round) {
    RetrievalInstance inst = random_instance(rng);
    const RelationScorer& scorer =
        inst.use_exact ? static_cast<const RelationScorer&>(exact) : fuzzy;
    RetrievalConfig cfg;
    cfg.k1 = inst.k1;
    cfg.k2 = inst.k2;

    auto got = as_set(retrieve_subgraph(inst.kg, inst.graphs, cfg, scorer));
    auto want = oracle_retrieve(inst.triples, inst.kg, inst.graphs, inst.k1,
                                inst.k2, scorer);
    if (got != want) ++mismatches;

    for (const auto& graph : inst.graphs) {
      GroupingResult grouping = group_by_unknown(categorize(graph).incomplete);
      for (const auto& group : grouping.groups) {
        std::vector<CandidateSet> sets;
        for (const auto& member : group.members) {
          if (!inst.kg.has_entity(member.entity)) continue;
          std::string rel = member.unknown_is_head
                                ? toggle_inverse(member.relation)
                                : member.relation;
          sets.push_back(get_candidates_and_scores(inst.kg, member.entity, rel,
                                                   scorer, cfg.hub_cap));
        }
        auto global = aggregate_global_score(sets);
        for (const auto& set : sets) {
          std::size_t want_n = std::min<std::size_t>(
              set.candidates.size(), static_cast<std::size_t>(inst.k1));
          if (rank_top_k({set}, global, inst.k1).size() < want_n) {
            ++contribution_violations;
          }
        }
      }
    }
  }
  report(2, "retrieval matches the brute-force reference on 1000 instances",
         mismatches == 0, std::to_string(mismatches) + " mismatches");
  report(3, "each anchor set contributes min(k1, |candidates|) triples",
         contribution_violations == 0,
         std::to_string(contribution_violations) + " violations");
}

// 4. The annotation pipeline reproduces the documented label byte for
//    byte, and shuffles only within the allowed order.
void check_annotation_golden() {
  AnnotationRecord record;
  record.claim =
      "A musical artist, whose music is Post-metal, played with the band "
      "Twilight and performs for Mamiffer.";
  record.entities = {"Mamiffer", "Post-metal", "Twilight_(band)"};
  record.evidence = {
      {"Twilight_(band)", {"~associatedMusicalArtist", "associatedBand"},
       "Mamiffer"},
      {"Twilight_(band)", {"~associatedMusicalArtist", "genre"}, "Post-metal"},
  };
  const std::string golden =
      "<e>Twilight (band)</e> || ~associated musical artist || unknown_0\n"
      "unknown_0 || associated band || <e>Mamiffer</e>\n"
      "unknown_0 || genre || <e>Post-metal</e>\n";

  SubstringClassifier classifier;
  TrainingExample identity = build_training_example(record, classifier);
  bool golden_ok = identity.label == golden;

  auto multiset_of = [](const std::string& label) {
    std::multiset<std::string> out;
    for (const auto& t : parse_pseudo_subgraph(label).triples) {
      out.insert(serialize_entity_ref(t.head) + "\x1f" + t.relation + "\x1f" +
                 serialize_entity_ref(t.tail));
    }
    return out;
  };
  auto order_ok = [](const std::string& label) {
    int expected = 0;
    std::set<int> seen;
    for (const auto& t : parse_pseudo_subgraph(label).triples) {
      for (const EntityRef* ref : {&t.head, &t.tail}) {
        if (ref->is_known || seen.count(ref->unknown_index)) continue;
        if (ref->unknown_index != expected) return false;
        seen.insert(ref->unknown_index);
        ++expected;
      }
    }
    return true;
  };

  auto expected = multiset_of(golden);
  std::size_t bad_seeds = 0;
  for (uint64_t seed = 1; seed <= 100; ++seed) {
    TrainingExample ex = build_training_example(record, classifier, seed);
    if (multiset_of(ex.label) != expected || !order_ok(ex.label)) ++bad_seeds;
  }
  report(4, "annotation reproduces the documented label and shuffle rules",
         golden_ok && bad_seeds == 0,
         std::string(golden_ok ? "golden ok" : "golden mismatch") + ", " +
             std::to_string(bad_seeds) + " bad seeds");
}

// 5. The three structure metrics agree with independent set arithmetic.
void check_metric_fidelity() {
  std::mt19937_64 rng(17);
  std::size_t errors = 0;
  auto key = [](const PseudoTriple& t) {
    return serialize_entity_ref(t.head) + "\x1f" + t.relation + "\x1f" +
           serialize_entity_ref(t.tail);
  };
  for (int round = 0; round < 500; ++round) {
    KnowledgeGraph kg = random_kg(rng, 12, 4, 30);
    std::vector<PseudoSubgraph> beams;
    for (std::size_t i = 0; i <= rng() % 4; ++i) {
      beams.push_back(random_pseudo_graph(rng, kg, 5));
    }
    PseudoSubgraph gold = random_pseudo_graph(rng, kg, 5);

    std::set<std::string> union_set, gold_set, entity_set;
    for (const auto& b : beams) {
      for (const auto& t : canonicalize_unknown_indices(b).triples) {
        union_set.insert(key(t));
      }
      for (const auto& t : b.triples) {
        if (t.head.is_known) entity_set.insert(t.head.label);
        if (t.tail.is_known) entity_set.insert(t.tail.label);
      }
    }
    for (const auto& t : canonicalize_unknown_indices(gold).triples) {
      gold_set.insert(key(t));
    }
    std::size_t cov_hits = 0;
    for (const auto& k : gold_set) cov_hits += union_set.count(k);
    double cov_want =
        gold_set.empty() ? 1.0
                         : static_cast<double>(cov_hits) /
                               static_cast<double>(gold_set.size());
    std::size_t ec_hits = 0;
    for (const auto& e : entity_set) ec_hits += kg.has_entity(e) ? 1 : 0;
    double ec_want = entity_set.empty()
                         ? 1.0
                         : static_cast<double>(ec_hits) /
                               static_cast<double>(entity_set.size());

    if (coverage(beams, gold) != cov_want) ++errors;
    if (entity_correctness(beams, kg) != ec_want) ++errors;
    if (unique_triplet_count(beams) != union_set.size()) ++errors;
    for (const auto& b : beams) {
      if (coverage(b, b) != 1.0) ++errors;
    }
  }
  report(5, "structure metrics equal their set-arithmetic oracles",
         errors == 0, std::to_string(errors) + " deviations");
}

// 6. Raising k1 can only grow the evidence set.
void check_k1_monotonicity() {
  std::mt19937_64 rng(3333);
  FuzzyScorer fuzzy;
  ExactScorer exact;
  std::size_t violations = 0;
  for (int round = 0; round < 200; ++round) {
    RetrievalInstance inst = random_instance(rng);
    const RelationScorer& scorer =
        inst.use_exact ? static_cast<const RelationScorer&>(exact) : fuzzy;
    std::set<EvidenceTriple> prev;
    for (int k1 : {1, 3, 5}) {
      RetrievalConfig cfg;
      cfg.k1 = k1;
      cfg.k2 = inst.k2;
      auto cur = as_set(retrieve_subgraph(inst.kg, inst.graphs, cfg, scorer));
      if (!std::includes(cur.begin(), cur.end(), prev.begin(), prev.end())) {
        ++violations;
      }
      prev = std::move(cur);
    }
  }
  report(6, "evidence grows monotonically in k1", violations == 0,
         std::to_string(violations) + " violations");
}

// 7. The eval harness is byte-deterministic, and the documented monument
//    case comes out Refuted with the expected evidence triple.
void check_end_to_end() {
  KnowledgeGraph kg = KnowledgeGraph::from_triples({
      {"11th Mississippi Infantry Monument", "state", "Pennsylvania"},
      {"11th Mississippi Infantry Monument", "municipality",
       "Gettysburg, Pennsylvania"},
      {"11th Mississippi Infantry Monument", "country", "United States"},
      {"U.S. Route 140", "location", "Gettysburg"},
      {"Pennsylvania Route 34", "location", "Gettysburg"},
  });
  ScriptedGenerator generator(&kg);
  ScriptedChatBackend reasoner;
  FuzzyScorer scorer;

  std::vector<DatasetRecord> records;
  const std::string monument_claim =
      "The 11th Mississippi Infantry Monument is not in Gettysburg, "
      "Pennsylvania.";
  {
    DatasetRecord r;
    r.claim = monument_claim;
    r.gold = Verdict::Refuted;
    r.category = "Negation";
    records.push_back(r);
    generator.add(monument_claim,
                  {"<e>11th Mississippi Infantry Monument</e> || location || "
                   "<e>Gettysburg, Pennsylvania</e>\n",
                   "<e>11th Mississippi Infantry Monument</e> || location || "
                   "<e>Pennsylvania</e>\n"});
    reasoner.add_response(
        "11th Mississippi Infantry Monument",
        R"({"rationale": "The monument is in Gettysburg, Pennsylvania.", "verdict": "false"})");
  }
  const char* categories[] = {"One-hop", "Conjunction", "Existence",
                              "Multi hop", "Negation"};
  for (int i = 0; i < 49; ++i) {
    DatasetRecord r;
    r.claim = "synthetic claim #" + std::to_string(i) + "#";
    r.gold = (i % 2 == 0) ? Verdict::Supported : Verdict::Refuted;
    r.category = categories[i % 5];
    records.push_back(r);
    generator.add(r.claim,
                  {"<e>U.S. Route 140</e> || location || <e>Gettysburg</e>\n"});
    reasoner.add_response(
        "#" + std::to_string(i) + "#",
        std::string(R"({"rationale": "scripted", "verdict": ")") +
            ((i % 3 == 0) ? "true" : "false") + "\"}");
  }

  EvalConfig cfg;
  cfg.workers = 4;
  auto run = [&] {
    return report_to_json(
               run_eval(records, kg, generator, scorer, reasoner, cfg))
        .dump(2);
  };
  std::string first = run();
  bool deterministic = run() == first && run() == first;

  VerificationResult golden =
      verify_claim(monument_claim, kg, generator, scorer, reasoner);
  EvidenceTriple want{"11th Mississippi Infantry Monument", "state",
                      "Pennsylvania"};
  bool golden_ok =
      golden.verdict == Verdict::Refuted &&
      std::find(golden.evidence.triples.begin(), golden.evidence.triples.end(),
                want) != golden.evidence.triples.end();

  report(7, "eval reports are byte-identical and the monument case is Refuted",
         deterministic && golden_ok,
         std::string(deterministic ? "3 identical runs" : "run divergence") +
             ", " + (golden_ok ? "golden ok" : "golden mismatch"));
}

// 8. The fuzzy scorer is the normalized edit distance.
void check_fuzzy_scorer() {
  bool known = std::abs(sim_fuzzy("kitten", "sitting") - 4.0 / 7.0) <= 1e-12;
  std::mt19937_64 rng(4242);
  std::uniform_int_distribution<int> len(0, 12);
  std::uniform_int_distribution<int> ch(0, 4);
  std::size_t property_failures = 0;
  for (int i = 0; i < 10000; ++i) {
    std::string a, b;
    int na = len(rng), nb = len(rng);
    for (int j = 0; j < na; ++j) a.push_back(static_cast<char>('a' + ch(rng)));
    for (int j = 0; j < nb; ++j) b.push_back(static_cast<char>('a' + ch(rng)));
    double s = sim_fuzzy(a, b);
    if (s != sim_fuzzy(b, a) || s < 0.0 || s > 1.0) ++property_failures;
    if (a == b && s != 1.0) ++property_failures;
  }
  report(8, "fuzzy similarity matches the edit-distance definition",
         known && property_failures == 0,
         std::to_string(property_failures) + " property failures");
}

}  // namespace

int main() {
  check_trie_soundness();
  check_retrieval_oracle_and_contribution();
  check_annotation_golden();
  check_metric_fidelity();
  check_k1_monotonicity();
  check_end_to_end();
  check_fuzzy_scorer();
  std::printf("%s: %d/8 checks passed\n", g_failures == 0 ? "OK" : "FAILED",
              8 - g_failures);
  return g_failures;
}
