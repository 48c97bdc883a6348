#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "claimpkg/annotation.hpp"
#include "claimpkg/entity_trie.hpp"
#include "claimpkg/eval_harness.hpp"
#include "claimpkg/kg_store.hpp"
#include "claimpkg/relation_scoring.hpp"

namespace {

using namespace claimpkg;

std::string env_or(const char* name, const std::string& fallback) {
  const char* v = std::getenv(name);
  return v ? std::string(v) : fallback;
}

KnowledgeGraph load_kg(const std::string& index_path,
                       const std::string& tsv_path) {
  if (!index_path.empty()) return KnowledgeGraph::load_index(index_path);
  if (!tsv_path.empty()) return KnowledgeGraph::load_tsv_file(tsv_path);
  throw CLI::ValidationError("either --index or --kg is required");
}

struct ScorerBundle {
  std::unique_ptr<RelationScorer> scorer;
  std::unique_ptr<EmbeddingProvider> provider;
  std::unique_ptr<RelationIndex> index;
};

ScorerBundle make_scorer(const std::string& kind, const KnowledgeGraph& kg,
                         const std::string& relation_index_path) {
  ScorerBundle out;
  if (kind == "exact") {
    out.scorer = std::make_unique<ExactScorer>();
  } else if (kind == "fuzzy") {
    out.scorer = std::make_unique<FuzzyScorer>();
  } else if (kind == "embedding") {
    out.provider = std::make_unique<HttpEmbeddingProvider>(
        env_or("LM_ENDPOINT", "http://localhost:8080"),
        env_or("LM_API_KEY", ""), env_or("LM_MODEL", "default"));
    if (!relation_index_path.empty()) {
      out.index = std::make_unique<RelationIndex>(
          RelationIndex::load(relation_index_path));
    } else {
      out.index = std::make_unique<RelationIndex>(
          RelationIndex::build(kg.relations(), *out.provider));
    }
    out.scorer = std::make_unique<EmbeddingScorer>(*out.index, *out.provider);
  } else {
    throw CLI::ValidationError("unknown scorer: " + kind);
  }
  return out;
}

std::unique_ptr<ChatBackend> make_backend(const std::string& scripted_path) {
  if (!scripted_path.empty()) {
    std::ifstream in(scripted_path);
    if (!in) throw CLI::ValidationError("cannot open " + scripted_path);
    nlohmann::json spec = nlohmann::json::parse(in);
    auto backend = std::make_unique<ScriptedChatBackend>();
    if (spec.contains("responses")) {
      for (const auto& item : spec["responses"]) {
        backend->add_response(item.at("match").get<std::string>(),
                              item.at("reply").get<std::string>());
      }
    }
    if (spec.contains("default")) {
      backend->set_default(spec["default"].get<std::string>());
    }
    return backend;
  }
  ChatParams params;
  params.model = env_or("LM_MODEL", "default");
  return std::make_unique<HttpChatBackend>(
      env_or("LM_ENDPOINT", "http://localhost:8080"),
      env_or("LM_API_KEY", ""), params);
}

std::unique_ptr<PseudoGraphGenerator> make_generator(
    const std::string& kind, const std::string& script_path,
    const ChatBackend& backend, const KnowledgeGraph& kg) {
  if (kind == "fewshot") {
    return std::make_unique<FewshotGenerator>(backend, &kg);
  }
  if (kind == "scripted") {
    if (script_path.empty()) {
      throw CLI::ValidationError("--script is required with the scripted "
                                 "generator");
    }
    std::ifstream in(script_path);
    if (!in) throw CLI::ValidationError("cannot open " + script_path);
    nlohmann::json spec = nlohmann::json::parse(in);
    auto gen = std::make_unique<ScriptedGenerator>(&kg);
    for (const auto& [claim, beams] : spec.items()) {
      gen->add(claim, beams.get<std::vector<std::string>>());
    }
    return gen;
  }
  throw CLI::ValidationError("unknown generator: " + kind);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Claim verification over knowledge graphs"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Key=value config file; flags override it");
  app.allow_config_extras(true);

  std::string kg_tsv, kg_index, out_path, trie_path, relation_index_path;
  std::string claim, dataset, in_path, scorer_kind = "fuzzy";
  std::string generator_kind = "fewshot", script_path, reasoner_script;
  std::string classifier_kind = "offline", report_path;
  int k1 = 3, k2 = 1, beams = 5, workers = 4;
  std::size_t hub_cap = kDefaultHubCap;
  std::optional<uint64_t> seed;
  uint64_t seed_value = 0;

  auto* kg_cmd = app.add_subcommand("kg", "Knowledge graph maintenance");
  auto* build_index =
      kg_cmd->add_subcommand("build-index", "Compile a TSV into a binary index");
  build_index->add_option("--kg", kg_tsv, "Triples TSV (head\\trel\\ttail)")
      ->required();
  build_index->add_option("--out", out_path, "Index output path")->required();

  auto* trie_cmd = app.add_subcommand("trie", "Entity lexicon maintenance");
  auto* trie_build =
      trie_cmd->add_subcommand("build", "Build the entity trie snapshot");
  trie_build->add_option("--kg", kg_tsv, "Triples TSV");
  trie_build->add_option("--index", kg_index, "Binary KG index");
  trie_build->add_option("--out", trie_path, "Snapshot output path")
      ->required();

  auto add_pipeline_options = [&](CLI::App* cmd) {
    cmd->add_option("--kg", kg_tsv, "Triples TSV");
    cmd->add_option("--index", kg_index, "Binary KG index");
    cmd->add_option("--k1", k1, "Candidates kept per anchor set");
    cmd->add_option("--k2", k2, "Relations kept per connected pair");
    cmd->add_option("--hub-cap", hub_cap, "Neighbor cap per entity");
    cmd->add_option("--scorer", scorer_kind, "exact, fuzzy, or embedding");
    cmd->add_option("--relation-index", relation_index_path,
                    "Prebuilt relation embedding index");
    cmd->add_option("--generator", generator_kind, "fewshot or scripted");
    cmd->add_option("--script", script_path,
                    "JSON {claim: [raw subgraphs]} for the scripted generator");
    cmd->add_option("--reasoner-script", reasoner_script,
                    "JSON canned replies instead of a live endpoint");
  };

  auto* verify = app.add_subcommand("verify", "Verify a single claim");
  verify->add_option("--claim", claim, "Claim text")->required();
  verify->add_option("--beams", beams, "Beam width");
  add_pipeline_options(verify);

  auto* eval = app.add_subcommand("eval", "Run a JSONL dataset");
  eval->add_option("--dataset", dataset, "Dataset JSONL")->required();
  eval->add_option("--report", report_path, "Write the JSON report here");
  eval->add_option("--workers", workers, "Worker threads");
  add_pipeline_options(eval);

  auto* annotate = app.add_subcommand("annotate",
                                      "Build training pairs from records");
  annotate->add_option("--in", in_path, "Input JSONL")->required();
  annotate->add_option("--out", out_path, "Output JSONL")->required();
  annotate->add_option("--classifier", classifier_kind, "offline or remote");
  annotate
      ->add_option("--seed", seed_value,
                   "Shuffle label triplets with this seed")
      ->each([&](const std::string&) { seed = seed_value; });
  annotate->add_option("--reasoner-script", reasoner_script,
                       "JSON canned replies for the remote classifier");

  CLI11_PARSE(app, argc, argv);

  try {
    if (build_index->parsed()) {
      KnowledgeGraph g = KnowledgeGraph::load_tsv_file(kg_tsv);
      g.save_index(out_path);
      std::cout << "indexed " << g.triple_count() << " triples, "
                << g.entities().size() << " entities\n";
      return 0;
    }
    if (trie_build->parsed()) {
      KnowledgeGraph g = load_kg(kg_index, kg_tsv);
      TrieSnapshot snapshot;
      snapshot.tokenizer = PieceTokenizer::from_corpus(g.entities());
      snapshot.trie = EntityTrie::build(g.entities(), snapshot.tokenizer);
      snapshot.save(trie_path);
      std::cout << "trie over " << snapshot.trie.entity_count()
                << " entities, " << snapshot.trie.node_count() << " nodes\n";
      return 0;
    }
    if (verify->parsed()) {
      KnowledgeGraph g = load_kg(kg_index, kg_tsv);
      ScorerBundle scorer = make_scorer(scorer_kind, g, relation_index_path);
      auto backend = make_backend(reasoner_script);
      auto generator = make_generator(generator_kind, script_path, *backend, g);
      RetrievalConfig retrieval{k1, k2, hub_cap};
      VerificationResult result = verify_claim(claim, g, *generator,
                                               *scorer.scorer, *backend,
                                               retrieval);
      nlohmann::ordered_json j;
      j["claim"] = result.claim;
      j["verdict"] = verdict_wire(result.verdict);
      j["justification"] = result.justification;
      nlohmann::ordered_json graphs = nlohmann::ordered_json::array();
      for (const auto& p : result.pseudo_subgraphs) {
        graphs.push_back(serialize_pseudo_subgraph(p));
      }
      j["pseudo_subgraphs"] = graphs;
      j["evidence"] = serialize_evidence(result.evidence);
      j["diagnostics"] = result.diagnostics;
      std::cout << j.dump(2) << '\n';
      return 0;
    }
    if (eval->parsed()) {
      KnowledgeGraph g = load_kg(kg_index, kg_tsv);
      ScorerBundle scorer = make_scorer(scorer_kind, g, relation_index_path);
      auto backend = make_backend(reasoner_script);
      auto generator = make_generator(generator_kind, script_path, *backend, g);
      LoadedDataset data = load_dataset(dataset);
      for (const auto& err : data.errors) std::cerr << err << '\n';
      EvalConfig cfg;
      cfg.retrieval = RetrievalConfig{k1, k2, hub_cap};
      cfg.workers = workers;
      MetricsReport report = run_eval(data.records, g, *generator,
                                      *scorer.scorer, *backend, cfg);
      report.skipped += data.skipped;
      std::string json_text = report_to_json(report).dump(2) + "\n";
      if (!report_path.empty()) {
        std::ofstream out(report_path, std::ios::trunc);
        out << json_text;
      } else {
        std::cout << json_text;
      }
      std::cout << report_table(report);
      return 0;
    }
    if (annotate->parsed()) {
      std::unique_ptr<ChatBackend> backend;
      std::unique_ptr<EntityClassifier> classifier;
      if (classifier_kind == "remote") {
        backend = make_backend(reasoner_script);
        classifier = std::make_unique<RemoteClassifier>(*backend);
      } else if (classifier_kind == "offline") {
        classifier = std::make_unique<SubstringClassifier>();
      } else {
        throw CLI::ValidationError("unknown classifier: " + classifier_kind);
      }
      AnnotateStats stats = annotate_file(in_path, out_path, *classifier, seed);
      for (const auto& err : stats.errors) std::cerr << err << '\n';
      std::cout << "wrote " << stats.written << " pairs, skipped "
                << stats.skipped << '\n';
      return stats.skipped == 0 ? 0 : 2;
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
