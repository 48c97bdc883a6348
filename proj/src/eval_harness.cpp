#include "claimpkg/eval_harness.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <cctype>
#include <fstream>
#include <set>
#include <sstream>
#include <thread>
#include <unordered_set>

#include "claimpkg/errors.hpp"

namespace claimpkg {

namespace {

std::set<std::string> triple_set(const PseudoSubgraph& p) {
  PseudoSubgraph canon = canonicalize_unknown_indices(p);
  std::set<std::string> out;
  for (const auto& t : canon.triples) {
    out.insert(serialize_entity_ref(t.head) + " || " + t.relation + " || " +
               serialize_entity_ref(t.tail));
  }
  return out;
}

std::set<std::string> known_entities(const std::vector<PseudoSubgraph>& beams) {
  std::set<std::string> out;
  for (const auto& p : beams) {
    for (const auto& t : p.triples) {
      if (t.head.is_known) out.insert(t.head.label);
      if (t.tail.is_known) out.insert(t.tail.label);
    }
  }
  return out;
}

}  // namespace

double coverage(const PseudoSubgraph& p, const PseudoSubgraph& q) {
  return coverage(std::vector<PseudoSubgraph>{p}, q);
}

double coverage(const std::vector<PseudoSubgraph>& beams,
                const PseudoSubgraph& q) {
  std::set<std::string> gold = triple_set(q);
  if (gold.empty()) return 1.0;
  std::set<std::string> got;
  for (const auto& beam : beams) {
    auto s = triple_set(beam);
    got.insert(s.begin(), s.end());
  }
  std::size_t hit = 0;
  for (const auto& t : gold) hit += got.count(t);
  return static_cast<double>(hit) / static_cast<double>(gold.size());
}

double entity_correctness(const PseudoSubgraph& p, const KnowledgeGraph& g) {
  return entity_correctness(std::vector<PseudoSubgraph>{p}, g);
}

double entity_correctness(const std::vector<PseudoSubgraph>& beams,
                          const KnowledgeGraph& g) {
  std::set<std::string> names = known_entities(beams);
  if (names.empty()) return 1.0;
  std::size_t hit = 0;
  for (const auto& name : names) hit += g.has_entity(name) ? 1 : 0;
  return static_cast<double>(hit) / static_cast<double>(names.size());
}

std::size_t unique_triplet_count(const std::vector<PseudoSubgraph>& graphs) {
  std::set<std::string> all;
  for (const auto& p : graphs) {
    auto s = triple_set(p);
    all.insert(s.begin(), s.end());
  }
  return all.size();
}

std::vector<PseudoSubgraph> BeamSearchGenerator::generate(
    const std::string& claim, std::vector<std::string>& diagnostics) const {
  std::vector<PseudoSubgraph> out;
  BeamResult result;
  try {
    result = beam_decode(lm_, claim, trie_, tok_, cfg_);
  } catch (const std::exception& e) {
    diagnostics.push_back(std::string("beam search failed: ") + e.what());
    return out;
  }
  diagnostics.insert(diagnostics.end(), result.diagnostics.begin(),
                     result.diagnostics.end());
  for (const auto& hyp : result.hypotheses) {
    std::string text = tok_.decode(hyp.tokens);
    try {
      PseudoSubgraph graph = parse_pseudo_subgraph(text);
      graph = canonicalize_unknown_indices(graph);
      graph.beam_score = hyp.score;
      out.push_back(std::move(graph));
    } catch (const ParseError& e) {
      diagnostics.push_back(std::string("dropped unparseable beam: ") +
                            e.what());
    }
  }
  return out;
}

void ScriptedGenerator::add(std::string claim,
                            std::vector<std::string> raw_beams) {
  beams_[std::move(claim)] = std::move(raw_beams);
}

std::vector<PseudoSubgraph> ScriptedGenerator::generate(
    const std::string& claim, std::vector<std::string>& diagnostics) const {
  std::vector<PseudoSubgraph> out;
  auto it = beams_.find(claim);
  if (it == beams_.end()) {
    diagnostics.push_back("no scripted beams for claim");
    return out;
  }
  for (const auto& raw : it->second) {
    try {
      out.push_back(canonicalize_unknown_indices(parse_pseudo_subgraph(raw, kg_)));
    } catch (const ParseError& e) {
      diagnostics.push_back(std::string("dropped unparseable beam: ") +
                            e.what());
    }
  }
  return out;
}

std::vector<PseudoSubgraph> FewshotGenerator::generate(
    const std::string& claim, std::vector<std::string>& diagnostics) const {
  FewshotResult result = fewshot_generate_pseudo_subgraphs(backend_, claim, kg_);
  diagnostics.insert(diagnostics.end(), result.diagnostics.begin(),
                     result.diagnostics.end());
  for (const auto& entity : result.invalid_entities) {
    diagnostics.push_back("generated entity not in KG: \"" + entity + "\"");
  }
  std::vector<PseudoSubgraph> out;
  out.reserve(result.graphs.size());
  for (auto& g : result.graphs) {
    out.push_back(canonicalize_unknown_indices(g));
  }
  return out;
}

VerificationResult verify_claim(const std::string& claim,
                                const KnowledgeGraph& kg,
                                const PseudoGraphGenerator& generator,
                                const RelationScorer& scorer,
                                const ChatBackend& reasoner,
                                const RetrievalConfig& retrieval) {
  VerificationResult result;
  result.claim = claim;
  result.pseudo_subgraphs = generator.generate(claim, result.diagnostics);
  result.evidence =
      retrieve_subgraph(kg, result.pseudo_subgraphs, retrieval, scorer);
  result.diagnostics.insert(result.diagnostics.end(),
                            result.evidence.warnings.begin(),
                            result.evidence.warnings.end());
  std::string reply =
      reasoner.complete(build_reasoning_prompt(claim, result.evidence));
  try {
    ParsedVerdict parsed = parse_verdict(reply);
    result.verdict = parsed.verdict;
    result.justification = parsed.justification;
  } catch (const ParseError& e) {
    result.verdict = Verdict::Refuted;
    result.diagnostics.push_back(std::string("reasoner reply unparseable, "
                                             "defaulting to Refuted: ") +
                                 e.what());
  } catch (const VerdictDomainError& e) {
    result.verdict = Verdict::Refuted;
    result.diagnostics.push_back(std::string("reasoner verdict out of "
                                             "domain, defaulting to "
                                             "Refuted: ") +
                                 e.what());
  }
  return result;
}

DatasetRecord dataset_record_from_json(const nlohmann::json& j) {
  AnnotationRecord base = record_from_json(j);
  DatasetRecord r;
  r.claim = std::move(base.claim);
  r.entities = std::move(base.entities);
  r.evidence = std::move(base.evidence);
  if (!base.verdict_label.empty()) {
    std::string v = base.verdict_label;
    for (char& c : v) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
    if (v == "true" || v == "supported") {
      r.gold = Verdict::Supported;
    } else if (v == "false" || v == "refuted") {
      r.gold = Verdict::Refuted;
    } else {
      throw ParseError("gold label outside the verdict domain: \"" +
                       base.verdict_label + "\"");
    }
  }
  if (j.contains("category")) r.category = j["category"].get<std::string>();
  return r;
}

LoadedDataset load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open dataset: " + path);
  LoadedDataset out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.records.push_back(
          dataset_record_from_json(nlohmann::json::parse(line)));
    } catch (const std::exception& e) {
      ++out.skipped;
      out.errors.push_back("line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

namespace {

// Gold structure for coverage: the same decomposition the training
// pipeline applies, so generated single-hop triples compare like for like.
std::optional<PseudoSubgraph> gold_graph_of(const DatasetRecord& r) {
  if (r.evidence.empty()) return std::nullopt;
  AnnotationRecord rec;
  rec.claim = r.claim;
  rec.entities = r.entities;
  rec.evidence = r.evidence;
  SubstringClassifier classifier;
  TrainingExample ex = build_training_example(rec, classifier);
  return parse_pseudo_subgraph(ex.label);
}

}  // namespace

MetricsReport run_eval(const std::vector<DatasetRecord>& records,
                       const KnowledgeGraph& kg,
                       const PseudoGraphGenerator& generator,
                       const RelationScorer& scorer,
                       const ChatBackend& reasoner, const EvalConfig& cfg) {
  std::vector<const DatasetRecord*> selected;
  for (const auto& r : records) {
    if (!cfg.categories.empty() &&
        std::find(cfg.categories.begin(), cfg.categories.end(), r.category) ==
            cfg.categories.end()) {
      continue;
    }
    selected.push_back(&r);
  }

  std::vector<ClaimOutcome> outcomes(selected.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    while (true) {
      std::size_t i = next.fetch_add(1);
      if (i >= selected.size()) return;
      const DatasetRecord& record = *selected[i];
      ClaimOutcome& o = outcomes[i];
      o.claim = record.claim;
      o.category = record.category;
      try {
        VerificationResult v = verify_claim(record.claim, kg, generator,
                                            scorer, reasoner, cfg.retrieval);
        o.verdict = v.verdict;
        if (record.gold) o.correct = (*record.gold == v.verdict);
        o.entity_correctness = entity_correctness(v.pseudo_subgraphs, kg);
        if (auto gold = gold_graph_of(record)) {
          o.coverage = coverage(v.pseudo_subgraphs, *gold);
        }
        o.unique_triplets = unique_triplet_count(v.pseudo_subgraphs);
        o.evidence_size = v.evidence.triples.size();
      } catch (const std::exception& e) {
        o.skipped = true;
        o.error = e.what();
      }
    }
  };
  std::size_t n_threads = static_cast<std::size_t>(std::max(1, cfg.workers));
  n_threads = std::min(n_threads, std::max<std::size_t>(1, selected.size()));
  std::vector<std::thread> threads;
  for (std::size_t i = 0; i < n_threads; ++i) threads.emplace_back(worker);
  for (auto& t : threads) t.join();

  MetricsReport report;
  report.total = selected.size();
  report.outcomes = std::move(outcomes);

  std::size_t correct = 0, with_gold = 0, supported = 0;
  double ec_sum = 0.0, cov_sum = 0.0, uniq_sum = 0.0;
  std::size_t cov_n = 0;
  std::map<std::string, std::pair<std::size_t, std::size_t>> cat;  // correct, with_gold
  for (const auto& o : report.outcomes) {
    if (o.skipped) {
      ++report.skipped;
      continue;
    }
    bool is_supported = o.verdict == Verdict::Supported;
    if (cfg.support_predicted_only && !is_supported) continue;
    ++report.evaluated;
    if (is_supported) ++supported;
    ec_sum += o.entity_correctness;
    uniq_sum += static_cast<double>(o.unique_triplets);
    if (o.coverage) {
      cov_sum += *o.coverage;
      ++cov_n;
    }
    if (o.correct) {
      ++with_gold;
      if (*o.correct) ++correct;
      auto& c = cat[o.category];
      ++c.second;
      if (*o.correct) ++c.first;
    }
    ++report.category_counts[o.category];
  }
  if (report.evaluated) {
    report.entity_correctness_mean =
        ec_sum / static_cast<double>(report.evaluated);
    report.unique_triplet_mean = uniq_sum / static_cast<double>(report.evaluated);
    report.support_predicted_rate =
        static_cast<double>(supported) / static_cast<double>(report.evaluated);
  }
  if (with_gold) {
    report.accuracy =
        static_cast<double>(correct) / static_cast<double>(with_gold);
  }
  if (cov_n) report.coverage_mean = cov_sum / static_cast<double>(cov_n);
  for (const auto& [name, counts] : cat) {
    if (counts.second) {
      report.category_accuracy[name] =
          static_cast<double>(counts.first) / static_cast<double>(counts.second);
    }
  }
  return report;
}

nlohmann::ordered_json report_to_json(const MetricsReport& report) {
  nlohmann::ordered_json j;
  j["total"] = report.total;
  j["evaluated"] = report.evaluated;
  j["skipped"] = report.skipped;
  if (report.accuracy) j["accuracy"] = *report.accuracy;
  nlohmann::ordered_json cats = nlohmann::ordered_json::object();
  for (const auto& [name, acc] : report.category_accuracy) cats[name] = acc;
  j["category_accuracy"] = cats;
  nlohmann::ordered_json counts = nlohmann::ordered_json::object();
  for (const auto& [name, n] : report.category_counts) counts[name] = n;
  j["category_counts"] = counts;
  j["entity_correctness"] = report.entity_correctness_mean;
  if (report.coverage_mean) j["coverage"] = *report.coverage_mean;
  j["unique_triplets"] = report.unique_triplet_mean;
  j["support_predicted_rate"] = report.support_predicted_rate;
  nlohmann::ordered_json rows = nlohmann::ordered_json::array();
  for (const auto& o : report.outcomes) {
    nlohmann::ordered_json row;
    row["claim"] = o.claim;
    if (!o.category.empty()) row["category"] = o.category;
    if (o.skipped) {
      row["skipped"] = true;
      row["error"] = o.error;
    } else {
      row["verdict"] = verdict_wire(o.verdict);
      if (o.correct) row["correct"] = *o.correct;
      row["entity_correctness"] = o.entity_correctness;
      if (o.coverage) row["coverage"] = *o.coverage;
      row["unique_triplets"] = o.unique_triplets;
      row["evidence_size"] = o.evidence_size;
    }
    rows.push_back(std::move(row));
  }
  j["claims"] = rows;
  return j;
}

std::string report_table(const MetricsReport& report) {
  std::vector<std::array<std::string, 3>> rows;
  auto fmt = [](double v) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << v * 100.0;
    return out.str();
  };
  for (const auto& [name, acc] : report.category_accuracy) {
    rows.push_back({name, std::to_string(report.category_counts.at(name)),
                    fmt(acc)});
  }
  rows.push_back({"Average", std::to_string(report.evaluated),
                  report.accuracy ? fmt(*report.accuracy) : std::string("-")});

  std::array<std::size_t, 3> width = {8, 6, 8};
  std::array<std::string, 3> header = {"Category", "Claims", "Accuracy"};
  for (const auto& row : rows) {
    for (std::size_t c = 0; c < 3; ++c) width[c] = std::max(width[c], row[c].size());
  }
  std::ostringstream out;
  auto emit = [&](const std::array<std::string, 3>& row) {
    for (std::size_t c = 0; c < 3; ++c) {
      out << row[c] << std::string(width[c] - row[c].size() + 2, ' ');
    }
    out << '\n';
  };
  emit(header);
  for (const auto& row : rows) emit(row);
  return out.str();
}

}  // namespace claimpkg
