#include "claimpkg/annotation.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <random>
#include <unordered_map>
#include <unordered_set>

#include "claimpkg/errors.hpp"

namespace claimpkg {

AnnotationRecord record_from_json(const nlohmann::json& j) {
  AnnotationRecord r;
  r.claim = j.at("claim").get<std::string>();
  if (j.contains("label")) {
    if (j["label"].is_string()) {
      r.verdict_label = j["label"].get<std::string>();
    } else if (j["label"].is_boolean()) {
      r.verdict_label = j["label"].get<bool>() ? "true" : "false";
    }
  }
  if (j.contains("entities")) {
    r.entities = j["entities"].get<std::vector<std::string>>();
  }
  if (j.contains("evidence")) {
    for (const auto& item : j["evidence"]) {
      if (!item.is_array() || item.size() != 3 || !item[1].is_array()) {
        throw ParseError("evidence entry is not [head, [relations], tail]");
      }
      EvidencePath p;
      p.head = item[0].get<std::string>();
      p.relations = item[1].get<std::vector<std::string>>();
      p.tail = item[2].get<std::string>();
      if (p.relations.empty()) {
        throw ParseError("evidence path has no relations");
      }
      r.evidence.push_back(std::move(p));
    }
  }
  return r;
}

nlohmann::json record_to_json(const AnnotationRecord& r) {
  nlohmann::json evidence = nlohmann::json::array();
  for (const auto& p : r.evidence) {
    evidence.push_back({p.head, p.relations, p.tail});
  }
  return nlohmann::json{{"claim", r.claim},
                        {"label", r.verdict_label},
                        {"entities", r.entities},
                        {"evidence", evidence}};
}

namespace {

std::string normalize_relation(const std::string& r) {
  if (!r.empty() && r[0] == '~') return "~" + normalize_label(r.substr(1));
  return normalize_label(r);
}

std::string lower_ascii(const std::string& s) {
  std::string out = s;
  for (char& c : out) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  return out;
}

// "Twilight (band)" -> "Twilight".
std::string strip_parenthetical(const std::string& s) {
  if (s.size() > 1 && s.back() == ')') {
    std::size_t open = s.rfind(" (");
    if (open != std::string::npos && open > 0) return s.substr(0, open);
  }
  return s;
}

std::string triple_text(const PseudoTriple& t) {
  return serialize_entity_ref(t.head) + " || " + t.relation + " || " +
         serialize_entity_ref(t.tail);
}

// First occurrences of unknown indices must read 0,1,2,... in order.
bool unknown_order_ok(const std::vector<PseudoTriple>& triples) {
  int expected = 0;
  std::unordered_set<int> seen;
  for (const auto& t : triples) {
    for (const EntityRef* ref : {&t.head, &t.tail}) {
      if (ref->is_known || seen.count(ref->unknown_index)) continue;
      if (ref->unknown_index != expected) return false;
      seen.insert(ref->unknown_index);
      ++expected;
    }
  }
  return true;
}

}  // namespace

std::pair<std::vector<PseudoTriple>, int> decompose_path(const EvidencePath& p,
                                                         int next_unknown) {
  if (p.relations.empty()) {
    throw ParseError("cannot decompose a path with no relations");
  }
  std::vector<PseudoTriple> out;
  EntityRef current = EntityRef::known(p.head);
  for (std::size_t i = 0; i + 1 < p.relations.size(); ++i) {
    EntityRef fresh = EntityRef::unknown(next_unknown++);
    out.push_back({current, p.relations[i], fresh});
    current = fresh;
  }
  out.push_back({current, p.relations.back(), EntityRef::known(p.tail)});
  return {std::move(out), next_unknown};
}

EntityPartition SubstringClassifier::classify(
    const std::string& claim, const std::vector<std::string>& entities) const {
  EntityPartition out;
  std::string haystack = lower_ascii(claim);
  for (const auto& entity : entities) {
    std::string needle = lower_ascii(normalize_label(entity));
    std::string bare = lower_ascii(strip_parenthetical(normalize_label(entity)));
    bool mentioned = !needle.empty() &&
                     (haystack.find(needle) != std::string::npos ||
                      haystack.find(bare) != std::string::npos);
    (mentioned ? out.in_claim : out.out_of_claim).push_back(entity);
  }
  return out;
}

std::string build_entity_prompt(const std::string& claim,
                                const std::vector<std::string>& entities) {
  std::string prompt =
      "ANNOTATE IN AND OUT ENTITIES\n"
      "\n"
      "Task: Specify if the following entities are mentioned in the claim "
      "or not.\n"
      "Respond correctly in the following JSON format and do not output "
      "anything else:\n"
      "{\n"
      "  \"in_entities\": [list of entities that are in the claim],\n"
      "  \"out_entities\": [list of entities that are not in the claim]\n"
      "}\n"
      "Do not change the entity names from the list of provided entities.\n"
      "\n"
      "Claim: " +
      claim + "\nEntities: " + nlohmann::json(entities).dump() + "\n";
  return prompt;
}

EntityPartition RemoteClassifier::classify(
    const std::string& claim, const std::vector<std::string>& entities) const {
  if (entities.empty()) return {};
  std::string raw;
  try {
    raw = backend_.complete(build_entity_prompt(claim, entities));
  } catch (const std::exception& e) {
    EntityPartition out = fallback_.classify(claim, entities);
    out.diagnostics.push_back(std::string("entity classifier call failed, "
                                          "used offline matcher: ") +
                              e.what());
    return out;
  }
  nlohmann::json parsed;
  std::size_t open = raw.find('{');
  std::size_t close = raw.rfind('}');
  if (open != std::string::npos && close != std::string::npos && close > open) {
    parsed = nlohmann::json::parse(raw.substr(open, close - open + 1), nullptr,
                                   /*allow_exceptions=*/false);
  }
  if (!parsed.is_object() || !parsed.contains("in_entities") ||
      !parsed.contains("out_entities")) {
    EntityPartition out = fallback_.classify(claim, entities);
    out.diagnostics.push_back(
        "entity classifier returned malformed output, used offline matcher");
    return out;
  }
  std::unordered_set<std::string> in_set, out_set;
  for (const auto& v : parsed["in_entities"]) {
    if (v.is_string()) in_set.insert(v.get<std::string>());
  }
  for (const auto& v : parsed["out_entities"]) {
    if (v.is_string()) out_set.insert(v.get<std::string>());
  }
  EntityPartition out;
  std::vector<std::string> dropped;
  for (const auto& entity : entities) {
    if (in_set.count(entity)) {
      out.in_claim.push_back(entity);
    } else if (out_set.count(entity)) {
      out.out_of_claim.push_back(entity);
    } else {
      dropped.push_back(entity);
    }
  }
  if (!dropped.empty()) {
    EntityPartition rest = fallback_.classify(claim, dropped);
    out.in_claim.insert(out.in_claim.end(), rest.in_claim.begin(),
                        rest.in_claim.end());
    out.out_of_claim.insert(out.out_of_claim.end(), rest.out_of_claim.begin(),
                            rest.out_of_claim.end());
    out.diagnostics.push_back(
        "entity classifier dropped " + std::to_string(dropped.size()) +
        " entities, used offline matcher for them");
  }
  return out;
}

TrainingExample build_training_example(const AnnotationRecord& record,
                                       const EntityClassifier& classifier,
                                       std::optional<uint64_t> seed) {
  // Work in normalized label space throughout.
  std::vector<std::string> entities;
  entities.reserve(record.entities.size());
  for (const auto& e : record.entities) entities.push_back(normalize_label(e));

  EntityPartition partition = classifier.classify(record.claim, entities);
  std::unordered_set<std::string> out_of_claim(partition.out_of_claim.begin(),
                                               partition.out_of_claim.end());

  int next_unknown = 0;
  std::vector<PseudoTriple> triples;
  std::unordered_set<std::string> emitted;
  // Paths that leave the same entity over the same first relation talk about
  // the same intermediate, so they share its placeholder.
  std::map<std::pair<std::string, std::string>, int> hop_unknowns;

  auto emit = [&](PseudoTriple t) {
    if (emitted.insert(triple_text(t)).second) triples.push_back(std::move(t));
  };

  for (const auto& raw_path : record.evidence) {
    EvidencePath path;
    path.head = normalize_label(raw_path.head);
    path.tail = normalize_label(raw_path.tail);
    for (const auto& rel : raw_path.relations) {
      path.relations.push_back(normalize_relation(rel));
    }
    if (path.relations.empty()) {
      throw ParseError("evidence path with no relations in record");
    }
    EntityRef current = EntityRef::known(path.head);
    for (std::size_t i = 0; i + 1 < path.relations.size(); ++i) {
      std::pair<std::string, std::string> key{serialize_entity_ref(current),
                                              path.relations[i]};
      auto it = hop_unknowns.find(key);
      if (it == hop_unknowns.end()) {
        it = hop_unknowns.emplace(key, next_unknown++).first;
      }
      EntityRef fresh = EntityRef::unknown(it->second);
      emit({current, path.relations[i], fresh});
      current = fresh;
    }
    emit({current, path.relations.back(), EntityRef::known(path.tail)});
  }

  // Entities the claim never names become placeholders too.
  std::unordered_map<std::string, int> substitutions;
  std::vector<PseudoTriple> substituted;
  std::unordered_set<std::string> kept;
  for (auto& t : triples) {
    for (EntityRef* ref : {&t.head, &t.tail}) {
      if (!ref->is_known || !out_of_claim.count(ref->label)) continue;
      auto [it, inserted] = substitutions.emplace(ref->label, next_unknown);
      if (inserted) ++next_unknown;
      *ref = EntityRef::unknown(it->second);
    }
    if (t.double_unknown() && t.head.unknown_index == t.tail.unknown_index) {
      continue;  // self-loop collapsed onto one placeholder carries nothing
    }
    if (kept.insert(triple_text(t)).second) substituted.push_back(std::move(t));
  }

  PseudoSubgraph graph{std::move(substituted), {}};
  graph = canonicalize_unknown_indices(graph);

  if (seed && graph.triples.size() > 1) {
    std::mt19937_64 rng(*seed);
    std::vector<PseudoTriple> shuffled = graph.triples;
    for (int attempt = 0; attempt < 1000; ++attempt) {
      std::shuffle(shuffled.begin(), shuffled.end(), rng);
      if (unknown_order_ok(shuffled)) {
        graph.triples = shuffled;
        break;
      }
    }
  }

  TrainingExample example;
  example.input = record.claim;
  example.label = serialize_pseudo_subgraph(graph);
  PseudoSubgraph reparsed = parse_pseudo_subgraph(example.label);
  if (serialize_pseudo_subgraph(reparsed) != example.label) {
    throw BuildError("training label failed round-trip self-check");
  }
  return example;
}

AnnotateStats annotate_file(const std::string& in_path,
                            const std::string& out_path,
                            const EntityClassifier& classifier,
                            std::optional<uint64_t> seed) {
  std::ifstream in(in_path);
  if (!in) throw ParseError("cannot open dataset: " + in_path);
  std::ofstream out(out_path, std::ios::trunc);
  if (!out) throw BuildError("cannot write output: " + out_path);

  AnnotateStats stats;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      AnnotationRecord record = record_from_json(nlohmann::json::parse(line));
      std::optional<uint64_t> record_seed;
      if (seed) record_seed = *seed + lineno;
      TrainingExample ex =
          build_training_example(record, classifier, record_seed);
      nlohmann::json row{{"input", ex.input}, {"label", ex.label}};
      out << row.dump() << '\n';
      ++stats.written;
    } catch (const std::exception& e) {
      ++stats.skipped;
      stats.errors.push_back("line " + std::to_string(lineno) + ": " +
                             e.what());
    }
  }
  if (!out) throw BuildError("short write on output: " + out_path);
  return stats;
}

}  // namespace claimpkg
