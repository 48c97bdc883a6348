#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "claimpkg/annotation.hpp"
#include "claimpkg/eval_harness.hpp"
#include "claimpkg/kg_store.hpp"
#include "claimpkg/pseudo_graph.hpp"
#include "claimpkg/relation_scoring.hpp"
#include "claimpkg/subgraph_retrieval.hpp"

namespace py = pybind11;
using namespace claimpkg;

namespace {

const RelationScorer& scorer_by_name(const std::string& name) {
  static const ExactScorer exact;
  static const FuzzyScorer fuzzy;
  if (name == "exact") return exact;
  if (name == "fuzzy") return fuzzy;
  throw py::value_error("scorer must be 'exact' or 'fuzzy'");
}

}  // namespace

PYBIND11_MODULE(_claimpkg, m) {
  m.doc() = "Claim verification over knowledge graphs";

  m.def("normalize_label", [](const std::string& s) { return normalize_label(s); });
  m.def("toggle_inverse", &toggle_inverse);
  m.def("levenshtein", &levenshtein);
  m.def("sim_exact", &sim_exact);
  m.def("sim_fuzzy", &sim_fuzzy);

  py::class_<KnowledgeGraph>(m, "KnowledgeGraph")
      .def_static("load_tsv_file", &KnowledgeGraph::load_tsv_file)
      .def_static("load_index", &KnowledgeGraph::load_index)
      .def_static("from_triples",
                  [](const std::vector<std::tuple<std::string, std::string,
                                                  std::string>>& raw) {
                    std::vector<Triple> triples;
                    triples.reserve(raw.size());
                    for (const auto& [h, r, t] : raw) {
                      triples.push_back({h, r, t});
                    }
                    return KnowledgeGraph::from_triples(triples);
                  })
      .def("save_index", &KnowledgeGraph::save_index)
      .def("has_entity", &KnowledgeGraph::has_entity)
      .def("has_triple", &KnowledgeGraph::has_triple)
      .def("has_edge", &KnowledgeGraph::has_edge)
      .def("neighbors", &KnowledgeGraph::neighbors, py::arg("entity"),
           py::arg("cap") = kDefaultHubCap)
      .def("connected_relations", &KnowledgeGraph::connected_relations)
      .def("entities", &KnowledgeGraph::entities)
      .def("relations", &KnowledgeGraph::relations)
      .def("triple_count", &KnowledgeGraph::triple_count);

  m.def("parse_pseudo_subgraph",
        [](const std::string& text) {
          PseudoSubgraph p = parse_pseudo_subgraph(text);
          return serialize_pseudo_subgraph(canonicalize_unknown_indices(p));
        },
        "Parses the raw grammar and returns the canonical serialization");

  m.def("retrieve",
        [](const KnowledgeGraph& kg, const std::vector<std::string>& graphs,
           int k1, int k2, const std::string& scorer) {
          std::vector<PseudoSubgraph> parsed;
          for (const auto& text : graphs) {
            parsed.push_back(parse_pseudo_subgraph(text));
          }
          RetrievalConfig cfg;
          cfg.k1 = k1;
          cfg.k2 = k2;
          EvidenceSubgraph evidence =
              retrieve_subgraph(kg, parsed, cfg, scorer_by_name(scorer));
          std::vector<std::tuple<std::string, std::string, std::string>> out;
          for (const auto& t : evidence.triples) {
            out.emplace_back(t.subject, t.relation, t.object);
          }
          return out;
        },
        py::arg("kg"), py::arg("graphs"), py::arg("k1") = 3,
        py::arg("k2") = 1, py::arg("scorer") = "fuzzy");

  m.def("coverage",
        [](const std::vector<std::string>& beams, const std::string& gold) {
          std::vector<PseudoSubgraph> parsed;
          for (const auto& text : beams) {
            parsed.push_back(parse_pseudo_subgraph(text));
          }
          return coverage(parsed, parse_pseudo_subgraph(gold));
        });

  m.def("entity_correctness",
        [](const std::vector<std::string>& beams, const KnowledgeGraph& kg) {
          std::vector<PseudoSubgraph> parsed;
          for (const auto& text : beams) {
            parsed.push_back(parse_pseudo_subgraph(text));
          }
          return entity_correctness(parsed, kg);
        });

  m.def("unique_triplet_count",
        [](const std::vector<std::string>& beams) {
          std::vector<PseudoSubgraph> parsed;
          for (const auto& text : beams) {
            parsed.push_back(parse_pseudo_subgraph(text));
          }
          return unique_triplet_count(parsed);
        });

  m.def("build_training_example",
        [](const std::string& record_json, std::optional<uint64_t> seed) {
          AnnotationRecord record =
              record_from_json(nlohmann::json::parse(record_json));
          SubstringClassifier classifier;
          TrainingExample ex = build_training_example(record, classifier, seed);
          return py::make_tuple(ex.input, ex.label);
        },
        py::arg("record_json"), py::arg("seed") = std::nullopt);
}
