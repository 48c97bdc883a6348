#include <filesystem>
#include <random>
#include <sstream>

#include "doctest.h"
#include "support/helpers.hpp"

#include "claimpkg/kg_store.hpp"

using namespace claimpkg;
using testsupport::random_triples;

TEST_CASE("normalize_label splits and collapses") {
  CHECK(normalize_label("Twilight_(band)") == "Twilight (band)");
  CHECK(normalize_label("associatedMusicalArtist") ==
        "associated musical artist");
  CHECK(normalize_label("  a   b ") == "a b");
  CHECK(normalize_label("11th_Mississippi_Infantry_Monument") ==
        "11th Mississippi Infantry Monument");
  CHECK(normalize_label("") == "");
  CHECK(normalize_label("ABC") == "ABC");
}

TEST_CASE("normalize_label is idempotent") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> len(0, 24);
  std::uniform_int_distribution<int> ch(0, 63);
  const std::string alphabet =
      "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ_ ()0123456789-~";
  for (int i = 0; i < 2000; ++i) {
    std::string s;
    int n = len(rng);
    for (int j = 0; j < n; ++j) s.push_back(alphabet[static_cast<std::size_t>(ch(rng))]);
    std::string once = normalize_label(s);
    CHECK(normalize_label(once) == once);
  }
}

TEST_CASE("toggle_inverse flips the marker") {
  CHECK(toggle_inverse("genre") == "~genre");
  CHECK(toggle_inverse("~genre") == "genre");
  CHECK(toggle_inverse(toggle_inverse("location")) == "location");
}

TEST_CASE("tsv parsing reports line numbers") {
  std::istringstream ok("a\tr\tb\n# comment\n\nc\tr\td\n");
  KnowledgeGraph g = KnowledgeGraph::load_tsv(ok);
  CHECK(g.triple_count() == 2);
  CHECK(g.has_triple("a", "r", "b"));

  std::istringstream missing("a\tr\tb\nc\tr\n");
  CHECK_THROWS_WITH_AS(KnowledgeGraph::load_tsv(missing),
                       doctest::Contains("line 2"), ParseError);

  std::istringstream blank_field("a\t\tb\n");
  CHECK_THROWS_AS(KnowledgeGraph::load_tsv(blank_field), ParseError);
}

TEST_CASE("duplicate triples collapse") {
  KnowledgeGraph g = KnowledgeGraph::from_triples(
      {{"a", "r", "b"}, {"a", "r", "b"}, {"b", "r", "a"}});
  CHECK(g.triple_count() == 2);
}

TEST_CASE("neighbors match a full scan of the triple list") {
  std::mt19937_64 rng(11);
  for (int round = 0; round < 50; ++round) {
    auto triples = random_triples(rng, 20, 6, 60);
    KnowledgeGraph g = KnowledgeGraph::from_triples(triples);
    for (const auto& entity : g.entities()) {
      std::set<std::pair<std::string, std::string>> expected;
      for (const auto& t : triples) {
        if (t.head == entity) expected.insert({t.relation, t.tail});
        if (t.tail == entity) expected.insert({"~" + t.relation, t.head});
      }
      auto got = g.neighbors(entity);
      CHECK(std::set<std::pair<std::string, std::string>>(
                got.begin(), got.end()) == expected);
      CHECK(std::is_sorted(got.begin(), got.end()));
    }
  }
}

TEST_CASE("has_edge resolves the inverse marker") {
  KnowledgeGraph g = KnowledgeGraph::from_triples({{"a", "likes", "b"}});
  CHECK(g.has_edge("a", "likes", "b"));
  CHECK(g.has_edge("b", "~likes", "a"));
  CHECK_FALSE(g.has_edge("b", "likes", "a"));
  CHECK_FALSE(g.has_edge("a", "~likes", "b"));
}

TEST_CASE("connected_relations mirrors direction and handles self-loops") {
  KnowledgeGraph g = KnowledgeGraph::from_triples(
      {{"a", "r1", "b"}, {"b", "r2", "a"}, {"c", "loop", "c"}});
  CHECK(g.connected_relations("a", "b") ==
        std::vector<std::string>{"r1", "~r2"});
  CHECK(g.connected_relations("b", "a") ==
        std::vector<std::string>{"r2", "~r1"});
  CHECK(g.connected_relations("c", "c") ==
        std::vector<std::string>{"loop", "~loop"});
  CHECK(g.connected_relations("a", "c").empty());
}

TEST_CASE("neighbor cap truncates deterministically") {
  std::vector<Triple> triples;
  for (int i = 0; i < 100; ++i) {
    triples.push_back({"hub", "rel " + std::to_string(i), "spoke " + std::to_string(i)});
  }
  KnowledgeGraph g = KnowledgeGraph::from_triples(triples);
  auto capped = g.neighbors("hub", 10);
  REQUIRE(capped.size() == 10);
  auto full = g.neighbors("hub");
  CHECK(std::equal(capped.begin(), capped.end(), full.begin()));
}

TEST_CASE("binary index round-trips") {
  std::mt19937_64 rng(23);
  auto triples = random_triples(rng, 30, 8, 120);
  KnowledgeGraph g = KnowledgeGraph::from_triples(triples);
  auto path = std::filesystem::temp_directory_path() / "kg_roundtrip.idx";
  g.save_index(path.string());
  KnowledgeGraph loaded = KnowledgeGraph::load_index(path.string());
  CHECK(loaded.entities() == g.entities());
  CHECK(loaded.relations() == g.relations());
  CHECK(loaded.all_triples() == g.all_triples());
  for (const auto& e : g.entities()) {
    CHECK(loaded.neighbors(e) == g.neighbors(e));
  }
  std::filesystem::remove(path);

  CHECK_THROWS_AS(KnowledgeGraph::load_index("/nonexistent/path.idx"),
                  ParseError);
}
