#include <atomic>
#include <cmath>
#include <filesystem>
#include <random>
#include <thread>

#include "doctest.h"
#include "httplib.h"
#include "json.hpp"

#include "claimpkg/errors.hpp"
#include "claimpkg/relation_scoring.hpp"

using namespace claimpkg;

namespace {

// Full-matrix reference for the two-row production implementation.
std::size_t levenshtein_matrix(const std::string& a, const std::string& b) {
  std::vector<std::vector<std::size_t>> d(a.size() + 1,
                                          std::vector<std::size_t>(b.size() + 1));
  for (std::size_t i = 0; i <= a.size(); ++i) d[i][0] = i;
  for (std::size_t j = 0; j <= b.size(); ++j) d[0][j] = j;
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      std::size_t sub = d[i - 1][j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      d[i][j] = std::min({d[i - 1][j] + 1, d[i][j - 1] + 1, sub});
    }
  }
  return d[a.size()][b.size()];
}

std::string random_word(std::mt19937_64& rng, int max_len) {
  std::uniform_int_distribution<int> len(0, max_len);
  std::uniform_int_distribution<int> ch(0, 5);  // tiny alphabet forces overlap
  std::string s;
  int n = len(rng);
  for (int i = 0; i < n; ++i) s.push_back(static_cast<char>('a' + ch(rng)));
  return s;
}

}  // namespace

TEST_CASE("edit distance known values") {
  CHECK(levenshtein("kitten", "sitting") == 3);
  CHECK(levenshtein("", "abc") == 3);
  CHECK(levenshtein("abc", "") == 3);
  CHECK(levenshtein("abc", "abc") == 0);
  CHECK(levenshtein("flaw", "lawn") == 2);
}

TEST_CASE("edit distance agrees with the full matrix") {
  std::mt19937_64 rng(3);
  for (int i = 0; i < 2000; ++i) {
    std::string a = random_word(rng, 12), b = random_word(rng, 12);
    CHECK(levenshtein(a, b) == levenshtein_matrix(a, b));
  }
}

TEST_CASE("fuzzy similarity formula") {
  CHECK(sim_fuzzy("kitten", "sitting") == doctest::Approx(4.0 / 7.0).epsilon(1e-12));
  CHECK(sim_fuzzy("", "") == 1.0);
  CHECK(sim_fuzzy("a", "") == 0.0);
  CHECK(sim_fuzzy("same", "same") == 1.0);
}

TEST_CASE("fuzzy similarity symmetry and range") {
  std::mt19937_64 rng(13);
  for (int i = 0; i < 5000; ++i) {
    std::string a = random_word(rng, 10), b = random_word(rng, 10);
    double s = sim_fuzzy(a, b);
    CHECK(s == sim_fuzzy(b, a));
    CHECK(s >= 0.0);
    CHECK(s <= 1.0);
  }
}

TEST_CASE("exact similarity compares verbatim, marker included") {
  CHECK(sim_exact("genre", "genre") == 1.0);
  CHECK(sim_exact("genre", "~genre") == 0.0);
  CHECK(sim_exact("genre", "Genre") == 0.0);
}

TEST_CASE("stub embeddings are deterministic unit vectors") {
  StubEmbeddingProvider provider(16);
  auto a = provider.embed({"location", "location", "state"});
  REQUIRE(a.size() == 3);
  CHECK(a[0] == a[1]);
  CHECK(a[0] != a[2]);
  for (const auto& vec : a) {
    REQUIRE(vec.size() == 16);
    double norm = 0.0;
    for (float v : vec) norm += static_cast<double>(v) * v;
    CHECK(norm == doctest::Approx(1.0).epsilon(1e-5));
  }
}

TEST_CASE("relation index build, lookup, and file round-trip") {
  StubEmbeddingProvider provider(8);
  std::vector<std::string> relations{"location", "state", "state", "genre"};
  RelationIndex idx = RelationIndex::build(relations, provider);
  CHECK(idx.size() == 3);  // deduped
  CHECK(idx.dim() == 8);
  CHECK(idx.find("state") != nullptr);
  CHECK(idx.find("absent") == nullptr);

  auto path = std::filesystem::temp_directory_path() / "relations.idx";
  idx.save(path.string());
  RelationIndex loaded = RelationIndex::load(path.string());
  CHECK(loaded.size() == idx.size());
  CHECK(loaded.dim() == idx.dim());
  CHECK(*loaded.find("genre") == *idx.find("genre"));
  std::filesystem::remove(path);
}

TEST_CASE("embedding similarity is the cosine against the index") {
  StubEmbeddingProvider provider(32);
  RelationIndex idx = RelationIndex::build({"location", "genre"}, provider);
  CHECK(sim_embedding("location", "location", idx, provider) ==
        doctest::Approx(1.0).epsilon(1e-5));
  double cross = sim_embedding("location", "genre", idx, provider);
  CHECK(cross < 0.999);
  CHECK(std::abs(cross) <= 1.0 + 1e-6);
  CHECK_THROWS_AS(sim_embedding("location", "absent", idx, provider),
                  BuildError);
}

namespace {

struct FailingProvider : EmbeddingProvider {
  std::vector<std::vector<float>> embed(
      const std::vector<std::string>&) const override {
    throw TransportError("provider down");
  }
};

}  // namespace

TEST_CASE("embedding scorer handles query-side relations and failures") {
  StubEmbeddingProvider provider(32);
  RelationIndex idx = RelationIndex::build({"location"}, provider);

  SUBCASE("indexed and on-demand relations both score") {
    EmbeddingScorer scorer(idx, provider);
    CHECK(scorer.sim("location", "location") ==
          doctest::Approx(1.0).epsilon(1e-5));
    // "~location" is query-time only; embedded on demand, not an error.
    CHECK_NOTHROW(scorer.sim("location", "~location"));
    CHECK(scorer.fallback_count() == 0);
  }

  SUBCASE("soft failure downgrades to fuzzy") {
    FailingProvider down;
    EmbeddingScorer scorer(idx, down);
    CHECK(scorer.sim("kitten", "sitting") ==
          doctest::Approx(4.0 / 7.0).epsilon(1e-12));
    CHECK(scorer.fallback_count() == 1);
  }

  SUBCASE("fail_hard rethrows") {
    FailingProvider down;
    EmbeddingScorer scorer(idx, down, /*fail_hard=*/true);
    CHECK_THROWS_AS(scorer.sim("a", "b"), TransportError);
  }
}

TEST_CASE("http embedding provider speaks the wire format") {
  httplib::Server server;
  std::atomic<int> hits{0};
  server.Post("/v1/embeddings", [&](const httplib::Request& req,
                                    httplib::Response& res) {
    ++hits;
    auto body = nlohmann::json::parse(req.body);
    nlohmann::json data = nlohmann::json::array();
    for (std::size_t i = 0; i < body.at("input").size(); ++i) {
      // Deliberately unnormalized; the client must normalize.
      data.push_back({{"embedding", {3.0, 4.0}}});
    }
    res.set_content(nlohmann::json{{"data", data}}.dump(), "application/json");
  });
  int port = server.bind_to_any_port("127.0.0.1");
  std::thread runner([&] { server.listen_after_bind(); });
  server.wait_until_ready();

  HttpEmbeddingProvider provider("http://127.0.0.1:" + std::to_string(port),
                                 "secret", "model-x");
  auto vecs = provider.embed({"one", "two"});
  REQUIRE(vecs.size() == 2);
  CHECK(vecs[0][0] == doctest::Approx(0.6));
  CHECK(vecs[0][1] == doctest::Approx(0.8));
  CHECK(hits == 1);

  server.stop();
  runner.join();
}
