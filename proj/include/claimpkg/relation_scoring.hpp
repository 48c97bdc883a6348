#pragma once

#include <cstdint>
#include <memory>
#include <mutex>
#include <string>
#include <unordered_map>
#include <vector>

namespace claimpkg {

// Relation similarity function Sim(r1, r2); higher means more similar.
// Scores from different backends are not cross-comparable.
class RelationScorer {
 public:
  virtual ~RelationScorer() = default;
  virtual double sim(const std::string& r1, const std::string& r2) const = 0;
};

std::size_t levenshtein(const std::string& a, const std::string& b);

double sim_exact(const std::string& r1, const std::string& r2);

// 1 - levenshtein(r1, r2) / max(|r1|, |r2|); 1.0 when both empty.
double sim_fuzzy(const std::string& r1, const std::string& r2);

class ExactScorer : public RelationScorer {
 public:
  double sim(const std::string& r1, const std::string& r2) const override {
    return sim_exact(r1, r2);
  }
};

class FuzzyScorer : public RelationScorer {
 public:
  double sim(const std::string& r1, const std::string& r2) const override {
    return sim_fuzzy(r1, r2);
  }
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;
  // Unit-norm vectors, one per input, all of the same dimension.
  virtual std::vector<std::vector<float>> embed(
      const std::vector<std::string>& inputs) const = 0;
};

// OpenAI-embeddings-compatible remote provider.
class HttpEmbeddingProvider : public EmbeddingProvider {
 public:
  HttpEmbeddingProvider(std::string endpoint, std::string api_key,
                        std::string model);
  std::vector<std::vector<float>> embed(
      const std::vector<std::string>& inputs) const override;

 private:
  std::string endpoint_;
  std::string api_key_;
  std::string model_;
};

// Deterministic offline provider (hash-seeded unit vectors); used for
// tests and network-free runs.
class StubEmbeddingProvider : public EmbeddingProvider {
 public:
  explicit StubEmbeddingProvider(std::size_t dim = 32) : dim_(dim) {}
  std::vector<std::vector<float>> embed(
      const std::vector<std::string>& inputs) const override;

 private:
  std::size_t dim_;
};

// Precomputed embeddings for every KG relation.
class RelationIndex {
 public:
  static RelationIndex build(const std::vector<std::string>& relations,
                             const EmbeddingProvider& provider);

  const std::vector<float>* find(const std::string& relation) const;
  std::size_t dim() const { return dim_; }
  std::size_t size() const { return order_.size(); }

  void save(const std::string& path) const;
  static RelationIndex load(const std::string& path);

 private:
  std::size_t dim_ = 0;
  std::vector<std::string> order_;
  std::unordered_map<std::string, std::vector<float>> vectors_;
};

double sim_embedding(const std::string& r1, const std::string& r2,
                     const RelationIndex& idx,
                     const EmbeddingProvider& provider);

// Embedding-backed scorer with a memoized query side. On provider
// failure either rethrows (fail_hard) or downgrades to fuzzy scoring.
class EmbeddingScorer : public RelationScorer {
 public:
  EmbeddingScorer(const RelationIndex& index, const EmbeddingProvider& provider,
                  bool fail_hard = false)
      : index_(index), provider_(provider), fail_hard_(fail_hard) {}

  double sim(const std::string& r1, const std::string& r2) const override;
  std::size_t fallback_count() const { return fallbacks_; }

 private:
  const RelationIndex& index_;
  const EmbeddingProvider& provider_;
  bool fail_hard_;
  mutable std::mutex mu_;
  mutable std::unordered_map<std::string, std::vector<float>> query_cache_;
  mutable std::size_t fallbacks_ = 0;
};

}  // namespace claimpkg
