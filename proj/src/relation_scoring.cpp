#include "claimpkg/relation_scoring.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "httplib.h"
#include "json.hpp"

#include "claimpkg/errors.hpp"
#include "claimpkg/limiter.hpp"

namespace claimpkg {

std::size_t levenshtein(const std::string& a, const std::string& b) {
  const std::size_t n = a.size(), m = b.size();
  if (n == 0) return m;
  if (m == 0) return n;
  std::vector<std::size_t> prev(m + 1), cur(m + 1);
  for (std::size_t j = 0; j <= m; ++j) prev[j] = j;
  for (std::size_t i = 1; i <= n; ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= m; ++j) {
      std::size_t sub = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, sub});
    }
    std::swap(prev, cur);
  }
  return prev[m];
}

double sim_exact(const std::string& r1, const std::string& r2) {
  // Orientation markers compare verbatim: "~genre" != "genre".
  return r1 == r2 ? 1.0 : 0.0;
}

double sim_fuzzy(const std::string& r1, const std::string& r2) {
  std::size_t longest = std::max(r1.size(), r2.size());
  if (longest == 0) return 1.0;
  return 1.0 - static_cast<double>(levenshtein(r1, r2)) /
                   static_cast<double>(longest);
}

HttpEmbeddingProvider::HttpEmbeddingProvider(std::string endpoint,
                                             std::string api_key,
                                             std::string model)
    : endpoint_(std::move(endpoint)),
      api_key_(std::move(api_key)),
      model_(std::move(model)) {}

std::vector<std::vector<float>> HttpEmbeddingProvider::embed(
    const std::vector<std::string>& inputs) const {
  ConcurrencyLimiter::Guard guard(ConcurrencyLimiter::shared());
  httplib::Client client(endpoint_);
  client.set_read_timeout(60, 0);
  httplib::Headers headers;
  if (!api_key_.empty()) {
    headers.emplace("Authorization", "Bearer " + api_key_);
  }
  nlohmann::json body{{"input", inputs}, {"model", model_}};
  auto res = client.Post("/v1/embeddings", headers, body.dump(),
                         "application/json");
  if (!res) throw TransportError("embedding request failed (no response)");
  if (res->status != 200) {
    throw TransportError("embedding request failed: HTTP " +
                         std::to_string(res->status));
  }
  nlohmann::json parsed;
  try {
    parsed = nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("embedding response is not JSON: ") +
                        e.what());
  }
  std::vector<std::vector<float>> out;
  for (const auto& item : parsed.at("data")) {
    auto vec = item.at("embedding").get<std::vector<float>>();
    // Unit-normalize; the wire format does not guarantee it.
    double norm = 0.0;
    for (float v : vec) norm += static_cast<double>(v) * v;
    norm = std::sqrt(norm);
    if (norm > 0) {
      for (float& v : vec) v = static_cast<float>(v / norm);
    }
    out.push_back(std::move(vec));
  }
  if (out.size() != inputs.size()) {
    throw ProtocolError("embedding response count mismatch");
  }
  return out;
}

std::vector<std::vector<float>> StubEmbeddingProvider::embed(
    const std::vector<std::string>& inputs) const {
  std::vector<std::vector<float>> out;
  out.reserve(inputs.size());
  for (const auto& text : inputs) {
    // splitmix64 over the string hash gives a stable pseudo-random vector.
    uint64_t state = 0x9e3779b97f4a7c15ull;
    for (unsigned char c : text) state = (state ^ c) * 0x100000001b3ull;
    std::vector<float> vec(dim_);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim_; ++i) {
      state += 0x9e3779b97f4a7c15ull;
      uint64_t z = state;
      z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
      z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
      z ^= z >> 31;
      double v = static_cast<double>(z % 2000001) / 1000000.0 - 1.0;
      vec[i] = static_cast<float>(v);
      norm += v * v;
    }
    norm = std::sqrt(norm);
    for (float& v : vec) v = static_cast<float>(v / norm);
    out.push_back(std::move(vec));
  }
  return out;
}

RelationIndex RelationIndex::build(const std::vector<std::string>& relations,
                                   const EmbeddingProvider& provider) {
  RelationIndex idx;
  if (relations.empty()) return idx;
  constexpr std::size_t kBatch = 256;
  for (std::size_t start = 0; start < relations.size(); start += kBatch) {
    std::size_t end = std::min(start + kBatch, relations.size());
    std::vector<std::string> batch(relations.begin() + start,
                                   relations.begin() + end);
    auto vectors = provider.embed(batch);
    for (std::size_t i = 0; i < batch.size(); ++i) {
      if (idx.vectors_.emplace(batch[i], vectors[i]).second) {
        idx.order_.push_back(batch[i]);
      }
      if (idx.dim_ == 0) idx.dim_ = vectors[i].size();
    }
  }
  return idx;
}

const std::vector<float>* RelationIndex::find(
    const std::string& relation) const {
  auto it = vectors_.find(relation);
  return it == vectors_.end() ? nullptr : &it->second;
}

namespace {
constexpr char kRelMagic[8] = {'C', 'P', 'K', 'G', 'R', 'E', 'L', '1'};

void write_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {static_cast<unsigned char>(v & 0xff),
                        static_cast<unsigned char>((v >> 8) & 0xff),
                        static_cast<unsigned char>((v >> 16) & 0xff),
                        static_cast<unsigned char>((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

uint32_t read_u32(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  if (!in) throw ParseError("relation index: unexpected end of file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}
}  // namespace

void RelationIndex::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BuildError("cannot write relation index: " + path);
  out.write(kRelMagic, sizeof(kRelMagic));
  write_u32(out, static_cast<uint32_t>(dim_));
  write_u32(out, static_cast<uint32_t>(order_.size()));
  for (const auto& rel : order_) {
    write_u32(out, static_cast<uint32_t>(rel.size()));
    out.write(rel.data(), static_cast<std::streamsize>(rel.size()));
    const auto& vec = vectors_.at(rel);
    out.write(reinterpret_cast<const char*>(vec.data()),
              static_cast<std::streamsize>(vec.size() * sizeof(float)));
  }
  if (!out) throw BuildError("short write on relation index: " + path);
}

RelationIndex RelationIndex::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open relation index: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kRelMagic)) {
    throw ParseError("not a relation index (bad magic): " + path);
  }
  RelationIndex idx;
  idx.dim_ = read_u32(in);
  uint32_t count = read_u32(in);
  for (uint32_t i = 0; i < count; ++i) {
    uint32_t len = read_u32(in);
    std::string rel(len, '\0');
    in.read(rel.data(), len);
    std::vector<float> vec(idx.dim_);
    in.read(reinterpret_cast<char*>(vec.data()),
            static_cast<std::streamsize>(idx.dim_ * sizeof(float)));
    if (!in) throw ParseError("truncated relation index: " + path);
    idx.order_.push_back(rel);
    idx.vectors_.emplace(std::move(rel), std::move(vec));
  }
  return idx;
}

double sim_embedding(const std::string& r1, const std::string& r2,
                     const RelationIndex& idx,
                     const EmbeddingProvider& provider) {
  const std::vector<float>* kg_side = idx.find(r2);
  if (!kg_side) {
    throw BuildError("relation not in index: \"" + r2 + "\"");
  }
  auto query = provider.embed({r1});
  double dot = 0.0;
  std::size_t d = std::min(query[0].size(), kg_side->size());
  for (std::size_t i = 0; i < d; ++i) {
    dot += static_cast<double>(query[0][i]) * (*kg_side)[i];
  }
  return dot;
}

double EmbeddingScorer::sim(const std::string& r1,
                            const std::string& r2) const {
  const std::vector<float>* kg_side = index_.find(r2);
  try {
    const std::vector<float>* query = nullptr;
    {
      std::lock_guard lock(mu_);
      auto it = query_cache_.find(r1);
      if (it != query_cache_.end()) query = &it->second;
    }
    if (!query) {
      auto vec = provider_.embed({r1});
      std::lock_guard lock(mu_);
      query = &query_cache_.emplace(r1, std::move(vec[0])).first->second;
    }
    if (!kg_side) {
      // Relation seen only at query time (e.g. "~"-annotated form):
      // embed it on demand as well.
      auto vec = provider_.embed({r2});
      double dot = 0.0;
      std::size_t d = std::min(query->size(), vec[0].size());
      for (std::size_t i = 0; i < d; ++i) {
        dot += static_cast<double>((*query)[i]) * vec[0][i];
      }
      return dot;
    }
    double dot = 0.0;
    std::size_t d = std::min(query->size(), kg_side->size());
    for (std::size_t i = 0; i < d; ++i) {
      dot += static_cast<double>((*query)[i]) * (*kg_side)[i];
    }
    return dot;
  } catch (const std::exception&) {
    if (fail_hard_) throw;
    std::lock_guard lock(mu_);
    ++fallbacks_;
    return sim_fuzzy(r1, r2);
  }
}

}  // namespace claimpkg
