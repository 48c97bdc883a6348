#include "claimpkg/kg_store.hpp"

#include <algorithm>
#include <cctype>
#include <cstring>
#include <fstream>
#include <istream>
#include <sstream>

namespace claimpkg {

namespace {

bool is_space_byte(char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}

uint64_t pair_key(uint32_t a, uint32_t b) {
  if (a > b) std::swap(a, b);
  return (static_cast<uint64_t>(a) << 32) | b;
}

constexpr char kIndexMagic[8] = {'C', 'P', 'K', 'G', 'I', 'D', 'X', '1'};

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
  if (!in) throw ParseError("kg index: unexpected end of file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

void write_string(std::ostream& out, const std::string& s) {
  write_u32(out, static_cast<uint32_t>(s.size()));
  out.write(s.data(), static_cast<std::streamsize>(s.size()));
}

std::string read_string(std::istream& in) {
  uint32_t n = read_u32(in);
  std::string s(n, '\0');
  in.read(s.data(), n);
  if (!in) throw ParseError("kg index: unexpected end of file");
  return s;
}

}  // namespace

std::string normalize_label(std::string_view raw) {
  std::string out;
  out.reserve(raw.size());
  for (char c : raw) {
    if (c == '_') c = ' ';
    if (is_space_byte(c)) {
      if (!out.empty() && out.back() != ' ') out.push_back(' ');
      continue;
    }
    // Split camelCase against the emitted text so repeated boundaries
    // collapse in one pass (keeps the function idempotent).
    if (std::isupper(static_cast<unsigned char>(c)) && !out.empty() &&
        std::islower(static_cast<unsigned char>(out.back()))) {
      out.push_back(' ');
      out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
      continue;
    }
    out.push_back(c);
  }
  while (!out.empty() && out.back() == ' ') out.pop_back();
  return out;
}

std::string toggle_inverse(const std::string& relation) {
  if (!relation.empty() && relation[0] == '~') return relation.substr(1);
  return "~" + relation;
}

uint32_t KnowledgeGraph::intern_entity(const std::string& label) {
  auto it = entity_ids_.find(label);
  if (it != entity_ids_.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(entities_.size());
  entities_.push_back(label);
  entity_ids_.emplace(label, id);
  return id;
}

uint32_t KnowledgeGraph::intern_relation(const std::string& label) {
  auto it = relation_ids_.find(label);
  if (it != relation_ids_.end()) return it->second;
  uint32_t id = static_cast<uint32_t>(relations_.size());
  relations_.push_back(label);
  relation_ids_.emplace(label, id);
  return id;
}

const uint32_t* KnowledgeGraph::find_entity(const std::string& label) const {
  auto it = entity_ids_.find(label);
  return it == entity_ids_.end() ? nullptr : &it->second;
}

void KnowledgeGraph::add_triple_ids(uint32_t h, uint32_t r, uint32_t t) {
  triples_.push_back({h, r, t});
}

void KnowledgeGraph::build_indices() {
  std::sort(triples_.begin(), triples_.end());
  triples_.erase(std::unique(triples_.begin(), triples_.end()),
                 triples_.end());

  adjacency_.assign(entities_.size(), {});
  pair_index_.clear();
  for (const auto& t : triples_) {
    adjacency_[t[0]].push_back(Edge{t[1], t[2], false});
    adjacency_[t[2]].push_back(Edge{t[1], t[0], true});
    pair_index_[pair_key(t[0], t[2])].emplace_back(t[1], t[0]);
  }
  // Sort each adjacency list by (annotated relation, neighbor label) with
  // precomputed keys; the annotated form is what queries observe.
  std::vector<std::pair<std::pair<std::string, std::string>, Edge>> keyed;
  for (auto& edges : adjacency_) {
    keyed.clear();
    keyed.reserve(edges.size());
    for (const Edge& e : edges) {
      std::string rel = e.inverse ? "~" + relations_[e.relation]
                                  : relations_[e.relation];
      keyed.emplace_back(std::make_pair(std::move(rel), entities_[e.other]), e);
    }
    std::sort(keyed.begin(), keyed.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < edges.size(); ++i) edges[i] = keyed[i].second;
  }
}

KnowledgeGraph KnowledgeGraph::load_tsv(std::istream& in) {
  KnowledgeGraph g;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#') continue;
    std::array<std::string, 3> fields;
    std::size_t field = 0, start = 0;
    for (std::size_t i = 0; i <= line.size(); ++i) {
      if (i == line.size() || line[i] == '\t') {
        if (field >= 3) {
          throw ParseError("line " + std::to_string(lineno) +
                           ": expected 3 tab-separated fields");
        }
        fields[field++] = line.substr(start, i - start);
        start = i + 1;
      }
    }
    if (field != 3) {
      throw ParseError("line " + std::to_string(lineno) +
                       ": expected 3 tab-separated fields, got " +
                       std::to_string(field));
    }
    std::string h = normalize_label(fields[0]);
    std::string r = normalize_label(fields[1]);
    std::string t = normalize_label(fields[2]);
    if (h.empty() || r.empty() || t.empty()) {
      throw ParseError("line " + std::to_string(lineno) + ": empty field");
    }
    g.add_triple_ids(g.intern_entity(h), g.intern_relation(r),
                     g.intern_entity(t));
  }
  g.build_indices();
  return g;
}

KnowledgeGraph KnowledgeGraph::load_tsv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open kg file: " + path);
  return load_tsv(in);
}

KnowledgeGraph KnowledgeGraph::from_triples(const std::vector<Triple>& raw) {
  KnowledgeGraph g;
  for (const auto& t : raw) {
    std::string h = normalize_label(t.head);
    std::string r = normalize_label(t.relation);
    std::string tl = normalize_label(t.tail);
    if (h.empty() || r.empty() || tl.empty()) {
      throw ParseError("from_triples: empty field");
    }
    g.add_triple_ids(g.intern_entity(h), g.intern_relation(r),
                     g.intern_entity(tl));
  }
  g.build_indices();
  return g;
}

void KnowledgeGraph::save_index(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BuildError("cannot write kg index: " + path);
  out.write(kIndexMagic, sizeof(kIndexMagic));
  write_u32(out, static_cast<uint32_t>(entities_.size()));
  write_u32(out, static_cast<uint32_t>(relations_.size()));
  write_u32(out, static_cast<uint32_t>(triples_.size()));
  for (const auto& e : entities_) write_string(out, e);
  for (const auto& r : relations_) write_string(out, r);
  for (const auto& t : triples_) {
    write_u32(out, t[0]);
    write_u32(out, t[1]);
    write_u32(out, t[2]);
  }
  if (!out) throw BuildError("short write on kg index: " + path);
}

KnowledgeGraph KnowledgeGraph::load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open kg index: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kIndexMagic, sizeof(magic)) != 0) {
    throw ParseError("not a kg index file (bad magic): " + path);
  }
  KnowledgeGraph g;
  uint32_t ne = read_u32(in), nr = read_u32(in), nt = read_u32(in);
  g.entities_.reserve(ne);
  for (uint32_t i = 0; i < ne; ++i) {
    g.entities_.push_back(read_string(in));
    g.entity_ids_.emplace(g.entities_.back(), i);
  }
  g.relations_.reserve(nr);
  for (uint32_t i = 0; i < nr; ++i) {
    g.relations_.push_back(read_string(in));
    g.relation_ids_.emplace(g.relations_.back(), i);
  }
  g.triples_.reserve(nt);
  for (uint32_t i = 0; i < nt; ++i) {
    uint32_t h = read_u32(in), r = read_u32(in), t = read_u32(in);
    if (h >= ne || r >= nr || t >= ne) {
      throw ParseError("kg index: id out of range");
    }
    g.triples_.push_back({h, r, t});
  }
  g.build_indices();
  return g;
}

bool KnowledgeGraph::has_entity(const std::string& label) const {
  return entity_ids_.count(label) != 0;
}

std::vector<Triple> KnowledgeGraph::all_triples() const {
  std::vector<Triple> out;
  out.reserve(triples_.size());
  for (const auto& t : triples_) {
    out.push_back({entities_[t[0]], relations_[t[1]], entities_[t[2]]});
  }
  return out;
}

bool KnowledgeGraph::has_triple(const std::string& head,
                                const std::string& relation,
                                const std::string& tail) const {
  const uint32_t* h = find_entity(head);
  const uint32_t* t = find_entity(tail);
  auto r = relation_ids_.find(relation);
  if (!h || !t || r == relation_ids_.end()) return false;
  std::array<uint32_t, 3> key{*h, r->second, *t};
  return std::binary_search(triples_.begin(), triples_.end(), key);
}

bool KnowledgeGraph::has_edge(const std::string& subject,
                              const std::string& relation,
                              const std::string& object) const {
  if (!relation.empty() && relation[0] == '~') {
    return has_triple(object, relation.substr(1), subject);
  }
  return has_triple(subject, relation, object);
}

std::vector<std::pair<std::string, std::string>> KnowledgeGraph::neighbors(
    const std::string& e, std::size_t cap) const {
  std::vector<std::pair<std::string, std::string>> out;
  const uint32_t* id = find_entity(e);
  if (!id) return out;
  const auto& edges = adjacency_[*id];
  std::size_t n = std::min(cap, edges.size());
  out.reserve(n);
  for (std::size_t i = 0; i < n; ++i) {
    const Edge& edge = edges[i];
    std::string rel = edge.inverse ? "~" + relations_[edge.relation]
                                   : relations_[edge.relation];
    out.emplace_back(std::move(rel), entities_[edge.other]);
  }
  return out;
}

std::vector<std::string> KnowledgeGraph::connected_relations(
    const std::string& e1, const std::string& e2) const {
  std::vector<std::string> out;
  const uint32_t* a = find_entity(e1);
  const uint32_t* b = find_entity(e2);
  if (!a || !b) return out;
  auto it = pair_index_.find(pair_key(*a, *b));
  if (it == pair_index_.end()) return out;
  for (const auto& [rel, head] : it->second) {
    if (*a == *b) {
      // Self-loop: the edge reads in both directions.
      out.push_back(relations_[rel]);
      out.push_back("~" + relations_[rel]);
    } else if (head == *a) {
      out.push_back(relations_[rel]);
    } else {
      out.push_back("~" + relations_[rel]);
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace claimpkg
