#include "claimpkg/entity_trie.hpp"

#include <algorithm>
#include <fstream>

#include "claimpkg/errors.hpp"

namespace claimpkg {

uint32_t EntityTrie::child_or_add(uint32_t node, TokenId token) {
  auto& children = nodes_[node].children;
  auto it = std::lower_bound(
      children.begin(), children.end(), token,
      [](const auto& entry, TokenId t) { return entry.first < t; });
  if (it != children.end() && it->first == token) return it->second;
  uint32_t id = static_cast<uint32_t>(nodes_.size());
  nodes_.push_back(Node{});
  // nodes_ may have reallocated; re-fetch the children vector.
  auto& ch = nodes_[node].children;
  auto pos = std::lower_bound(
      ch.begin(), ch.end(), token,
      [](const auto& entry, TokenId t) { return entry.first < t; });
  ch.insert(pos, {token, id});
  return id;
}

EntityTrie EntityTrie::build(const std::vector<std::string>& entities,
                             const Tokenizer& tok) {
  EntityTrie trie;
  for (const auto& label : entities) {
    std::vector<TokenId> seq = tok.encode(label);
    if (seq.empty()) {
      throw BuildError("entity tokenizes to empty sequence: \"" + label +
                       "\"");
    }
    if (tok.decode(seq) != label) {
      throw BuildError("tokenizer round-trip failure on entity: \"" + label +
                       "\"");
    }
    uint32_t node = 0;
    for (TokenId t : seq) node = trie.child_or_add(node, t);
    if (!trie.nodes_[node].terminal) {
      trie.nodes_[node].terminal = true;
      ++trie.entity_count_;
    }
  }
  return trie;
}

const EntityTrie::Node* EntityTrie::walk(std::span<const TokenId> seq) const {
  uint32_t node = 0;
  for (TokenId t : seq) {
    const auto& children = nodes_[node].children;
    auto it = std::lower_bound(
        children.begin(), children.end(), t,
        [](const auto& entry, TokenId tok) { return entry.first < tok; });
    if (it == children.end() || it->first != t) return nullptr;
    node = it->second;
  }
  return &nodes_[node];
}

EntityTrie::LookupResult EntityTrie::lookup(
    std::span<const TokenId> prefix) const {
  LookupResult result;
  const Node* node = walk(prefix);
  if (!node) return result;
  result.terminal = node->terminal;
  result.allowed.reserve(node->children.size());
  for (const auto& [token, child] : node->children) result.allowed.push_back(token);
  return result;
}

bool EntityTrie::contains(std::span<const TokenId> seq) const {
  if (seq.empty()) return false;
  const Node* node = walk(seq);
  return node && node->terminal;
}

namespace {

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
  if (!in) throw ParseError("trie snapshot: unexpected end of file");
  return static_cast<uint32_t>(b[0]) | (static_cast<uint32_t>(b[1]) << 8) |
         (static_cast<uint32_t>(b[2]) << 16) |
         (static_cast<uint32_t>(b[3]) << 24);
}

constexpr char kTrieMagic[8] = {'C', 'P', 'K', 'G', 'T', 'R', 'I', '1'};

}  // namespace

void EntityTrie::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BuildError("cannot write trie: " + path);
  out.write(kTrieMagic, sizeof(kTrieMagic));
  write_u32(out, static_cast<uint32_t>(nodes_.size()));
  write_u32(out, static_cast<uint32_t>(entity_count_));
  for (const auto& node : nodes_) {
    write_u32(out, static_cast<uint32_t>(node.children.size()) << 1 |
                       (node.terminal ? 1u : 0u));
    for (const auto& [token, child] : node.children) {
      write_u32(out, static_cast<uint32_t>(token));
      write_u32(out, child);
    }
  }
  if (!out) throw BuildError("short write on trie: " + path);
}

EntityTrie EntityTrie::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trie: " + path);
  char magic[8];
  in.read(magic, sizeof(magic));
  if (!in || !std::equal(magic, magic + 8, kTrieMagic)) {
    throw ParseError("not a trie snapshot (bad magic): " + path);
  }
  EntityTrie trie;
  uint32_t n = read_u32(in);
  trie.entity_count_ = read_u32(in);
  trie.nodes_.assign(n, Node{});
  for (uint32_t i = 0; i < n; ++i) {
    uint32_t header = read_u32(in);
    trie.nodes_[i].terminal = (header & 1u) != 0;
    uint32_t nc = header >> 1;
    trie.nodes_[i].children.resize(nc);
    for (uint32_t c = 0; c < nc; ++c) {
      trie.nodes_[i].children[c].first = static_cast<TokenId>(read_u32(in));
      trie.nodes_[i].children[c].second = read_u32(in);
    }
  }
  return trie;
}

void TrieSnapshot::save(const std::string& path) const {
  tokenizer.save(path + ".tok");
  trie.save(path);
}

TrieSnapshot TrieSnapshot::load(const std::string& path) {
  TrieSnapshot snap;
  snap.tokenizer = PieceTokenizer::load(path + ".tok");
  snap.trie = EntityTrie::load(path);
  return snap;
}

}  // namespace claimpkg
