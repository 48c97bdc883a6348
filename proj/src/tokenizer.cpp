#include "claimpkg/tokenizer.hpp"

#include <fstream>

#include "claimpkg/errors.hpp"

namespace claimpkg {

namespace {

constexpr TokenId kByteBase = 3;
constexpr TokenId kPieceBase = kByteBase + 256;

enum class ByteClass { Word, Space, Other };

ByteClass classify(unsigned char c) {
  if ((c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
      (c >= '0' && c <= '9') || c >= 0x80) {
    return ByteClass::Word;  // UTF-8 continuation/lead bytes stay in words
  }
  if (c == ' ') return ByteClass::Space;
  return ByteClass::Other;
}

}  // namespace

std::vector<std::string> PieceTokenizer::split_pieces(std::string_view text) {
  std::vector<std::string> out;
  std::size_t i = 0;
  while (i < text.size()) {
    ByteClass cls = classify(static_cast<unsigned char>(text[i]));
    if (cls == ByteClass::Other) {
      out.emplace_back(1, text[i]);
      ++i;
      continue;
    }
    std::size_t j = i + 1;
    while (j < text.size() &&
           classify(static_cast<unsigned char>(text[j])) == cls) {
      ++j;
    }
    out.emplace_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

void PieceTokenizer::add_piece(const std::string& piece) {
  if (piece_ids_.count(piece)) return;
  TokenId id = kPieceBase + static_cast<TokenId>(pieces_.size());
  pieces_.push_back(piece);
  piece_ids_.emplace(piece, id);
}

PieceTokenizer PieceTokenizer::from_corpus(
    const std::vector<std::string>& corpus) {
  PieceTokenizer tok;
  // Grammar glyphs emitted by the decoder outside entity spans.
  tok.add_piece(" ");
  tok.add_piece("\n");
  tok.add_piece("||");
  tok.add_piece("unknown");
  for (const auto& text : corpus) {
    for (auto& piece : split_pieces(text)) tok.add_piece(piece);
  }
  return tok;
}

std::vector<TokenId> PieceTokenizer::encode(std::string_view text) const {
  std::vector<TokenId> out;
  for (auto& piece : split_pieces(text)) {
    auto it = piece_ids_.find(piece);
    if (it != piece_ids_.end()) {
      out.push_back(it->second);
    } else {
      for (unsigned char c : piece) out.push_back(kByteBase + c);
    }
  }
  return out;
}

std::vector<TokenId> PieceTokenizer::encode_with_specials(
    std::string_view text) const {
  std::vector<TokenId> out;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t open = text.find("<e>", pos);
    std::size_t close = text.find("</e>", pos);
    std::size_t next = std::min(open, close);
    if (next == std::string_view::npos) {
      auto rest = encode(text.substr(pos));
      out.insert(out.end(), rest.begin(), rest.end());
      break;
    }
    if (next > pos) {
      auto chunk = encode(text.substr(pos, next - pos));
      out.insert(out.end(), chunk.begin(), chunk.end());
    }
    if (next == close) {
      out.push_back(kTokEntityClose);
      pos = next + 4;
    } else {
      out.push_back(kTokEntityOpen);
      pos = next + 3;
    }
  }
  return out;
}

std::string PieceTokenizer::decode(std::span<const TokenId> tokens) const {
  std::string out;
  for (TokenId t : tokens) {
    if (t == kTokEntityOpen) {
      out += "<e>";
    } else if (t == kTokEntityClose) {
      out += "</e>";
    } else if (t == kTokEos) {
      // end-of-sequence carries no text
    } else if (t >= kByteBase && t < kPieceBase) {
      out.push_back(static_cast<char>(t - kByteBase));
    } else if (t >= kPieceBase &&
               static_cast<std::size_t>(t - kPieceBase) < pieces_.size()) {
      out += pieces_[static_cast<std::size_t>(t - kPieceBase)];
    } else {
      throw ParseError("decode: token id out of range: " + std::to_string(t));
    }
  }
  return out;
}

std::size_t PieceTokenizer::vocab_size() const {
  return static_cast<std::size_t>(kPieceBase) + pieces_.size();
}

void PieceTokenizer::save(const std::string& path) const {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw BuildError("cannot write tokenizer: " + path);
  out << "CPKGTOK1\n" << pieces_.size() << "\n";
  for (const auto& p : pieces_) out << p.size() << "\n" << p;
  if (!out) throw BuildError("short write on tokenizer: " + path);
}

PieceTokenizer PieceTokenizer::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open tokenizer: " + path);
  std::string magic;
  std::getline(in, magic);
  if (magic != "CPKGTOK1") throw ParseError("bad tokenizer magic: " + path);
  std::size_t n = 0;
  in >> n;
  in.get();  // newline
  PieceTokenizer tok;
  for (std::size_t i = 0; i < n; ++i) {
    std::size_t len = 0;
    in >> len;
    in.get();
    std::string piece(len, '\0');
    in.read(piece.data(), static_cast<std::streamsize>(len));
    if (!in) throw ParseError("truncated tokenizer file: " + path);
    tok.add_piece(piece);
  }
  return tok;
}

}  // namespace claimpkg
