#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace claimpkg {

using TokenId = int32_t;

// Reserved ids shared by every tokenizer in this project.
inline constexpr TokenId kTokEntityOpen = 0;   // <e>
inline constexpr TokenId kTokEntityClose = 1;  // </e>
inline constexpr TokenId kTokEos = 2;

class Tokenizer {
 public:
  virtual ~Tokenizer() = default;
  virtual std::vector<TokenId> encode(std::string_view text) const = 0;
  virtual std::string decode(std::span<const TokenId> tokens) const = 0;
  virtual std::size_t vocab_size() const = 0;
};

// Deterministic reference tokenizer: splits text into pieces (runs of
// word bytes, runs of spaces, single punctuation characters). Pieces seen
// during construction get their own ids; anything else falls back to
// per-byte tokens, so decode(encode(x)) == x for every string.
//
// Id layout: [0..2] specials, [3..258] raw bytes, [259..] corpus pieces.
class PieceTokenizer : public Tokenizer {
 public:
  PieceTokenizer() = default;

  // Builds the piece vocabulary from a text corpus (typically the KG's
  // entity labels) plus the grammar glyphs the decoder emits.
  static PieceTokenizer from_corpus(const std::vector<std::string>& corpus);

  std::vector<TokenId> encode(std::string_view text) const override;
  std::string decode(std::span<const TokenId> tokens) const override;
  std::size_t vocab_size() const override;

  // Encodes text in which literal "<e>" / "</e>" substrings map to the
  // special boundary tokens. Used to script mock models and to detokenize
  // symmetric output.
  std::vector<TokenId> encode_with_specials(std::string_view text) const;

  const std::vector<std::string>& pieces() const { return pieces_; }

  void save(const std::string& path) const;
  static PieceTokenizer load(const std::string& path);

  static std::vector<std::string> split_pieces(std::string_view text);

 private:
  void add_piece(const std::string& piece);

  std::vector<std::string> pieces_;
  std::unordered_map<std::string, TokenId> piece_ids_;
};

}  // namespace claimpkg
