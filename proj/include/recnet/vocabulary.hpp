#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <unordered_map>
#include <vector>

namespace recnet::data {

using TokenId = std::int32_t;
using Sentence = std::vector<TokenId>;

inline constexpr TokenId kPad = 0;
inline constexpr TokenId kBos = 1;
inline constexpr TokenId kEos = 2;
inline constexpr TokenId kUnk = 3;
inline constexpr TokenId kFirstWordId = 4;

// Token <-> id table. Ids 0..3 are the reserved PAD/BOS/EOS/UNK entries;
// words follow contiguously.
class Vocabulary {
 public:
  Vocabulary();

  // Words with corpus frequency >= min_count, ordered by descending
  // frequency and then lexicographically. Throws on an empty corpus or
  // min_count < 1.
  static Vocabulary build(const std::vector<std::vector<std::string>>& captions, int min_count = 1);
  // Words in id order, starting at kFirstWordId.
  static Vocabulary from_words(const std::vector<std::string>& words);

  std::size_t size() const { return tokens_.size(); }
  std::size_t word_count() const { return tokens_.size() - kFirstWordId; }

  std::optional<TokenId> find(const std::string& token) const;
  // UNK for out-of-vocabulary tokens.
  TokenId id(const std::string& token) const;
  const std::string& token(TokenId id) const;
  bool contains(TokenId id) const { return id >= 0 && static_cast<std::size_t>(id) < size(); }
  static bool is_reserved(TokenId id) { return id >= 0 && id < kFirstWordId; }

  Sentence encode(const std::vector<std::string>& tokens) const;
  std::vector<std::string> decode(const Sentence& ids) const;
  // Space-joined words with PAD/BOS/EOS/UNK dropped.
  std::string render(const Sentence& ids) const;

  // Non-reserved words in id order.
  std::vector<std::string> words() const;

 private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, TokenId> index_;
};

}  // namespace recnet::data
