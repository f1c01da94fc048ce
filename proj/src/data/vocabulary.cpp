#include "recnet/vocabulary.hpp"

#include <algorithm>
#include <map>
#include <stdexcept>

namespace recnet::data {

namespace {
const char* const kReservedSurface[] = {"<pad>", "<bos>", "<eos>", "<unk>"};
}

Vocabulary::Vocabulary() {
  for (TokenId i = 0; i < kFirstWordId; ++i) {
    tokens_.emplace_back(kReservedSurface[i]);
    index_.emplace(tokens_.back(), i);
  }
}

Vocabulary Vocabulary::build(const std::vector<std::vector<std::string>>& captions, int min_count) {
  if (min_count < 1) throw std::invalid_argument("min_count must be >= 1");
  if (captions.empty()) throw std::invalid_argument("cannot build a vocabulary from an empty corpus");

  std::map<std::string, long> counts;
  for (const auto& caption : captions)
    for (const auto& tok : caption) ++counts[tok];

  std::vector<std::pair<std::string, long>> kept;
  for (auto& [tok, n] : counts)
    if (n >= min_count) kept.emplace_back(tok, n);
  std::stable_sort(kept.begin(), kept.end(),
                   [](const auto& a, const auto& b) { return a.second > b.second; });

  std::vector<std::string> words;
  words.reserve(kept.size());
  for (auto& [tok, n] : kept) words.push_back(tok);
  return from_words(words);
}

Vocabulary Vocabulary::from_words(const std::vector<std::string>& words) {
  Vocabulary v;
  for (const auto& w : words) {
    auto id = static_cast<TokenId>(v.tokens_.size());
    if (!v.index_.emplace(w, id).second) throw std::invalid_argument("duplicate vocabulary entry: " + w);
    v.tokens_.push_back(w);
  }
  return v;
}

std::optional<TokenId> Vocabulary::find(const std::string& token) const {
  auto it = index_.find(token);
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

TokenId Vocabulary::id(const std::string& token) const { return find(token).value_or(kUnk); }

const std::string& Vocabulary::token(TokenId id) const {
  if (!contains(id)) throw std::out_of_range("token id " + std::to_string(id) + " outside vocabulary");
  return tokens_[static_cast<std::size_t>(id)];
}

Sentence Vocabulary::encode(const std::vector<std::string>& tokens) const {
  Sentence out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(id(t));
  return out;
}

std::vector<std::string> Vocabulary::decode(const Sentence& ids) const {
  std::vector<std::string> out;
  out.reserve(ids.size());
  for (auto id : ids) out.push_back(token(id));
  return out;
}

std::string Vocabulary::render(const Sentence& ids) const {
  std::string out;
  for (auto id : ids) {
    if (is_reserved(id)) continue;
    if (!out.empty()) out += ' ';
    out += token(id);
  }
  return out;
}

std::vector<std::string> Vocabulary::words() const {
  return {tokens_.begin() + kFirstWordId, tokens_.end()};
}

}  // namespace recnet::data
