#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "recnet/caption.hpp"
#include "recnet/features.hpp"
#include "recnet/vocabulary.hpp"

namespace recnet::data {

inline constexpr std::size_t kLexiconSize = 8;
extern const std::array<const char*, kLexiconSize> kSubjects;
extern const std::array<const char*, kLexiconSize> kVerbs;
extern const std::array<const char*, kLexiconSize> kObjects;

struct SyntheticOptions {
  std::uint64_t seed = 7;
  std::size_t num_videos = 20;
  std::size_t dim = 32;
  double noise_sigma = 0.05;
  double token_scale = 0.5;  // token vectors are uniform in [-token_scale, token_scale]
};

struct SyntheticCorpus {
  std::vector<VideoFeatures> videos;
  std::vector<CaptionRecord> captions;  // one per video, same order
  std::vector<std::string> caption_text;
  Vocabulary vocab;                     // all 24 lexicon words
};

// Role weight of caption slot `role` (0 subject, 1 verb, 2 object) at frame t.
double role_weight(std::size_t role, std::size_t frame);

// "<subject> <verb> <object>" captions over 28-frame videos. Frame t is
//   sum_role role_weight(role, t) * vec(token_role) + noise_sigma * N(0, 1)
// with every value rounded to float32 so the corpus survives file round-trips.
//
// Draw order from Rng(seed): 24 token vectors (lexicon order, dim uniforms
// each), then per video three lexicon indices followed by 28*dim normals.
SyntheticCorpus gen_synthetic(const SyntheticOptions& opts);

struct SplitSizes {
  std::size_t train, val, test;
};
// 70/10/20 by id order.
SplitSizes split_sizes(std::size_t n);

// features/<id>.vfrm, captions.jsonl, train.txt, val.txt, test.txt.
void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir);

}  // namespace recnet::data
