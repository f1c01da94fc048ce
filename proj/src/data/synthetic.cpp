#include "recnet/synthetic.hpp"

#include <cmath>
#include <cstdio>
#include <numbers>
#include <stdexcept>

#include "recnet/corpus.hpp"
#include "recnet/rng.hpp"

namespace recnet::data {

const std::array<const char*, kLexiconSize> kSubjects = {"man", "woman", "boy", "girl",
                                                         "dog", "cat", "chef", "player"};
const std::array<const char*, kLexiconSize> kVerbs = {"rides", "cuts", "throws", "kicks",
                                                      "holds", "opens", "pushes", "cleans"};
const std::array<const char*, kLexiconSize> kObjects = {"bike", "bread", "ball", "box",
                                                        "door", "cart", "guitar", "car"};

double role_weight(std::size_t role, std::size_t frame) {
  const double phase = static_cast<double>(frame) / static_cast<double>(kSampledFrames) +
                       static_cast<double>(role) / 3.0;
  return 0.5 + 0.4 * std::sin(2.0 * std::numbers::pi * phase);
}

SyntheticCorpus gen_synthetic(const SyntheticOptions& opts) {
  if (opts.num_videos < 1) throw std::invalid_argument("gen_synthetic: need at least one video");
  if (opts.dim < 8) throw std::invalid_argument("gen_synthetic: feature dimension must be >= 8");

  Rng rng(opts.seed);
  const std::array<const std::array<const char*, kLexiconSize>*, 3> lexicons{&kSubjects, &kVerbs, &kObjects};

  std::vector<std::string> words;
  std::vector<std::vector<double>> token_vec;
  for (const auto* lex : lexicons) {
    for (const char* w : *lex) {
      words.emplace_back(w);
      std::vector<double> v(opts.dim);
      for (auto& x : v) x = rng.uniform(-opts.token_scale, opts.token_scale);
      token_vec.push_back(std::move(v));
    }
  }

  SyntheticCorpus corpus;
  corpus.vocab = Vocabulary::from_words(words);

  const int width = opts.num_videos > 9999 ? 6 : 4;
  for (std::size_t n = 0; n < opts.num_videos; ++n) {
    std::array<std::size_t, 3> pick{};
    for (std::size_t role = 0; role < 3; ++role) pick[role] = role * kLexiconSize + rng.below(kLexiconSize);

    char id[32];
    std::snprintf(id, sizeof id, "vid%0*zu", width, n);

    VideoFeatures vf;
    vf.video_id = id;
    vf.frames = kSampledFrames;
    vf.dim = opts.dim;
    vf.values.resize(kSampledFrames * opts.dim);
    for (std::size_t t = 0; t < kSampledFrames; ++t) {
      for (std::size_t k = 0; k < opts.dim; ++k) {
        double x = 0.0;
        for (std::size_t role = 0; role < 3; ++role) x += role_weight(role, t) * token_vec[pick[role]][k];
        x += opts.noise_sigma * rng.normal();
        vf.values[t * opts.dim + k] = static_cast<float>(x);
      }
    }

    std::vector<std::string> toks{words[pick[0]], words[pick[1]], words[pick[2]]};
    corpus.caption_text.push_back(toks[0] + " " + toks[1] + " " + toks[2]);
    corpus.captions.push_back({vf.video_id, corpus.vocab.encode(toks)});
    corpus.videos.push_back(std::move(vf));
  }
  return corpus;
}

SplitSizes split_sizes(std::size_t n) {
  SplitSizes s{n * 7 / 10, n / 10, 0};
  if (s.train == 0 && n > 0) s.train = 1;
  if (s.train + s.val > n) s.val = n - s.train;
  s.test = n - s.train - s.val;
  return s;
}

void write_synthetic_corpus(const SyntheticCorpus& corpus, const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir / "features", ec);
  if (ec) throw CorpusError("cannot create " + (dir / "features").string() + ": " + ec.message());

  std::vector<VideoCaptions> records;
  std::vector<std::string> ids;
  for (std::size_t i = 0; i < corpus.videos.size(); ++i) {
    const auto& vf = corpus.videos[i];
    try {
      write_features(vf, feature_path(dir / "features", vf.video_id));
    } catch (const FeatureFileError& e) {
      throw CorpusError(e.what());
    }
    records.push_back({vf.video_id, {corpus.caption_text[i]}});
    ids.push_back(vf.video_id);
  }
  write_caption_file(dir / "captions.jsonl", records);

  const auto sizes = split_sizes(ids.size());
  auto first = ids.begin();
  auto cut = [&](std::size_t n) {
    std::vector<std::string> part(first, first + static_cast<std::ptrdiff_t>(n));
    first += static_cast<std::ptrdiff_t>(n);
    return part;
  };
  write_split(dir / "train.txt", cut(sizes.train));
  write_split(dir / "val.txt", cut(sizes.val));
  write_split(dir / "test.txt", cut(sizes.test));
}

}  // namespace recnet::data
