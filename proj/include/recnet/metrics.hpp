#pragma once

#include <cstdint>
#include <map>
#include <stdexcept>
#include <vector>

namespace recnet::metrics {

using Token = std::int32_t;
using Sentence = std::vector<Token>;
using NGram = std::vector<Token>;
using ReferenceSet = std::vector<Sentence>;

inline constexpr int kMaxNGram = 4;

class MetricError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Counts of every n-gram of exactly length n.
using NGramTable = std::map<NGram, int>;
NGramTable count_ngrams(const Sentence& s, int n);

// Number of reference SETS containing each n-gram (n = 1..4).
struct DocFreq {
  std::map<NGram, int> counts;
  std::size_t num_sets = 0;

  int df(const NGram& gram) const;
  // ln(N / df), with unseen grams treated as df = 1.
  double idf(const NGram& gram) const;
};

DocFreq build_docfreq(const std::vector<ReferenceSet>& references);

// Corpus BLEU-4: pooled clipped precisions, closest-reference brevity
// penalty, no smoothing.
double bleu4(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references);

std::size_t lcs_length(const Sentence& a, const Sentence& b);
// Best LCS F-measure over the references.
double sentence_rouge_l(const Sentence& candidate, const ReferenceSet& references, double beta = 1.2);
double rouge_l(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references,
               double beta = 1.2);

struct CiderOptions {
  // CIDEr-D: clipped counts and a Gaussian length penalty.
  bool cider_d = false;
  double sigma = 6.0;
};

struct CiderScore {
  double corpus = 0.0;
  std::vector<double> per_sentence;
};

double sentence_cider(const Sentence& candidate, const ReferenceSet& references, const DocFreq& df,
                      const CiderOptions& options = {});
CiderScore cider(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references,
                 const DocFreq& df, const CiderOptions& options = {});

struct MetricReport {
  double bleu4 = 0.0;
  double rouge_l = 0.0;
  double cider = 0.0;
  std::vector<double> per_sentence_cider;
};

// All three metrics, CIDEr document frequencies taken from `references`.
MetricReport score_corpus(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references,
                          const CiderOptions& options = {});

}  // namespace recnet::metrics
