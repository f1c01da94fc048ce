#include <algorithm>
#include <cmath>

#include "recnet/metrics.hpp"

namespace recnet::metrics {

namespace {

// TF-IDF weights of one sentence for one n-gram order. Plain CIDEr uses
// relative term frequency; CIDEr-D keeps raw counts so clipping compares like
// with like.
struct GramVector {
  std::map<NGram, double> weights;
  double norm = 0.0;
};

GramVector gram_vector(const Sentence& s, int n, const DocFreq& df, bool raw_counts) {
  GramVector v;
  const auto table = count_ngrams(s, n);
  double total = 0.0;
  for (auto& [g, c] : table) total += c;
  for (auto& [g, c] : table) {
    const double tf = raw_counts ? static_cast<double>(c) : static_cast<double>(c) / total;
    const double w = tf * df.idf(g);
    v.weights.emplace(g, w);
    v.norm += w * w;
  }
  return v;
}

double similarity(const GramVector& cand, const GramVector& ref, bool clip) {
  if (cand.norm == 0.0 || ref.norm == 0.0) return 0.0;
  double dot = 0.0;
  for (auto& [g, w] : cand.weights) {
    auto it = ref.weights.find(g);
    if (it == ref.weights.end()) continue;
    dot += (clip ? std::min(w, it->second) : w) * it->second;
  }
  return std::min(1.0, dot / std::sqrt(cand.norm * ref.norm));
}

}  // namespace

double sentence_cider(const Sentence& candidate, const ReferenceSet& references, const DocFreq& df,
                      const CiderOptions& options) {
  if (references.empty()) throw MetricError("empty reference set");
  double score = 0.0;
  for (int n = 1; n <= kMaxNGram; ++n) {
    const auto cv = gram_vector(candidate, n, df, options.cider_d);
    double acc = 0.0;
    for (const auto& ref : references) {
      const auto rv = gram_vector(ref, n, df, options.cider_d);
      double sim = similarity(cv, rv, options.cider_d);
      if (options.cider_d) {
        const double delta = static_cast<double>(candidate.size()) - static_cast<double>(ref.size());
        sim *= std::exp(-(delta * delta) / (2.0 * options.sigma * options.sigma));
      }
      acc += sim;
    }
    score += acc / static_cast<double>(references.size());
  }
  return 10.0 * score / kMaxNGram;
}

CiderScore cider(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references,
                 const DocFreq& df, const CiderOptions& options) {
  if (candidates.empty()) throw MetricError("empty candidate list");
  if (candidates.size() != references.size()) throw MetricError("candidate and reference counts differ");
  CiderScore out;
  out.per_sentence.reserve(candidates.size());
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    out.per_sentence.push_back(sentence_cider(candidates[i], references[i], df, options));
    total += out.per_sentence.back();
  }
  out.corpus = total / static_cast<double>(candidates.size());
  return out;
}

}  // namespace recnet::metrics
