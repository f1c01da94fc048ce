#include <cmath>
#include <set>

#include "recnet/metrics.hpp"

namespace recnet::metrics {

NGramTable count_ngrams(const Sentence& s, int n) {
  if (n < 1 || n > kMaxNGram) throw MetricError("n-gram order must be in 1..4");
  NGramTable table;
  const auto len = static_cast<int>(s.size());
  for (int i = 0; i + n <= len; ++i) ++table[NGram(s.begin() + i, s.begin() + i + n)];
  return table;
}

int DocFreq::df(const NGram& gram) const {
  auto it = counts.find(gram);
  return it == counts.end() ? 0 : it->second;
}

double DocFreq::idf(const NGram& gram) const {
  const int d = std::max(1, df(gram));
  return std::log(static_cast<double>(num_sets) / static_cast<double>(d));
}

DocFreq build_docfreq(const std::vector<ReferenceSet>& references) {
  if (references.empty()) throw MetricError("build_docfreq: empty reference corpus");
  DocFreq out;
  out.num_sets = references.size();
  for (const auto& set : references) {
    std::set<NGram> present;
    for (const auto& ref : set)
      for (int n = 1; n <= kMaxNGram; ++n)
        for (auto& [gram, c] : count_ngrams(ref, n)) present.insert(gram);
    for (const auto& g : present) ++out.counts[g];
  }
  return out;
}

MetricReport score_corpus(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references,
                          const CiderOptions& options) {
  MetricReport r;
  r.bleu4 = bleu4(candidates, references);
  r.rouge_l = rouge_l(candidates, references);
  auto c = cider(candidates, references, build_docfreq(references), options);
  r.cider = c.corpus;
  r.per_sentence_cider = std::move(c.per_sentence);
  return r;
}

}  // namespace recnet::metrics
