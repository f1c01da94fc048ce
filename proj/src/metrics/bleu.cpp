#include <cmath>
#include <cstdlib>

#include "recnet/metrics.hpp"

namespace recnet::metrics {

namespace {

void check_corpus(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references) {
  if (candidates.empty()) throw MetricError("empty candidate list");
  if (candidates.size() != references.size()) {
    throw MetricError("candidate count " + std::to_string(candidates.size()) + " differs from reference count " +
                      std::to_string(references.size()));
  }
  for (const auto& set : references)
    if (set.empty()) throw MetricError("empty reference set");
}

// Reference length closest to `len`; the shorter one on ties.
std::size_t closest_ref_length(std::size_t len, const ReferenceSet& refs) {
  std::size_t best = refs.front().size();
  for (const auto& r : refs) {
    const auto d = std::llabs(static_cast<long long>(r.size()) - static_cast<long long>(len));
    const auto bd = std::llabs(static_cast<long long>(best) - static_cast<long long>(len));
    if (d < bd || (d == bd && r.size() < best)) best = r.size();
  }
  return best;
}

}  // namespace

double bleu4(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references) {
  check_corpus(candidates, references);
  long long matched[kMaxNGram] = {};
  long long total[kMaxNGram] = {};
  std::size_t cand_len = 0, ref_len = 0;

  for (std::size_t s = 0; s < candidates.size(); ++s) {
    const auto& cand = candidates[s];
    const auto& refs = references[s];
    cand_len += cand.size();
    ref_len += closest_ref_length(cand.size(), refs);
    for (int n = 1; n <= kMaxNGram; ++n) {
      NGramTable max_ref;
      for (const auto& r : refs)
        for (auto& [g, c] : count_ngrams(r, n)) max_ref[g] = std::max(max_ref[g], c);
      for (auto& [g, c] : count_ngrams(cand, n)) {
        auto it = max_ref.find(g);
        matched[n - 1] += std::min(c, it == max_ref.end() ? 0 : it->second);
        total[n - 1] += c;
      }
    }
  }

  double log_sum = 0.0;
  for (int n = 0; n < kMaxNGram; ++n) {
    if (matched[n] == 0 || total[n] == 0) return 0.0;
    log_sum += std::log(static_cast<double>(matched[n]) / static_cast<double>(total[n]));
  }
  const double bp = cand_len > ref_len ? 1.0
                                       : std::exp(1.0 - static_cast<double>(ref_len) / static_cast<double>(cand_len));
  return bp * std::exp(log_sum / kMaxNGram);
}

}  // namespace recnet::metrics
