#include <algorithm>

#include "recnet/metrics.hpp"

namespace recnet::metrics {

std::size_t lcs_length(const Sentence& a, const Sentence& b) {
  std::vector<std::size_t> prev(b.size() + 1, 0), cur(b.size() + 1, 0);
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j)
      cur[j] = a[i - 1] == b[j - 1] ? prev[j - 1] + 1 : std::max(prev[j], cur[j - 1]);
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

double sentence_rouge_l(const Sentence& candidate, const ReferenceSet& references, double beta) {
  if (references.empty()) throw MetricError("empty reference set");
  double best = 0.0;
  if (candidate.empty()) return 0.0;
  for (const auto& ref : references) {
    if (ref.empty()) continue;
    const auto lcs = static_cast<double>(lcs_length(candidate, ref));
    if (lcs == 0.0) continue;
    const double p = lcs / static_cast<double>(candidate.size());
    const double r = lcs / static_cast<double>(ref.size());
    const double f = ((1.0 + beta * beta) * p * r) / (r + beta * beta * p);
    best = std::max(best, f);
  }
  return best;
}

double rouge_l(const std::vector<Sentence>& candidates, const std::vector<ReferenceSet>& references, double beta) {
  if (candidates.empty()) throw MetricError("empty candidate list");
  if (candidates.size() != references.size()) throw MetricError("candidate and reference counts differ");
  double total = 0.0;
  for (std::size_t i = 0; i < candidates.size(); ++i) total += sentence_rouge_l(candidates[i], references[i], beta);
  return total / static_cast<double>(candidates.size());
}

}  // namespace recnet::metrics
