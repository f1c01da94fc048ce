#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "recnet/decoder.hpp"
#include "recnet/rng.hpp"

namespace recnet::decoder {

namespace {

std::size_t argmax(const std::vector<double>& v) {
  return static_cast<std::size_t>(std::max_element(v.begin(), v.end()) - v.begin());
}

struct Hypothesis {
  Sentence tokens;  // emitted so far, EOS excluded
  double log_prob = 0.0;
  LSTMState state;
  TokenId last = data::kBos;
};

struct Finished {
  Sentence tokens;
  double log_prob;
  std::size_t length;  // steps consumed, EOS included
};

// Higher log-prob first; then earlier EOS; then lexicographically smaller ids.
bool better_finished(const Finished& a, const Finished& b) {
  if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
  if (a.length != b.length) return a.length < b.length;
  return a.tokens < b.tokens;
}

}  // namespace

Sentence Decoder::greedy(const data::SampledFeatures& video, DecoderTrace* trace) const {
  ad::NoGradGuard no_grad;
  auto memory = prepare(video);
  auto state = initial_state();
  Sentence out;
  TokenId prev = data::kBos;
  for (std::size_t t = 0; t < options_.max_steps; ++t) {
    auto s = step(prev, state, memory);
    const auto scores = decoding_scores(s);
    const auto tok = static_cast<TokenId>(argmax(scores));
    if (trace) {
      trace->hidden.push_back(s.state.h);
      std::vector<double> row(data::kSampledFrames, 0.0);
      std::copy(s.attention.weights.values().begin(), s.attention.weights.values().end(), row.begin());
      trace->attention.push_back(std::move(row));
      trace->logits.emplace_back(s.logits.values().begin(), s.logits.values().end());
      trace->log_probs.push_back(s.log_probs[static_cast<std::size_t>(tok)]);
      trace->tokens.push_back(tok);
    }
    if (tok == data::kEos) break;
    out.push_back(tok);
    state = std::move(s.state);
    prev = tok;
  }
  return out;
}

SampledSequence Decoder::sample(const data::SampledFeatures& video, std::uint64_t seed) const {
  ad::NoGradGuard no_grad;
  Rng rng(seed);
  auto memory = prepare(video);
  auto state = initial_state();
  SampledSequence out;
  TokenId prev = data::kBos;
  for (std::size_t t = 0; t < options_.max_steps; ++t) {
    auto s = step(prev, state, memory);
    auto p = probabilities(s);
    double mass = 1.0;
    if (options_.suppress_reserved) {
      // Renormalise over the tokens decoding may emit.
      const auto scores = decoding_scores(s);
      mass = 0.0;
      for (std::size_t k = 0; k < p.size(); ++k) {
        if (std::isinf(scores[k])) p[k] = 0.0;
        mass += p[k];
      }
    }
    // Inverse CDF; the last allowed index absorbs any rounding shortfall.
    const double u = rng.uniform() * mass;
    double acc = 0.0;
    std::size_t tok = p.size() - 1;
    while (tok > 0 && p[tok] == 0.0) --tok;
    for (std::size_t k = 0; k < p.size(); ++k) {
      if (p[k] == 0.0) continue;
      acc += p[k];
      if (u < acc) {
        tok = k;
        break;
      }
    }
    out.log_probs.push_back(s.log_probs[tok]);
    if (static_cast<TokenId>(tok) == data::kEos) {
      out.terminated = true;
      break;
    }
    out.tokens.push_back(static_cast<TokenId>(tok));
    state = std::move(s.state);
    prev = static_cast<TokenId>(tok);
  }
  return out;
}

Sentence Decoder::beam_search(const data::SampledFeatures& video, std::size_t beam) const {
  if (beam < 1) throw std::invalid_argument("beam size must be >= 1");
  ad::NoGradGuard no_grad;
  auto memory = prepare(video);

  std::vector<Hypothesis> alive(1);
  alive[0].state = initial_state();
  std::vector<Finished> finished;

  struct Candidate {
    std::size_t parent;
    TokenId token;
    double log_prob;
    const Sentence* prefix;
  };

  for (std::size_t t = 0; t < options_.max_steps && !alive.empty(); ++t) {
    std::vector<Step> steps;
    steps.reserve(alive.size());
    std::vector<Candidate> cands;
    for (std::size_t h = 0; h < alive.size(); ++h) {
      steps.push_back(step(alive[h].last, alive[h].state, memory));
      const auto scores = decoding_scores(steps.back());
      for (std::size_t k = 0; k < scores.size(); ++k) {
        if (std::isinf(scores[k])) continue;
        cands.push_back({h, static_cast<TokenId>(k), alive[h].log_prob + scores[k], &alive[h].tokens});
      }
    }
    // Ties: lexicographic on the extended token sequence.
    auto order = [](const Candidate& a, const Candidate& b) {
      if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
      if (*a.prefix != *b.prefix) return *a.prefix < *b.prefix;
      return a.token < b.token;
    };
    const std::size_t keep = std::min(beam, cands.size());
    std::partial_sort(cands.begin(), cands.begin() + static_cast<std::ptrdiff_t>(keep), cands.end(), order);

    const bool last_step = t + 1 == options_.max_steps;
    std::vector<Hypothesis> next;
    for (std::size_t c = 0; c < keep; ++c) {
      const auto& cand = cands[c];
      Sentence tokens = *cand.prefix;
      if (cand.token == data::kEos) {
        finished.push_back({std::move(tokens), cand.log_prob, t + 1});
        continue;
      }
      tokens.push_back(cand.token);
      if (last_step) {
        finished.push_back({std::move(tokens), cand.log_prob, t + 1 + 1});
        continue;
      }
      next.push_back({std::move(tokens), cand.log_prob, steps[cand.parent].state, cand.token});
    }
    alive = std::move(next);

    // Extensions only lower the score, so a finished hypothesis at least as
    // good as every live one cannot be overtaken.
    if (!finished.empty() && !alive.empty()) {
      const auto best_f = std::min_element(finished.begin(), finished.end(), better_finished);
      double best_alive = -INFINITY;
      for (const auto& h : alive) best_alive = std::max(best_alive, h.log_prob);
      if (best_f->log_prob >= best_alive) break;
    }
  }

  if (finished.empty()) return {};
  return std::min_element(finished.begin(), finished.end(), better_finished)->tokens;
}

}  // namespace recnet::decoder
