#include "oracles.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <stdexcept>

namespace recnet::testing {

namespace {

Vec values(const ad::ParameterSet& ps, const std::string& name) {
  auto v = ps.at(name).values();
  return {v.begin(), v.end()};
}

// Row-major matrix times vector.
Vec mv(const Vec& w, std::size_t rows, std::size_t cols, const Vec& x) {
  if (w.size() != rows * cols || x.size() != cols) throw std::logic_error("oracle mv: bad sizes");
  Vec y(rows, 0.0);
  for (std::size_t r = 0; r < rows; ++r) {
    double acc = 0.0;
    for (std::size_t c = 0; c < cols; ++c) acc += w[r * cols + c] * x[c];
    y[r] = acc;
  }
  return y;
}

double sigm(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Vec softmax(const Vec& e) {
  const double mx = *std::max_element(e.begin(), e.end());
  Vec p(e.size());
  double z = 0.0;
  for (std::size_t i = 0; i < e.size(); ++i) z += (p[i] = std::exp(e[i] - mx));
  for (auto& v : p) v /= z;
  return p;
}

Vec cat(std::initializer_list<const Vec*> parts) {
  Vec out;
  for (const auto* p : parts) out.insert(out.end(), p->begin(), p->end());
  return out;
}

struct Lstm {
  Vec w, b;
  std::size_t hidden, in;

  void step(const Vec& x, Vec& h, Vec& c) const {
    Vec g = mv(w, 4 * hidden, in, x);
    for (std::size_t k = 0; k < g.size(); ++k) g[k] += b[k];
    for (std::size_t k = 0; k < hidden; ++k) {
      const double i = sigm(g[k]);
      const double f = sigm(g[hidden + k]);
      const double o = sigm(g[2 * hidden + k]);
      const double gg = std::tanh(g[3 * hidden + k]);
      c[k] = f * c[k] + i * gg;
      h[k] = o * std::tanh(c[k]);
    }
  }
};

// e_j = w' tanh(Wa a_j + Wq q + b); returns softmax(e).
Vec additive_attention(const Vec& w, const Vec& wa, const Vec& wq, const Vec& b, std::size_t attn, const Mat& items,
                       const Vec& query) {
  const Vec qpart = mv(wq, attn, query.size(), query);
  Vec e(items.size());
  for (std::size_t j = 0; j < items.size(); ++j) {
    const Vec apart = mv(wa, attn, items[j].size(), items[j]);
    double s = 0.0;
    for (std::size_t a = 0; a < attn; ++a) s += w[a] * std::tanh(apart[a] + qpart[a] + b[a]);
    e[j] = s;
  }
  return softmax(e);
}

Vec weighted_sum(const Mat& items, const Vec& weights) {
  Vec out(items.front().size(), 0.0);
  for (std::size_t j = 0; j < items.size(); ++j) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += weights[j] * items[j][k];
  }
  return out;
}

Vec mean_rows(const Mat& rows, std::size_t count) {
  Vec out(rows.front().size(), 0.0);
  for (std::size_t j = 0; j < count; ++j) {
    for (std::size_t k = 0; k < out.size(); ++k) out[k] += rows[j][k];
  }
  for (auto& v : out) v /= static_cast<double>(count);
  return out;
}

double psi(const Vec& a, const Vec& b) {
  double s = 0.0;
  for (std::size_t k = 0; k < a.size(); ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return s / static_cast<double>(a.size());
}

Mat frames_of(const data::SampledFeatures& video, std::size_t count) {
  Mat out;
  for (std::size_t j = 0; j < count; ++j) out.emplace_back(video.row(j).begin(), video.row(j).end());
  return out;
}

struct DecoderRun {
  double nll = 0.0;
  Vec last_h;
};

DecoderRun run_decoder(const ad::ParameterSet& ps, const decoder::DecoderDims& d, const data::SampledFeatures& video,
                       const data::Sentence& target, bool mask_padding) {
  const Vec emb = values(ps, "decoder.embedding");
  const Lstm lstm{values(ps, "decoder.lstm.w"), values(ps, "decoder.lstm.b"), d.hidden,
                  d.embed + d.feature + d.hidden};
  const Vec wa = values(ps, "decoder.attn.w_alpha"), wv = values(ps, "decoder.attn.w_vd"),
            wh = values(ps, "decoder.attn.w_hd"), bd = values(ps, "decoder.attn.b_d");
  const Vec wo = values(ps, "decoder.out.w"), bo = values(ps, "decoder.out.b");
  const Mat frames = frames_of(video, mask_padding ? video.valid_count : data::kSampledFrames);

  Vec h(d.hidden, 0.0), c(d.hidden, 0.0);
  data::Sentence seq = target;
  seq.push_back(data::kEos);
  DecoderRun out;
  data::TokenId prev = data::kBos;
  for (auto tok : seq) {
    const Vec alpha = additive_attention(wa, wv, wh, bd, d.attn, frames, h);
    const Vec ctx = weighted_sum(frames, alpha);
    const Vec e(emb.begin() + static_cast<std::ptrdiff_t>(prev * d.embed),
                emb.begin() + static_cast<std::ptrdiff_t>((prev + 1) * d.embed));
    const Vec x = cat({&e, &ctx, &h});
    lstm.step(x, h, c);
    Vec logits = mv(wo, d.vocab, d.hidden, h);
    for (std::size_t k = 0; k < d.vocab; ++k) logits[k] += bo[k];
    const double mx = *std::max_element(logits.begin(), logits.end());
    double z = 0.0;
    for (double l : logits) z += std::exp(l - mx);
    out.nll -= logits[static_cast<std::size_t>(tok)] - mx - std::log(z);
    prev = tok;
  }
  out.last_h = h;
  return out;
}

}  // namespace

void randomize(ad::ParameterSet& params, Rng& rng, double scale) {
  for (const auto& p : params) {
    auto t = p.tensor;
    for (auto& v : t.mutable_values()) v = rng.uniform(-scale, scale);
  }
}

TinyDecoder make_tiny_decoder(const decoder::DecoderDims& dims, std::uint64_t seed, double scale,
                              decoder::DecoderOptions options) {
  Rng rng(seed);
  ad::ParameterSet ps;
  auto params = decoder::DecoderParams::create(ps, dims, rng);
  randomize(ps, rng, scale);
  return {std::move(ps), dims, decoder::Decoder(params, dims, options)};
}

data::SampledFeatures random_video(std::size_t dim, std::size_t valid_count, Rng& rng, double scale) {
  data::SampledFeatures v;
  v.dim = dim;
  v.valid_count = valid_count;
  v.values.assign(data::kSampledFrames * dim, 0.0);
  for (std::size_t i = 0; i < valid_count * dim; ++i) v.values[i] = rng.uniform(-scale, scale);
  return v;
}

std::vector<ad::Tensor> random_hidden(std::size_t n, std::size_t dim, Rng& rng, bool variables) {
  std::vector<ad::Tensor> out;
  for (std::size_t i = 0; i < n; ++i) {
    Vec v(dim);
    for (auto& x : v) x = rng.uniform(-0.9, 0.9);
    out.push_back(variables ? ad::Tensor::variable({dim}, v) : ad::Tensor::vector(v));
  }
  return out;
}

double oracle_nll(const ad::ParameterSet& ps, const decoder::DecoderDims& dims, const data::SampledFeatures& video,
                  const data::Sentence& target, bool mask_padding) {
  return run_decoder(ps, dims, video, target, mask_padding).nll;
}

Vec oracle_last_hidden(const ad::ParameterSet& ps, const decoder::DecoderDims& dims,
                       const data::SampledFeatures& video, const data::Sentence& target) {
  return run_decoder(ps, dims, video, target, false).last_h;
}

Mat oracle_global_z(const ad::ParameterSet& ps, const recon::ReconDims& d, const Mat& hidden) {
  const Lstm lstm{values(ps, "recon.global.lstm.w"), values(ps, "recon.global.lstm.b"), d.hidden,
                  2 * d.input + d.hidden};
  const Vec summary = mean_rows(hidden, hidden.size());
  Vec z(d.hidden, 0.0), c(d.hidden, 0.0);
  Mat out;
  for (const auto& h : hidden) {
    lstm.step(cat({&h, &z, &summary}), z, c);
    out.push_back(z);
  }
  return out;
}

Mat oracle_local_z(const ad::ParameterSet& ps, const recon::ReconDims& d, const Mat& hidden) {
  const Lstm lstm{values(ps, "recon.local.lstm.w"), values(ps, "recon.local.lstm.b"), d.hidden, d.input + d.hidden};
  const Vec wb = values(ps, "recon.local.attn.w_beta"), whr = values(ps, "recon.local.attn.w_hr"),
            wzr = values(ps, "recon.local.attn.w_zr"), br = values(ps, "recon.local.attn.b_r");
  Vec z(d.hidden, 0.0), c(d.hidden, 0.0);
  Mat out;
  for (std::size_t t = 0; t < data::kSampledFrames; ++t) {
    const Vec beta = additive_attention(wb, whr, wzr, br, d.attn, hidden, z);
    const Vec mu = weighted_sum(hidden, beta);
    lstm.step(cat({&mu, &z}), z, c);
    out.push_back(z);
  }
  return out;
}

double oracle_global_loss(const ad::ParameterSet& ps, const recon::ReconDims& dims, const Mat& hidden,
                          const data::SampledFeatures& video) {
  const Mat z = oracle_global_z(ps, dims, hidden);
  return psi(mean_rows(frames_of(video, video.valid_count), video.valid_count), mean_rows(z, z.size()));
}

namespace {

double local_term(const Mat& z, const data::SampledFeatures& video, bool valid_only) {
  const std::size_t m = valid_only ? video.valid_count : data::kSampledFrames;
  const Mat v = frames_of(video, m);
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) s += psi(z[j], v[j]);
  return s / static_cast<double>(m);
}

}  // namespace

double oracle_local_loss(const ad::ParameterSet& ps, const recon::ReconDims& dims, const Mat& hidden,
                         const data::SampledFeatures& video, bool valid_only) {
  return local_term(oracle_local_z(ps, dims, hidden), video, valid_only);
}

double oracle_joint_loss(const ad::ParameterSet& ps, const recon::ReconDims& dims, const Mat& hidden,
                         const data::SampledFeatures& video, bool valid_only) {
  const Mat z = oracle_local_z(ps, dims, hidden);
  const std::size_t n = video.valid_count;
  const double global = psi(mean_rows(frames_of(video, n), n), mean_rows(z, n));
  return global + local_term(z, video, valid_only);
}

Mat values_of(const std::vector<ad::Tensor>& ts) {
  Mat out;
  for (const auto& t : ts) out.emplace_back(t.values().begin(), t.values().end());
  return out;
}

data::Sentence exhaustive_decode(const decoder::Decoder& dec, const data::SampledFeatures& video) {
  ad::NoGradGuard no_grad;
  const auto memory = dec.prepare(video);
  const std::size_t max_steps = dec.options().max_steps;

  struct Best {
    bool set = false;
    data::Sentence tokens;
    double score = 0.0;
    std::size_t length = 0;
  } best;
  auto offer = [&](const data::Sentence& tokens, double score, std::size_t length) {
    bool take = !best.set || score > best.score ||
                (score == best.score && (length < best.length || (length == best.length && tokens < best.tokens)));
    if (take) best = {true, tokens, score, length};
  };

  std::function<void(data::TokenId, const decoder::LSTMState&, data::Sentence&, double)> visit =
      [&](data::TokenId prev, const decoder::LSTMState& state, data::Sentence& prefix, double score) {
        const auto s = dec.step(prev, state, memory);
        const auto scores = dec.decoding_scores(s);
        const std::size_t depth = prefix.size() + 1;  // steps consumed including this one
        for (std::size_t k = 0; k < scores.size(); ++k) {
          if (std::isinf(scores[k])) continue;
          const double total = score + scores[k];
          const auto tok = static_cast<data::TokenId>(k);
          if (tok == data::kEos) {
            offer(prefix, total, depth);
            continue;
          }
          prefix.push_back(tok);
          if (depth == max_steps) {
            offer(prefix, total, depth + 1);
          } else {
            visit(tok, s.state, prefix, total);
          }
          prefix.pop_back();
        }
      };
  data::Sentence prefix;
  visit(data::kBos, dec.initial_state(), prefix, 0.0);
  return best.tokens;
}

// ---- metrics --------------------------------------------------------------

namespace {

std::vector<Sentence> grams_of(const Sentence& s, std::size_t n) {
  std::vector<Sentence> out;
  for (std::size_t i = 0; i + n <= s.size(); ++i) out.emplace_back(s.begin() + i, s.begin() + i + n);
  return out;
}

std::size_t occurrences(const std::vector<Sentence>& grams, const Sentence& g) {
  return static_cast<std::size_t>(std::count(grams.begin(), grams.end(), g));
}

std::vector<Sentence> distinct(std::vector<Sentence> grams) {
  std::vector<Sentence> out;
  for (auto& g : grams) {
    if (std::find(out.begin(), out.end(), g) == out.end()) out.push_back(g);
  }
  return out;
}

std::size_t lcs(const Sentence& a, const Sentence& b) {
  std::vector<std::vector<std::size_t>> t(a.size() + 1, std::vector<std::size_t>(b.size() + 1, 0));
  for (std::size_t i = 1; i <= a.size(); ++i) {
    for (std::size_t j = 1; j <= b.size(); ++j) {
      t[i][j] = a[i - 1] == b[j - 1] ? t[i - 1][j - 1] + 1 : std::max(t[i - 1][j], t[i][j - 1]);
    }
  }
  return t[a.size()][b.size()];
}

}  // namespace

double oracle_bleu4(const std::vector<Sentence>& cands, const std::vector<ReferenceSet>& refs) {
  double log_sum = 0.0;
  for (std::size_t n = 1; n <= 4; ++n) {
    double clipped = 0.0, total = 0.0;
    for (std::size_t i = 0; i < cands.size(); ++i) {
      const auto cg = grams_of(cands[i], n);
      total += static_cast<double>(cg.size());
      for (const auto& g : distinct(cg)) {
        std::size_t max_ref = 0;
        for (const auto& r : refs[i]) max_ref = std::max(max_ref, occurrences(grams_of(r, n), g));
        clipped += static_cast<double>(std::min(occurrences(cg, g), max_ref));
      }
    }
    if (clipped == 0.0 || total == 0.0) return 0.0;
    log_sum += std::log(clipped / total);
  }
  double c = 0.0, r = 0.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    const double len = static_cast<double>(cands[i].size());
    double best = -1.0;
    for (const auto& ref : refs[i]) {
      const double rl = static_cast<double>(ref.size());
      if (best < 0 || std::abs(rl - len) < std::abs(best - len) || (std::abs(rl - len) == std::abs(best - len) && rl < best)) {
        best = rl;
      }
    }
    c += len;
    r += best;
  }
  const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
  return bp * std::exp(log_sum / 4.0);
}

double oracle_rouge_l(const std::vector<Sentence>& cands, const std::vector<ReferenceSet>& refs, double beta) {
  double sum = 0.0;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    double best = 0.0;
    for (const auto& r : refs[i]) {
      const double l = static_cast<double>(lcs(cands[i], r));
      if (l == 0.0) continue;
      const double p = l / static_cast<double>(cands[i].size());
      const double rec = l / static_cast<double>(r.size());
      best = std::max(best, (1 + beta * beta) * p * rec / (rec + beta * beta * p));
    }
    sum += best;
  }
  return sum / static_cast<double>(cands.size());
}

std::vector<double> oracle_cider(const std::vector<Sentence>& cands, const std::vector<ReferenceSet>& refs,
                                 bool cider_d, double sigma) {
  const double N = static_cast<double>(refs.size());
  auto df = [&](const Sentence& g) {
    double count = 0.0;
    for (const auto& set : refs) {
      bool present = false;
      for (const auto& r : set) present = present || occurrences(grams_of(r, g.size()), g) > 0;
      count += present ? 1.0 : 0.0;
    }
    return count;
  };
  // Weight of every distinct gram of s.
  auto weights = [&](const Sentence& s, std::size_t n) {
    const auto grams = grams_of(s, n);
    std::vector<std::pair<Sentence, double>> out;
    for (const auto& g : distinct(grams)) {
      const double count = static_cast<double>(occurrences(grams, g));
      const double tf = cider_d ? count : count / static_cast<double>(grams.size());
      out.emplace_back(g, tf * std::log(N / std::max(1.0, df(g))));
    }
    return out;
  };
  std::vector<double> scores;
  for (std::size_t i = 0; i < cands.size(); ++i) {
    double total = 0.0;
    for (std::size_t n = 1; n <= 4; ++n) {
      const auto cw = weights(cands[i], n);
      double acc = 0.0;
      for (const auto& r : refs[i]) {
        const auto rw = weights(r, n);
        double dot = 0.0, nc = 0.0, nr = 0.0;
        for (const auto& [g, w] : cw) {
          nc += w * w;
          for (const auto& [g2, w2] : rw) {
            if (g == g2) dot += (cider_d ? std::min(w, w2) : w) * w2;
          }
        }
        for (const auto& [g2, w2] : rw) nr += w2 * w2;
        double sim = (nc == 0.0 || nr == 0.0) ? 0.0 : std::min(1.0, dot / std::sqrt(nc * nr));
        if (cider_d) {
          const double delta = static_cast<double>(cands[i].size()) - static_cast<double>(r.size());
          sim *= std::exp(-delta * delta / (2 * sigma * sigma));
        }
        acc += sim;
      }
      total += acc / static_cast<double>(refs[i].size());
    }
    scores.push_back(10.0 * total / 4.0);
  }
  return scores;
}

}  // namespace recnet::testing
