#include "recnet/decoder.hpp"

#include <cmath>
#include <stdexcept>

#include "recnet/ops.hpp"

namespace recnet::decoder {

using ad::Shape;

DecoderParams DecoderParams::create(ad::ParameterSet& ps, const DecoderDims& d, Rng& rng,
                                    const std::string& prefix) {
  if (d.vocab == 0) throw std::invalid_argument("decoder vocabulary is empty");
  const std::size_t lstm_in = d.embed + d.feature + d.hidden;
  DecoderParams p;
  p.embedding = ps.add_uniform(prefix + ".embedding", {d.vocab, d.embed}, d.embed, rng);
  p.lstm_w = ps.add_uniform(prefix + ".lstm.w", {4 * d.hidden, lstm_in}, lstm_in, rng);
  p.lstm_b = ps.add_zeros(prefix + ".lstm.b", {4 * d.hidden});
  p.attn_w = ps.add_uniform(prefix + ".attn.w_alpha", {d.attn}, d.attn, rng);
  p.attn_wv = ps.add_uniform(prefix + ".attn.w_vd", {d.attn, d.feature}, d.feature, rng);
  p.attn_wh = ps.add_uniform(prefix + ".attn.w_hd", {d.attn, d.hidden}, d.hidden, rng);
  p.attn_b = ps.add_zeros(prefix + ".attn.b_d", {d.attn});
  p.out_w = ps.add_uniform(prefix + ".out.w", {d.vocab, d.hidden}, d.hidden, rng);
  p.out_b = ps.add_zeros(prefix + ".out.b", {d.vocab});
  return p;
}

DecoderParams DecoderParams::bind(const ad::ParameterSet& ps, const std::string& prefix) {
  DecoderParams p;
  p.embedding = ps.at(prefix + ".embedding");
  p.lstm_w = ps.at(prefix + ".lstm.w");
  p.lstm_b = ps.at(prefix + ".lstm.b");
  p.attn_w = ps.at(prefix + ".attn.w_alpha");
  p.attn_wv = ps.at(prefix + ".attn.w_vd");
  p.attn_wh = ps.at(prefix + ".attn.w_hd");
  p.attn_b = ps.at(prefix + ".attn.b_d");
  p.out_w = ps.at(prefix + ".out.w");
  p.out_b = ps.at(prefix + ".out.b");
  return p;
}

Decoder::Decoder(DecoderParams params, DecoderDims dims, DecoderOptions options)
    : params_(std::move(params)), dims_(dims), options_(options) {
  const std::size_t lstm_in = dims_.embed + dims_.feature + dims_.hidden;
  auto expect = [](const Tensor& t, const Shape& s, const char* what) {
    if (t.shape() != s) {
      throw ad::DimensionError(std::string("decoder parameter ") + what + " has shape " +
                               ad::shape_string(t.shape()) + ", expected " + ad::shape_string(s));
    }
  };
  expect(params_.embedding, {dims_.vocab, dims_.embed}, "embedding");
  expect(params_.lstm_w, {4 * dims_.hidden, lstm_in}, "lstm.w");
  expect(params_.lstm_b, {4 * dims_.hidden}, "lstm.b");
  expect(params_.attn_w, {dims_.attn}, "attn.w_alpha");
  expect(params_.attn_wv, {dims_.attn, dims_.feature}, "attn.w_vd");
  expect(params_.attn_wh, {dims_.attn, dims_.hidden}, "attn.w_hd");
  expect(params_.attn_b, {dims_.attn}, "attn.b_d");
  expect(params_.out_w, {dims_.vocab, dims_.hidden}, "out.w");
  expect(params_.out_b, {dims_.vocab}, "out.b");
  if (options_.max_steps == 0) throw std::invalid_argument("max_steps must be positive");
}

AttentionMemory Decoder::prepare(const data::SampledFeatures& video) const {
  if (video.dim != dims_.feature) {
    throw ad::DimensionError("video feature dimension " + std::to_string(video.dim) +
                             " does not match decoder feature dimension " + std::to_string(dims_.feature));
  }
  AttentionMemory m;
  m.rows = options_.mask_padding ? video.valid_count : video.rows();
  if (m.rows == 0) throw std::invalid_argument("video has no valid frames");
  std::vector<double> rows(video.values.begin(),
                           video.values.begin() + static_cast<std::ptrdiff_t>(m.rows * video.dim));
  m.frames = Tensor::matrix(m.rows, video.dim, std::move(rows));
  m.frames_t = ad::transpose(m.frames);
  m.projected = ad::add_row_broadcast(ad::matmul(m.frames, ad::transpose(params_.attn_wv)), params_.attn_b);
  return m;
}

Tensor Decoder::attention_context(const AttentionMemory& memory, const Tensor& weights) {
  return ad::matvec(memory.frames_t, weights);
}

Attention Decoder::attend(const AttentionMemory& memory, const Tensor& h_prev) const {
  auto hidden_part = ad::matvec(params_.attn_wh, h_prev);
  auto act = ad::tanh(ad::add_row_broadcast(memory.projected, hidden_part));
  auto scores = ad::matvec(act, params_.attn_w);
  Attention a;
  a.weights = ad::softmax(scores);
  a.context = attention_context(memory, a.weights);
  return a;
}

LSTMState Decoder::initial_state() const {
  return {Tensor::zeros({dims_.hidden}), Tensor::zeros({dims_.hidden})};
}

Step Decoder::step(TokenId prev, const LSTMState& state, const AttentionMemory& memory) const {
  if (prev < 0 || static_cast<std::size_t>(prev) >= dims_.vocab) {
    throw std::out_of_range("token id " + std::to_string(prev) + " outside decoder vocabulary of " +
                            std::to_string(dims_.vocab));
  }
  Step out;
  out.attention = attend(memory, state.h);

  const Tensor inputs[] = {ad::row(params_.embedding, static_cast<std::size_t>(prev)), out.attention.context,
                           state.h};
  auto gates = ad::add(ad::matvec(params_.lstm_w, ad::concat(inputs)), params_.lstm_b);
  const std::size_t H = dims_.hidden;
  auto i = ad::sigmoid(ad::slice(gates, 0, H));
  auto f = ad::sigmoid(ad::slice(gates, H, H));
  auto o = ad::sigmoid(ad::slice(gates, 2 * H, H));
  auto g = ad::tanh(ad::slice(gates, 3 * H, H));
  out.state.mem = ad::add(ad::hadamard(f, state.mem), ad::hadamard(i, g));
  out.state.h = ad::hadamard(o, ad::tanh(out.state.mem));

  out.logits = ad::add(ad::matvec(params_.out_w, out.state.h), params_.out_b);
  out.log_probs = ad::log_softmax(out.logits);
  return out;
}

namespace {

std::vector<double> padded_row(const Tensor& weights) {
  std::vector<double> row(data::kSampledFrames, 0.0);
  std::copy(weights.values().begin(), weights.values().end(), row.begin());
  return row;
}

}  // namespace

TeacherForced Decoder::teacher_forced(const data::SampledFeatures& video, const Sentence& target,
                                      bool append_eos) const {
  if (target.empty() && !append_eos) throw std::invalid_argument("teacher_forced: nothing to predict");
  auto memory = prepare(video);
  auto state = initial_state();

  Sentence targets = target;
  if (append_eos) targets.push_back(data::kEos);

  TeacherForced out;
  std::vector<Tensor> picks;
  picks.reserve(targets.size());
  TokenId prev = data::kBos;
  for (TokenId tok : targets) {
    auto s = step(prev, state, memory);
    auto lp = ad::pick(s.log_probs, static_cast<std::size_t>(tok));
    out.trace.hidden.push_back(s.state.h);
    out.trace.attention.push_back(padded_row(s.attention.weights));
    out.trace.logits.emplace_back(s.logits.values().begin(), s.logits.values().end());
    out.trace.log_probs.push_back(lp.item());
    out.trace.tokens.push_back(tok);
    picks.push_back(std::move(lp));
    state = std::move(s.state);
    prev = tok;
  }
  out.nll = ad::scale(ad::add_n(picks), -1.0);
  return out;
}

std::vector<double> Decoder::decoding_scores(const Step& step) const {
  std::vector<double> scores(step.log_probs.values().begin(), step.log_probs.values().end());
  if (options_.suppress_reserved) {
    for (TokenId id : {data::kPad, data::kBos, data::kUnk})
      if (static_cast<std::size_t>(id) < scores.size()) scores[static_cast<std::size_t>(id)] = -INFINITY;
  }
  return scores;
}

std::vector<double> probabilities(const Step& step) {
  std::vector<double> p(step.log_probs.size());
  for (std::size_t i = 0; i < p.size(); ++i) p[i] = std::exp(step.log_probs[i]);
  return p;
}

}  // namespace recnet::decoder
