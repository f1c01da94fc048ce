#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "recnet/features.hpp"
#include "recnet/parameter.hpp"
#include "recnet/tensor.hpp"
#include "recnet/vocabulary.hpp"

namespace recnet::decoder {

using ad::Tensor;
using data::Sentence;
using data::TokenId;

// 30 caption tokens plus EOS.
inline constexpr std::size_t kMaxDecodeSteps = 31;

struct DecoderDims {
  std::size_t vocab = 0;
  std::size_t embed = 468;
  std::size_t hidden = 512;
  std::size_t feature = 1536;
  std::size_t attn = 512;  // width of the relevance-score projection
};

struct DecoderOptions {
  // Exclude zero-padded frames from attention. Off: all 28 rows take part.
  bool mask_padding = false;
  // Never emit PAD/BOS/UNK while decoding (teacher forcing is unaffected).
  bool suppress_reserved = false;
  std::size_t max_steps = kMaxDecodeSteps;
};

// Handles into a ParameterSet; copies share storage with the registry.
struct DecoderParams {
  Tensor embedding;  // [vocab x embed]
  Tensor lstm_w;     // [4*hidden x (embed + feature + hidden)], gate rows i, f, o, g
  Tensor lstm_b;     // [4*hidden]
  Tensor attn_w;     // w_alpha [attn]
  Tensor attn_wv;    // w_vd [attn x feature]
  Tensor attn_wh;    // w_hd [attn x hidden]
  Tensor attn_b;     // b_d [attn]
  Tensor out_w;      // [vocab x hidden]
  Tensor out_b;      // [vocab]

  static DecoderParams create(ad::ParameterSet& params, const DecoderDims& dims, Rng& rng,
                              const std::string& prefix = "decoder");
  static DecoderParams bind(const ad::ParameterSet& params, const std::string& prefix = "decoder");
};

struct LSTMState {
  Tensor h;
  Tensor mem;
};

// Frame matrix plus the state-independent half of the relevance score,
// w_vd * v_j + b_d, computed once per video.
struct AttentionMemory {
  Tensor frames;     // [rows x feature], constant
  Tensor frames_t;   // [feature x rows], constant
  Tensor projected;  // [rows x attn]
  std::size_t rows = 0;
};

struct Attention {
  Tensor weights;  // [rows], sums to 1
  Tensor context;  // [feature]
};

struct Step {
  Tensor logits;     // x_i, pre-softmax
  Tensor log_probs;  // log softmax(x_i)
  LSTMState state;
  Attention attention;
};

// Per-step record of one decoding pass.
struct DecoderTrace {
  std::vector<Tensor> hidden;                   // h_1..h_n
  std::vector<std::vector<double>> attention;   // n x 28
  std::vector<std::vector<double>> logits;      // x_1..x_n
  std::vector<double> log_probs;                // log p of the token consumed at each step
  Sentence tokens;                              // predicted/target token per step (EOS included)
};

struct TeacherForced {
  Tensor nll;  // scalar, -sum_i log p(s_i | s_<i, V)
  DecoderTrace trace;
};

struct SampledSequence {
  Sentence tokens;               // without EOS
  bool terminated = false;       // EOS was emitted before the step cap
  std::vector<double> log_probs; // one per step, EOS step included
};

class Decoder {
 public:
  Decoder(DecoderParams params, DecoderDims dims, DecoderOptions options = {});

  const DecoderDims& dims() const { return dims_; }
  const DecoderOptions& options() const { return options_; }
  const DecoderParams& params() const { return params_; }

  AttentionMemory prepare(const data::SampledFeatures& video) const;
  // e_j = w_alpha' tanh(w_vd v_j + w_hd h_prev + b_d); alpha = softmax(e);
  // context = sum_j alpha_j v_j.
  Attention attend(const AttentionMemory& memory, const Tensor& h_prev) const;
  static Tensor attention_context(const AttentionMemory& memory, const Tensor& weights);

  LSTMState initial_state() const;
  Step step(TokenId prev, const LSTMState& state, const AttentionMemory& memory) const;

  // Feeds BOS then `target`; predicts every target token and, when
  // `append_eos`, a final EOS.
  TeacherForced teacher_forced(const data::SampledFeatures& video, const Sentence& target,
                               bool append_eos = true) const;

  Sentence greedy(const data::SampledFeatures& video, DecoderTrace* trace = nullptr) const;
  SampledSequence sample(const data::SampledFeatures& video, std::uint64_t seed) const;
  Sentence beam_search(const data::SampledFeatures& video, std::size_t beam = 5) const;

  // Log-probabilities for decoding, with reserved tokens suppressed when
  // configured.
  std::vector<double> decoding_scores(const Step& step) const;

 private:
  DecoderParams params_;
  DecoderDims dims_;
  DecoderOptions options_;
};

// Probabilities of one step, exp(log_probs).
std::vector<double> probabilities(const Step& step);

}  // namespace recnet::decoder
