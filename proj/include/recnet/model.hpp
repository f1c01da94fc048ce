#pragma once

#include <cstdint>
#include <vector>

#include "recnet/config.hpp"
#include "recnet/decoder.hpp"
#include "recnet/parameter.hpp"
#include "recnet/reconstructor.hpp"
#include "recnet/vocabulary.hpp"

namespace recnet::train {

struct ModelSpec {
  decoder::DecoderDims dims;
  decoder::DecoderOptions options;
  recon::ReconOptions recon_options;
  std::size_t recon_attn = 0;  // 0: decoder hidden size
};

ModelSpec model_spec(const TrainConfig& config, std::size_t vocab_size, std::size_t feature_dim);

// Vocabulary, parameters, and the modules bound to them. Decoder parameters
// are registered first and the reconstructor's (if any) after, so optimizer
// state for the decoder keeps its indices when a reconstructor is attached.
class CaptionModel {
 public:
  // Decoder weights from one stream of Rng(seed); reconstructor weights come
  // from an independent stream of the same seed.
  CaptionModel(data::Vocabulary vocab, ModelSpec spec, std::uint64_t seed);
  // Copies would alias parameter storage.
  CaptionModel(const CaptionModel&) = delete;
  CaptionModel& operator=(const CaptionModel&) = delete;
  CaptionModel(CaptionModel&&) = default;
  CaptionModel& operator=(CaptionModel&&) = default;

  const data::Vocabulary& vocab() const { return vocab_; }
  const ModelSpec& spec() const { return spec_; }
  const decoder::Decoder& decoder() const { return decoder_; }
  const recon::Reconstructor& reconstructor() const { return recon_; }
  recon::ReconKind recon_kind() const { return recon_.kind(); }

  ad::ParameterSet& params() { return params_; }
  const ad::ParameterSet& params() const { return params_; }

  // Registers and initialises the reconstructor. Only one may be attached.
  void attach_reconstructor(recon::ReconKind kind);

  // Deep copy of every parameter value, in registration order.
  std::vector<std::vector<double>> snapshot() const;
  void restore(const std::vector<std::vector<double>>& values);

 private:
  data::Vocabulary vocab_;
  ModelSpec spec_;
  std::uint64_t seed_;
  ad::ParameterSet params_;
  decoder::Decoder decoder_;
  recon::Reconstructor recon_;
};

}  // namespace recnet::train
