#include "recnet/model.hpp"

#include <algorithm>
#include <stdexcept>

namespace recnet::train {

ModelSpec model_spec(const TrainConfig& config, std::size_t vocab_size, std::size_t feature_dim) {
  ModelSpec spec;
  spec.dims.vocab = vocab_size;
  spec.dims.embed = config.embed_dim;
  spec.dims.hidden = config.hidden_dim;
  spec.dims.feature = feature_dim;
  spec.dims.attn = config.effective_attn_dim();
  spec.options.mask_padding = config.mask_padding;
  spec.options.suppress_reserved = config.suppress_reserved;
  spec.recon_options.local_valid_only = config.local_valid_only;
  spec.recon_attn = config.effective_recon_attn_dim();
  return spec;
}

namespace {

decoder::DecoderParams init_decoder(ad::ParameterSet& ps, const ModelSpec& spec, std::uint64_t seed) {
  Rng root(seed);
  Rng rng = root.split();
  return decoder::DecoderParams::create(ps, spec.dims, rng);
}

recon::ReconDims recon_dims(const ModelSpec& spec) {
  return {spec.dims.hidden, spec.dims.feature, spec.recon_attn ? spec.recon_attn : spec.dims.hidden};
}

}  // namespace

CaptionModel::CaptionModel(data::Vocabulary vocab, ModelSpec spec, std::uint64_t seed)
    : vocab_(std::move(vocab)),
      spec_(spec),
      seed_(seed),
      decoder_(init_decoder(params_, spec_, seed), spec_.dims, spec_.options) {
  if (spec_.dims.vocab != vocab_.size()) throw std::invalid_argument("model vocab size does not match vocabulary");
}

void CaptionModel::attach_reconstructor(recon::ReconKind kind) {
  if (recon_.enabled()) throw std::logic_error("a reconstructor is already attached");
  if (kind == recon::ReconKind::none) return;
  Rng root(seed_);
  root.split();
  Rng rng = root.split();
  const auto dims = recon_dims(spec_);
  recon::Reconstructor::create_params(kind, params_, dims, rng);
  recon_ = recon::Reconstructor(kind, params_, dims, spec_.recon_options);
}

std::vector<std::vector<double>> CaptionModel::snapshot() const {
  std::vector<std::vector<double>> out;
  out.reserve(params_.size());
  for (const auto& p : params_) out.emplace_back(p.tensor.values().begin(), p.tensor.values().end());
  return out;
}

void CaptionModel::restore(const std::vector<std::vector<double>>& values) {
  if (values.size() != params_.size()) throw std::invalid_argument("snapshot does not match parameter count");
  for (std::size_t i = 0; i < values.size(); ++i) {
    auto tensor = params_[i].tensor;
    auto dst = tensor.mutable_values();
    if (dst.size() != values[i].size()) throw std::invalid_argument("snapshot shape mismatch for " + params_[i].name);
    std::copy(values[i].begin(), values[i].end(), dst.begin());
  }
}

}  // namespace recnet::train
