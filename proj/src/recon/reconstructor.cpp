#include "recnet/reconstructor.hpp"

#include <stdexcept>

#include "recnet/ops.hpp"

namespace recnet::recon {

std::string to_string(ReconKind kind) {
  switch (kind) {
    case ReconKind::none: return "none";
    case ReconKind::global: return "global";
    case ReconKind::local: return "local";
    case ReconKind::joint: return "joint";
  }
  return "none";
}

ReconKind parse_recon_kind(const std::string& text) {
  if (text == "none") return ReconKind::none;
  if (text == "global") return ReconKind::global;
  if (text == "local") return ReconKind::local;
  if (text == "joint") return ReconKind::joint;
  throw std::invalid_argument("unknown reconstructor '" + text + "' (none|global|local|joint)");
}

namespace {

void check_hidden(std::span<const Tensor> hidden, std::size_t input) {
  if (hidden.empty()) throw std::invalid_argument("reconstructor needs at least one decoder hidden state");
  for (const auto& h : hidden) {
    if (h.rank() != 1 || h.size() != input) {
      throw ad::DimensionError("decoder hidden state has shape " + ad::shape_string(h.shape()) + ", expected [" +
                               std::to_string(input) + "]");
    }
  }
}

void check_video(const data::SampledFeatures& video, std::size_t hidden) {
  if (video.dim != hidden) {
    throw ad::DimensionError("reconstructor hidden size " + std::to_string(hidden) +
                             " differs from feature dimension " + std::to_string(video.dim));
  }
}

struct Cell {
  Tensor z;
  Tensor mem;
};

Cell lstm_cell(const Tensor& w, const Tensor& b, std::span<const Tensor> inputs, const Tensor& mem_prev,
               std::size_t hidden) {
  auto gates = ad::add(ad::matvec(w, ad::concat(inputs)), b);
  auto i = ad::sigmoid(ad::slice(gates, 0, hidden));
  auto f = ad::sigmoid(ad::slice(gates, hidden, hidden));
  auto o = ad::sigmoid(ad::slice(gates, 2 * hidden, hidden));
  auto g = ad::tanh(ad::slice(gates, 3 * hidden, hidden));
  Cell c;
  c.mem = ad::add(ad::hadamard(f, mem_prev), ad::hadamard(i, g));
  c.z = ad::hadamard(o, ad::tanh(c.mem));
  return c;
}

Tensor frame(const data::SampledFeatures& video, std::size_t j) {
  auto r = video.row(j);
  return Tensor::vector({r.begin(), r.end()});
}

}  // namespace

std::vector<double> valid_frame_mean(const data::SampledFeatures& video) {
  if (video.valid_count == 0) throw std::invalid_argument("video has no valid frames");
  std::vector<double> mean(video.dim, 0.0);
  for (std::size_t j = 0; j < video.valid_count; ++j) {
    auto r = video.row(j);
    for (std::size_t k = 0; k < video.dim; ++k) mean[k] += r[k];
  }
  for (auto& v : mean) v /= static_cast<double>(video.valid_count);
  return mean;
}

Tensor global_loss(std::span<const Tensor> z, const data::SampledFeatures& video) {
  return ad::sq_euclidean(Tensor::vector(valid_frame_mean(video)), ad::mean_pool(z));
}

Tensor local_loss(std::span<const Tensor> z, const data::SampledFeatures& video, bool valid_only) {
  const std::size_t m = valid_only ? video.valid_count : video.rows();
  if (z.size() < m) {
    throw ad::DimensionError("local loss needs " + std::to_string(m) + " reconstructed frames, got " +
                             std::to_string(z.size()));
  }
  std::vector<Tensor> terms;
  terms.reserve(m);
  for (std::size_t j = 0; j < m; ++j) terms.push_back(ad::sq_euclidean(z[j], frame(video, j)));
  return ad::scale(ad::add_n(terms), 1.0 / static_cast<double>(m));
}

GlobalReconParams GlobalReconParams::create(ad::ParameterSet& ps, const ReconDims& d, Rng& rng,
                                            const std::string& prefix) {
  const std::size_t in = d.input + d.hidden + d.input;
  return {ps.add_uniform(prefix + ".lstm.w", {4 * d.hidden, in}, in, rng),
          ps.add_zeros(prefix + ".lstm.b", {4 * d.hidden})};
}

GlobalReconParams GlobalReconParams::bind(const ad::ParameterSet& ps, const std::string& prefix) {
  return {ps.at(prefix + ".lstm.w"), ps.at(prefix + ".lstm.b")};
}

LocalReconParams LocalReconParams::create(ad::ParameterSet& ps, const ReconDims& d, Rng& rng,
                                          const std::string& prefix) {
  const std::size_t in = d.input + d.hidden;
  LocalReconParams p;
  p.attn_w = ps.add_uniform(prefix + ".attn.w_beta", {d.attn}, d.attn, rng);
  p.attn_wh = ps.add_uniform(prefix + ".attn.w_hr", {d.attn, d.input}, d.input, rng);
  p.attn_wz = ps.add_uniform(prefix + ".attn.w_zr", {d.attn, d.hidden}, d.hidden, rng);
  p.attn_b = ps.add_zeros(prefix + ".attn.b_r", {d.attn});
  p.lstm_w = ps.add_uniform(prefix + ".lstm.w", {4 * d.hidden, in}, in, rng);
  p.lstm_b = ps.add_zeros(prefix + ".lstm.b", {4 * d.hidden});
  return p;
}

LocalReconParams LocalReconParams::bind(const ad::ParameterSet& ps, const std::string& prefix) {
  LocalReconParams p;
  p.attn_w = ps.at(prefix + ".attn.w_beta");
  p.attn_wh = ps.at(prefix + ".attn.w_hr");
  p.attn_wz = ps.at(prefix + ".attn.w_zr");
  p.attn_b = ps.at(prefix + ".attn.b_r");
  p.lstm_w = ps.at(prefix + ".lstm.w");
  p.lstm_b = ps.at(prefix + ".lstm.b");
  return p;
}

GlobalReconstructor::GlobalReconstructor(GlobalReconParams params, ReconDims dims)
    : params_(std::move(params)), dims_(dims) {
  const ad::Shape w{4 * dims_.hidden, 2 * dims_.input + dims_.hidden};
  if (params_.lstm_w.shape() != w || params_.lstm_b.shape() != ad::Shape{4 * dims_.hidden}) {
    throw ad::DimensionError("global reconstructor parameters do not match dims; lstm.w is " +
                             ad::shape_string(params_.lstm_w.shape()) + ", expected " + ad::shape_string(w));
  }
}

std::vector<Tensor> GlobalReconstructor::reconstruct(std::span<const Tensor> hidden) const {
  check_hidden(hidden, dims_.input);
  const auto summary = ad::mean_pool(hidden);
  Cell cell{Tensor::zeros({dims_.hidden}), Tensor::zeros({dims_.hidden})};
  std::vector<Tensor> z;
  z.reserve(hidden.size());
  for (const auto& h : hidden) {
    const Tensor inputs[] = {h, cell.z, summary};
    cell = lstm_cell(params_.lstm_w, params_.lstm_b, inputs, cell.mem, dims_.hidden);
    z.push_back(cell.z);
  }
  return z;
}

ReconTrace GlobalReconstructor::run(std::span<const Tensor> hidden, const data::SampledFeatures& video) const {
  check_video(video, dims_.hidden);
  ReconTrace trace;
  trace.z = reconstruct(hidden);
  trace.loss = global_loss(trace.z, video);
  trace.global_term = trace.loss.item();
  return trace;
}

LocalReconstructor::LocalReconstructor(LocalReconParams params, ReconDims dims, ReconOptions options)
    : params_(std::move(params)), dims_(dims), options_(options) {
  const ad::Shape w{4 * dims_.hidden, dims_.input + dims_.hidden};
  if (params_.lstm_w.shape() != w || params_.attn_wh.shape() != ad::Shape{dims_.attn, dims_.input} ||
      params_.attn_wz.shape() != ad::Shape{dims_.attn, dims_.hidden}) {
    throw ad::DimensionError("local reconstructor parameters do not match dims; lstm.w is " +
                             ad::shape_string(params_.lstm_w.shape()) + ", expected " + ad::shape_string(w));
  }
}

HiddenMemory LocalReconstructor::prepare(std::span<const Tensor> hidden) const {
  check_hidden(hidden, dims_.input);
  HiddenMemory m;
  m.states = ad::stack_rows(hidden);
  m.states_t = ad::transpose(m.states);
  m.projected = ad::add_row_broadcast(ad::matmul(m.states, ad::transpose(params_.attn_wh)), params_.attn_b);
  return m;
}

HiddenAttention LocalReconstructor::attend(const HiddenMemory& memory, const Tensor& z_prev) const {
  auto act = ad::tanh(ad::add_row_broadcast(memory.projected, ad::matvec(params_.attn_wz, z_prev)));
  HiddenAttention a;
  a.weights = ad::softmax(ad::matvec(act, params_.attn_w));
  a.context = ad::matvec(memory.states_t, a.weights);
  return a;
}

std::vector<Tensor> LocalReconstructor::reconstruct(std::span<const Tensor> hidden,
                                                    std::vector<std::vector<double>>* beta) const {
  const auto memory = prepare(hidden);
  Cell cell{Tensor::zeros({dims_.hidden}), Tensor::zeros({dims_.hidden})};
  std::vector<Tensor> z;
  z.reserve(data::kSampledFrames);
  for (std::size_t t = 0; t < data::kSampledFrames; ++t) {
    auto att = attend(memory, cell.z);
    if (beta) beta->emplace_back(att.weights.values().begin(), att.weights.values().end());
    const Tensor inputs[] = {att.context, cell.z};
    cell = lstm_cell(params_.lstm_w, params_.lstm_b, inputs, cell.mem, dims_.hidden);
    z.push_back(cell.z);
  }
  return z;
}

ReconTrace LocalReconstructor::run_local(std::span<const Tensor> hidden, const data::SampledFeatures& video) const {
  check_video(video, dims_.hidden);
  ReconTrace trace;
  trace.z = reconstruct(hidden, &trace.beta);
  trace.loss = local_loss(trace.z, video, options_.local_valid_only);
  trace.local_term = trace.loss.item();
  return trace;
}

ReconTrace LocalReconstructor::run_joint(std::span<const Tensor> hidden, const data::SampledFeatures& video) const {
  check_video(video, dims_.hidden);
  ReconTrace trace;
  trace.z = reconstruct(hidden, &trace.beta);
  // Mean over the reconstructed frames that line up with real frames.
  auto global = global_loss(std::span<const Tensor>(trace.z).first(video.valid_count), video);
  auto local = local_loss(trace.z, video, options_.local_valid_only);
  trace.global_term = global.item();
  trace.local_term = local.item();
  trace.loss = ad::add(global, local);
  return trace;
}

Reconstructor::Reconstructor(ReconKind kind, const ad::ParameterSet& ps, ReconDims dims, ReconOptions options)
    : kind_(kind) {
  switch (kind) {
    case ReconKind::none: break;
    case ReconKind::global: global_.emplace(GlobalReconParams::bind(ps), dims); break;
    case ReconKind::local:
    case ReconKind::joint: local_.emplace(LocalReconParams::bind(ps), dims, options); break;
  }
}

void Reconstructor::create_params(ReconKind kind, ad::ParameterSet& ps, const ReconDims& dims, Rng& rng) {
  switch (kind) {
    case ReconKind::none: break;
    case ReconKind::global: GlobalReconParams::create(ps, dims, rng); break;
    case ReconKind::local:
    case ReconKind::joint: LocalReconParams::create(ps, dims, rng); break;
  }
}

ReconTrace Reconstructor::run(std::span<const Tensor> hidden, const data::SampledFeatures& video) const {
  switch (kind_) {
    case ReconKind::global: return global_->run(hidden, video);
    case ReconKind::local: return local_->run_local(hidden, video);
    case ReconKind::joint: return local_->run_joint(hidden, video);
    case ReconKind::none: break;
  }
  throw std::logic_error("reconstructor is disabled");
}

}  // namespace recnet::recon
