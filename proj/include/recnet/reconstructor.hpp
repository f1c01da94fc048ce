#pragma once

#include <optional>
#include <span>
#include <string>
#include <vector>

#include "recnet/features.hpp"
#include "recnet/parameter.hpp"
#include "recnet/tensor.hpp"

namespace recnet::recon {

using ad::Tensor;

enum class ReconKind { none, global, local, joint };

std::string to_string(ReconKind kind);
ReconKind parse_recon_kind(const std::string& text);

struct ReconDims {
  std::size_t input = 512;    // decoder hidden size
  std::size_t hidden = 1536;  // must equal the frame feature dimension
  std::size_t attn = 512;     // relevance-score width of the local variant
};

struct ReconOptions {
  // Average the per-frame loss over valid frames only instead of all 28.
  bool local_valid_only = false;
};

struct ReconTrace {
  std::vector<Tensor> z;                   // reconstructed sequence z_1..z_T
  std::vector<std::vector<double>> beta;   // T x n, local/joint only
  Tensor loss;                             // scalar
  double global_term = 0.0;
  double local_term = 0.0;
};

// Mean of the first valid_count rows.
std::vector<double> valid_frame_mean(const data::SampledFeatures& video);

// psi(phi(V_valid), phi(Z)).
Tensor global_loss(std::span<const Tensor> z, const data::SampledFeatures& video);
// (1/m) sum_j psi(z_j, v_j) over all 28 rows, or over valid rows when asked.
Tensor local_loss(std::span<const Tensor> z, const data::SampledFeatures& video, bool valid_only = false);

struct GlobalReconParams {
  Tensor lstm_w;  // [4*hidden x (input + hidden + input)], gate rows i, f, o, g
  Tensor lstm_b;  // [4*hidden]

  static GlobalReconParams create(ad::ParameterSet& ps, const ReconDims& dims, Rng& rng,
                                  const std::string& prefix = "recon.global");
  static GlobalReconParams bind(const ad::ParameterSet& ps, const std::string& prefix = "recon.global");
};

struct LocalReconParams {
  Tensor attn_w;   // w_beta [attn]
  Tensor attn_wh;  // w_hr [attn x input]
  Tensor attn_wz;  // w_zr [attn x hidden]
  Tensor attn_b;   // b_r [attn]
  Tensor lstm_w;   // [4*hidden x (input + hidden)]
  Tensor lstm_b;   // [4*hidden]

  static LocalReconParams create(ad::ParameterSet& ps, const ReconDims& dims, Rng& rng,
                                 const std::string& prefix = "recon.local");
  static LocalReconParams bind(const ad::ParameterSet& ps, const std::string& prefix = "recon.local");
};

// Runs one LSTM step per decoder hidden state, each consuming
// (h_t, z_{t-1}, mean(H)).
class GlobalReconstructor {
 public:
  GlobalReconstructor(GlobalReconParams params, ReconDims dims);
  std::vector<Tensor> reconstruct(std::span<const Tensor> hidden) const;
  ReconTrace run(std::span<const Tensor> hidden, const data::SampledFeatures& video) const;

 private:
  GlobalReconParams params_;
  ReconDims dims_;
};

// Decoder hidden states with the z-independent half of the relevance score.
struct HiddenMemory {
  Tensor states;     // [n x input]
  Tensor states_t;   // [input x n]
  Tensor projected;  // [n x attn], w_hr h_i + b_r
};

struct HiddenAttention {
  Tensor weights;  // beta row [n]
  Tensor context;  // mu [input]
};

// 28 LSTM steps, step t consuming (mu_t, z_{t-1}) with mu_t attended over H.
class LocalReconstructor {
 public:
  LocalReconstructor(LocalReconParams params, ReconDims dims, ReconOptions options = {});

  HiddenMemory prepare(std::span<const Tensor> hidden) const;
  HiddenAttention attend(const HiddenMemory& memory, const Tensor& z_prev) const;
  std::vector<Tensor> reconstruct(std::span<const Tensor> hidden, std::vector<std::vector<double>>* beta) const;

  ReconTrace run_local(std::span<const Tensor> hidden, const data::SampledFeatures& video) const;
  // Global term on the mean of the reconstructed frames plus the local term,
  // from a single reconstruction pass.
  ReconTrace run_joint(std::span<const Tensor> hidden, const data::SampledFeatures& video) const;

 private:
  LocalReconParams params_;
  ReconDims dims_;
  ReconOptions options_;
};

// The configured variant behind one interface.
class Reconstructor {
 public:
  Reconstructor() = default;
  Reconstructor(ReconKind kind, const ad::ParameterSet& ps, ReconDims dims, ReconOptions options = {});

  // Registers the parameters `kind` needs (joint shares the local ones).
  static void create_params(ReconKind kind, ad::ParameterSet& ps, const ReconDims& dims, Rng& rng);

  ReconKind kind() const { return kind_; }
  bool enabled() const { return kind_ != ReconKind::none; }
  ReconTrace run(std::span<const Tensor> hidden, const data::SampledFeatures& video) const;

 private:
  ReconKind kind_ = ReconKind::none;
  std::optional<GlobalReconstructor> global_;
  std::optional<LocalReconstructor> local_;
};

}  // namespace recnet::recon
