#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "recnet/optimizer.hpp"
#include "recnet/reconstructor.hpp"

namespace recnet::train {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Stage { xe, joint, rl, rl_joint };
std::string to_string(Stage stage);
Stage parse_stage(const std::string& text);

struct TrainConfig {
  Stage stage = Stage::xe;
  recon::ReconKind reconstructor = recon::ReconKind::none;
  std::optional<double> lambda;  // unset: per-reconstructor default

  OptimizerKind xe_optimizer = OptimizerKind::adadelta;
  OptimizerKind rl_optimizer = OptimizerKind::adam;
  AdaDeltaConfig adadelta;
  AdamConfig adam;

  std::size_t batch_size = 16;
  std::size_t patience = 20;
  std::size_t max_epochs = 200;  // per phase
  std::uint64_t seed = 1;

  std::size_t embed_dim = 468;
  std::size_t hidden_dim = 512;
  std::size_t attn_dim = 0;        // 0: same as hidden_dim
  std::size_t recon_attn_dim = 0;  // 0: same as hidden_dim
  std::size_t beam_size = 5;
  int min_count = 1;
  bool cider_d = false;
  bool mask_padding = false;
  bool suppress_reserved = false;
  bool local_valid_only = false;

  std::string features_dir;
  std::string captions;
  std::string train_split;
  std::string val_split;
  std::string test_split;
  std::string output_dir;
  // Start from this checkpoint instead of running stage 1.
  std::string init_checkpoint;

  // 0.2 global, 0.1 local and joint, 0 without a reconstructor.
  double effective_lambda() const;
  std::size_t effective_attn_dim() const { return attn_dim ? attn_dim : hidden_dim; }
  std::size_t effective_recon_attn_dim() const { return recon_attn_dim ? recon_attn_dim : hidden_dim; }

  // Throws ConfigError on unknown keys or unparsable values.
  void set(const std::string& key, const std::string& value);
  void validate() const;
  // Every key, one "key = value" line each; round-trips through parse_config.
  std::string to_text() const;
};

double default_lambda(recon::ReconKind kind);

// "key = value" lines, '#' starts a comment. Duplicate keys: last wins.
std::map<std::string, std::string> parse_config_text(const std::string& text);
TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::filesystem::path& path);

}  // namespace recnet::train
