#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "recnet/config.hpp"
#include "recnet/model.hpp"
#include "recnet/tensor.hpp"
#include "recnet/vocabulary.hpp"

namespace recnet::train {

class CheckpointError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ParamRecord {
  std::string name;
  ad::Shape shape;
  std::vector<double> values;
};

struct Checkpoint {
  data::Vocabulary vocab;
  TrainConfig config;
  std::size_t feature_dim = 0;
  recon::ReconKind reconstructor = recon::ReconKind::none;  // attached variant
  std::uint64_t epoch = 0;
  double best_cider = 0.0;
  std::vector<ParamRecord> params;
};

Checkpoint make_checkpoint(const CaptionModel& model, const TrainConfig& config, std::uint64_t epoch,
                           double best_cider);

// Little-endian: "RCNC", u32 version, vocabulary (u32 count, then u32-length
// prefixed words), u32-prefixed config text, u32 feature dim, u32
// reconstructor kind, u64 epoch, f64 best CIDEr, u32 parameter count, then per
// parameter a u32-prefixed name, u32 rank, u64 extents and f64 values.
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
std::vector<char> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint read_checkpoint(const std::filesystem::path& path);
Checkpoint parse_checkpoint(const std::vector<char>& bytes, const std::string& origin = "checkpoint");

// Copies record values into `model`; the name set and every shape must match
// exactly.
void load_parameters(CaptionModel& model, const std::vector<ParamRecord>& records);
// Rebuilds the model a checkpoint was taken from.
CaptionModel load_model(const Checkpoint& ckpt);

}  // namespace recnet::train
