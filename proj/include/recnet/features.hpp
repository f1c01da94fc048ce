#pragma once

#include <filesystem>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace recnet::data {

inline constexpr std::size_t kSampledFrames = 28;

// Raw per-frame features of one video, m' x d row-major.
struct VideoFeatures {
  std::string video_id;
  std::size_t frames = 0;
  std::size_t dim = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
};

// Exactly kSampledFrames rows; rows at or past valid_count are zero.
struct SampledFeatures {
  std::size_t dim = 0;
  std::size_t valid_count = 0;
  std::vector<double> values;

  std::span<const double> row(std::size_t i) const { return {values.data() + i * dim, dim}; }
  std::size_t rows() const { return kSampledFrames; }
};

// Frame indices floor(i * m' / 28) when m' >= 28; otherwise all m' rows
// followed by zero padding.
SampledFeatures sample_frames(const VideoFeatures& vf);

class FeatureFileError : public std::runtime_error {
 public:
  enum class Kind { io, bad_magic, bad_version, truncated, non_finite, bad_header };
  FeatureFileError(Kind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Binary little-endian layout: "VFRM", u32 version (1), u32 frames, u32 dim,
// then frames*dim float32 values row-major.
VideoFeatures read_features(const std::filesystem::path& path, std::string video_id = {});
void write_features(const VideoFeatures& vf, const std::filesystem::path& path);

}  // namespace recnet::data
