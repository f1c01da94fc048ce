#include "recnet/features.hpp"

#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <iterator>

namespace recnet::data {

namespace {

constexpr std::array<char, 4> kMagic{'V', 'F', 'R', 'M'};
constexpr std::uint32_t kVersion = 1;

static_assert(std::endian::native == std::endian::little, "feature I/O assumes a little-endian host");

std::uint32_t load_u32(const char* p) {
  std::uint32_t v;
  std::memcpy(&v, p, sizeof v);
  return v;
}

void store_u32(std::ofstream& out, std::uint32_t v) { out.write(reinterpret_cast<const char*>(&v), sizeof v); }

}  // namespace

SampledFeatures sample_frames(const VideoFeatures& vf) {
  if (vf.frames == 0 || vf.dim == 0 || vf.values.size() != vf.frames * vf.dim) {
    throw std::invalid_argument("sample_frames: empty or malformed feature matrix for video '" +
                                vf.video_id + "'");
  }
  SampledFeatures out;
  out.dim = vf.dim;
  out.values.assign(kSampledFrames * vf.dim, 0.0);
  if (vf.frames >= kSampledFrames) {
    out.valid_count = kSampledFrames;
    for (std::size_t i = 0; i < kSampledFrames; ++i) {
      const std::size_t src = i * vf.frames / kSampledFrames;
      std::copy_n(vf.row(src).begin(), vf.dim, out.values.begin() + static_cast<std::ptrdiff_t>(i * vf.dim));
    }
  } else {
    out.valid_count = vf.frames;
    std::copy(vf.values.begin(), vf.values.end(), out.values.begin());
  }
  return out;
}

VideoFeatures read_features(const std::filesystem::path& path, std::string video_id) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FeatureFileError(FeatureFileError::Kind::io, "cannot open feature file " + path.string());
  std::vector<char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

  constexpr std::size_t header = 16;
  if (bytes.size() < 4 || !std::equal(kMagic.begin(), kMagic.end(), bytes.begin())) {
    throw FeatureFileError(FeatureFileError::Kind::bad_magic, path.string() + ": missing VFRM magic");
  }
  if (bytes.size() < header) {
    throw FeatureFileError(FeatureFileError::Kind::truncated, path.string() + ": truncated header");
  }
  const auto version = load_u32(bytes.data() + 4);
  if (version != kVersion) {
    throw FeatureFileError(FeatureFileError::Kind::bad_version,
                           path.string() + ": unsupported version " + std::to_string(version));
  }
  const std::size_t frames = load_u32(bytes.data() + 8);
  const std::size_t dim = load_u32(bytes.data() + 12);
  if (frames == 0 || dim == 0) {
    throw FeatureFileError(FeatureFileError::Kind::bad_header,
                           path.string() + ": zero frame count or dimension");
  }
  const std::size_t count = frames * dim;
  if (bytes.size() - header < count * sizeof(float)) {
    throw FeatureFileError(FeatureFileError::Kind::truncated,
                           path.string() + ": expected " + std::to_string(count) + " floats, found " +
                               std::to_string((bytes.size() - header) / sizeof(float)));
  }

  VideoFeatures vf;
  vf.video_id = video_id.empty() ? path.stem().string() : std::move(video_id);
  vf.frames = frames;
  vf.dim = dim;
  vf.values.resize(count);
  for (std::size_t i = 0; i < count; ++i) {
    float f;
    std::memcpy(&f, bytes.data() + header + i * sizeof(float), sizeof f);
    if (!std::isfinite(f)) {
      throw FeatureFileError(FeatureFileError::Kind::non_finite,
                             path.string() + ": non-finite value at index " + std::to_string(i));
    }
    vf.values[i] = f;
  }
  return vf;
}

void write_features(const VideoFeatures& vf, const std::filesystem::path& path) {
  if (vf.frames == 0 || vf.dim == 0 || vf.values.size() != vf.frames * vf.dim) {
    throw FeatureFileError(FeatureFileError::Kind::bad_header, "refusing to write malformed features for '" +
                                                                   vf.video_id + "'");
  }
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FeatureFileError(FeatureFileError::Kind::io, "cannot write feature file " + path.string());
  out.write(kMagic.data(), kMagic.size());
  store_u32(out, kVersion);
  store_u32(out, static_cast<std::uint32_t>(vf.frames));
  store_u32(out, static_cast<std::uint32_t>(vf.dim));
  for (double v : vf.values) {
    if (!std::isfinite(v)) {
      throw FeatureFileError(FeatureFileError::Kind::non_finite, "non-finite feature in '" + vf.video_id + "'");
    }
    const auto f = static_cast<float>(v);
    out.write(reinterpret_cast<const char*>(&f), sizeof f);
  }
  if (!out) throw FeatureFileError(FeatureFileError::Kind::io, "write failed for " + path.string());
}

}  // namespace recnet::data
