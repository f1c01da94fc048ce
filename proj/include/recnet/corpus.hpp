#pragma once

#include <filesystem>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "recnet/caption.hpp"
#include "recnet/features.hpp"

namespace recnet::data {

class CorpusError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// One line of the caption file: {"video_id": str, "captions": [str, ...]}.
struct VideoCaptions {
  std::string video_id;
  std::vector<std::string> captions;
};

std::vector<VideoCaptions> read_caption_file(const std::filesystem::path& path);
void write_caption_file(const std::filesystem::path& path, const std::vector<VideoCaptions>& records);

// Plain text, one video id per line; blank lines ignored.
std::vector<std::string> read_split(const std::filesystem::path& path);
void write_split(const std::filesystem::path& path, const std::vector<std::string>& ids);

std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& video_id);

// Sampled features and cleaned captions for a set of videos.
struct Dataset {
  std::map<std::string, SampledFeatures> features;
  std::map<std::string, std::vector<std::vector<std::string>>> captions;
  std::vector<std::string> rejected;  // human-readable reasons, one per dropped caption
  std::vector<std::string> missing;   // requested ids skipped because data was absent
};

// Loads features for `video_ids` and every caption of those videos. Missing
// feature files or caption entries throw CorpusError naming the video, unless
// `skip_missing` is set, in which case the id is recorded in `missing`.
Dataset load_dataset(const std::filesystem::path& features_dir, const std::filesystem::path& captions_path,
                     const std::vector<std::string>& video_ids, bool skip_missing = false);

}  // namespace recnet::data
