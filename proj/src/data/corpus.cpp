#include "recnet/corpus.hpp"

#include <fstream>
#include <set>

#include <json.hpp>

namespace recnet::data {

using nlohmann::json;

std::vector<VideoCaptions> read_caption_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open caption file " + path.string());
  std::vector<VideoCaptions> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      auto j = json::parse(line);
      VideoCaptions rec;
      rec.video_id = j.at("video_id").get<std::string>();
      rec.captions = j.at("captions").get<std::vector<std::string>>();
      out.push_back(std::move(rec));
    } catch (const json::exception& e) {
      throw CorpusError(path.string() + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

void write_caption_file(const std::filesystem::path& path, const std::vector<VideoCaptions>& records) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CorpusError("cannot write caption file " + path.string());
  for (const auto& r : records) {
    json j{{"video_id", r.video_id}, {"captions", r.captions}};
    out << j.dump() << '\n';
  }
  if (!out) throw CorpusError("write failed for " + path.string());
}

std::vector<std::string> read_split(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw CorpusError("cannot open split file " + path.string());
  std::vector<std::string> ids;
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos) continue;
    auto e = line.find_last_not_of(" \t\r");
    ids.push_back(line.substr(b, e - b + 1));
  }
  return ids;
}

void write_split(const std::filesystem::path& path, const std::vector<std::string>& ids) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw CorpusError("cannot write split file " + path.string());
  for (const auto& id : ids) out << id << '\n';
  if (!out) throw CorpusError("write failed for " + path.string());
}

std::filesystem::path feature_path(const std::filesystem::path& dir, const std::string& video_id) {
  return dir / (video_id + ".vfrm");
}

Dataset load_dataset(const std::filesystem::path& features_dir, const std::filesystem::path& captions_path,
                     const std::vector<std::string>& video_ids, bool skip_missing) {
  Dataset ds;
  const std::set<std::string> wanted(video_ids.begin(), video_ids.end());

  for (auto& rec : read_caption_file(captions_path)) {
    if (!wanted.contains(rec.video_id)) continue;
    auto& bucket = ds.captions[rec.video_id];
    for (const auto& text : rec.captions) {
      try {
        bucket.push_back(preprocess_caption(text));
      } catch (const RejectedCaption& e) {
        ds.rejected.push_back(rec.video_id + ": " + e.what());
      }
    }
  }

  for (const auto& id : wanted) {
    auto it = ds.captions.find(id);
    if (it == ds.captions.end() || it->second.empty()) {
      if (skip_missing) {
        ds.captions.erase(id);
        ds.missing.push_back(id);
        continue;
      }
      throw CorpusError("no usable captions for video '" + id + "'");
    }
    const auto path = feature_path(features_dir, id);
    if (skip_missing && !std::filesystem::exists(path)) {
      ds.captions.erase(id);
      ds.missing.push_back(id);
      continue;
    }
    try {
      ds.features.emplace(id, sample_frames(read_features(path, id)));
    } catch (const FeatureFileError& e) {
      throw CorpusError("video '" + id + "': " + e.what());
    }
  }
  return ds;
}

}  // namespace recnet::data
