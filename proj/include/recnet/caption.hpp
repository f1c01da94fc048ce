#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "recnet/vocabulary.hpp"

namespace recnet::data {

inline constexpr std::size_t kMaxCaptionTokens = 30;

// A caption that is empty once punctuation and whitespace are removed.
class RejectedCaption : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Lowercase, drop Unicode punctuation (general category P*), split on
// whitespace, keep at most kMaxCaptionTokens tokens.
std::vector<std::string> preprocess_caption(std::string_view text);

struct CaptionRecord {
  std::string video_id;
  Sentence tokens;  // no BOS/EOS, size <= kMaxCaptionTokens
};

}  // namespace recnet::data
