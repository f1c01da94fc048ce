#include "recnet/caption.hpp"

#include <unicode/uchar.h>
#include <unicode/utf8.h>

namespace recnet::data {

std::vector<std::string> preprocess_caption(std::string_view text) {
  std::vector<std::string> tokens;
  std::string current;
  auto flush = [&] {
    if (!current.empty()) tokens.push_back(std::move(current));
    current.clear();
  };

  const auto* bytes = reinterpret_cast<const uint8_t*>(text.data());
  const auto length = static_cast<int32_t>(text.size());
  int32_t i = 0;
  while (i < length) {
    UChar32 c;
    U8_NEXT(bytes, i, length, c);
    if (c < 0) continue;  // ill-formed sequence
    if (u_isUWhiteSpace(c)) {
      flush();
      continue;
    }
    if (u_ispunct(c)) continue;
    c = u_tolower(c);
    char buf[U8_MAX_LENGTH];
    int32_t n = 0;
    UBool error = false;
    U8_APPEND(reinterpret_cast<uint8_t*>(buf), n, U8_MAX_LENGTH, c, error);
    if (!error) current.append(buf, static_cast<std::size_t>(n));
  }
  flush();

  if (tokens.empty()) throw RejectedCaption("caption is empty after cleaning: \"" + std::string(text) + "\"");
  if (tokens.size() > kMaxCaptionTokens) tokens.resize(kMaxCaptionTokens);
  return tokens;
}

}  // namespace recnet::data
