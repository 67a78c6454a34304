#include "forge/text_normalizer.hpp"

#include <optional>

#include "forge/unicode.hpp"

namespace forge {
namespace {

std::optional<char32_t> closer_for(char32_t c) noexcept {
  switch (c) {
    case U'(':
      return U')';
    case U'[':
      return U']';
    default:
      return std::nullopt;
  }
}

// Index of the closer matching the opener at `open`, honouring nesting of both
// bracket kinds. Closers of the wrong kind are treated as text.
std::optional<std::size_t> matching_closer(const std::u32string& s, std::size_t open) {
  std::u32string expected;
  expected.push_back(*closer_for(s[open]));
  for (std::size_t i = open + 1; i < s.size(); ++i) {
    if (const auto c = closer_for(s[i])) {
      expected.push_back(*c);
    } else if (s[i] == expected.back()) {
      expected.pop_back();
      if (expected.empty()) return i;
    }
  }
  return std::nullopt;
}

}  // namespace

NormalizedText normalize_text(std::string_view raw) {
  NormalizedText result;
  const std::u32string composed = unicode::decode_utf8(unicode::to_nfc(raw));

  std::u32string without_spans;
  without_spans.reserve(composed.size());
  for (std::size_t i = 0; i < composed.size(); ++i) {
    if (closer_for(composed[i])) {
      if (const auto close = matching_closer(composed, i)) {
        result.removed_annotations.push_back(
            unicode::encode_utf8(std::u32string_view(composed).substr(i, *close - i + 1)));
        // keep words on either side of the span apart
        without_spans.push_back(U' ');
        i = *close;
        continue;
      }
    }
    without_spans.push_back(composed[i]);
  }

  std::u32string collapsed;
  collapsed.reserve(without_spans.size());
  bool pending_space = false;
  for (char32_t c : without_spans) {
    if (unicode::is_punctuation(c)) continue;
    if (unicode::is_whitespace(c)) {
      pending_space = !collapsed.empty();
      continue;
    }
    if (pending_space) collapsed.push_back(U' ');
    pending_space = false;
    collapsed.push_back(c);
  }

  result.text = unicode::encode_utf8(collapsed);
  // Deleting punctuation can leave a base letter next to a combining mark it
  // composes with.
  if (!unicode::is_nfc(result.text)) result.text = unicode::to_nfc(result.text);
  return result;
}

}  // namespace forge
