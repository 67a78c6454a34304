#include "forge/edit_distance.hpp"

#include <algorithm>
#include <numeric>
#include <vector>

#include "forge/error.hpp"
#include "forge/unicode.hpp"

namespace forge {

std::size_t levenshtein(std::u32string_view a, std::u32string_view b) {
  if (a.size() < b.size()) std::swap(a, b);
  // two rows over the shorter string
  std::vector<std::size_t> prev(b.size() + 1);
  std::vector<std::size_t> cur(b.size() + 1);
  std::iota(prev.begin(), prev.end(), std::size_t{0});
  for (std::size_t i = 1; i <= a.size(); ++i) {
    cur[0] = i;
    for (std::size_t j = 1; j <= b.size(); ++j) {
      const std::size_t substitute = prev[j - 1] + (a[i - 1] == b[j - 1] ? 0 : 1);
      cur[j] = std::min({prev[j] + 1, cur[j - 1] + 1, substitute});
    }
    std::swap(prev, cur);
  }
  return prev[b.size()];
}

std::size_t levenshtein(std::string_view a, std::string_view b) {
  const auto ca = unicode::decode_utf8(unicode::to_nfc(a));
  const auto cb = unicode::decode_utf8(unicode::to_nfc(b));
  return levenshtein(std::u32string_view(ca), std::u32string_view(cb));
}

double char_error_rate(std::string_view reference, std::string_view hypothesis) {
  const auto ref = unicode::decode_utf8(unicode::to_nfc(reference));
  const auto hyp = unicode::decode_utf8(unicode::to_nfc(hypothesis));
  if (ref.empty()) {
    if (hyp.empty()) return 0.0;
    throw EmptyReference("character error rate is undefined for an empty reference");
  }
  return static_cast<double>(levenshtein(std::u32string_view(ref), std::u32string_view(hyp))) /
         static_cast<double>(ref.size());
}

}  // namespace forge
