#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace forge {

struct NormalizedText {
  std::string text;
  std::vector<std::string> removed_annotations;  // e.g. "(박수)", "[laughter]"

  friend bool operator==(const NormalizedText&, const NormalizedText&) = default;
};

/// Turns subtitle text into a transcript label:
///   1. canonical composition (NFC);
///   2. drop `(...)` and `[...]` spans (non-speech annotations). A span is
///      taken from an opener to its matching closer, so nested spans go with
///      their outermost bracket; unmatched brackets stay as plain characters;
///   3. drop every character in general categories Pc Pd Ps Pe Pi Pf Po;
///   4. collapse whitespace runs to one space and trim.
/// Numerals are left as written. The result may be empty.
///
/// Throws EncodingError if raw is not valid UTF-8.
NormalizedText normalize_text(std::string_view raw);

}  // namespace forge
