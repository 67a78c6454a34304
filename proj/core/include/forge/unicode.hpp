#pragma once

#include <string>
#include <string_view>

namespace forge::unicode {

// Strict UTF-8 validation: rejects overlong forms, surrogates and code
// points above U+10FFFF.
bool is_valid_utf8(std::string_view bytes) noexcept;

// Throws EncodingError on invalid input.
std::u32string decode_utf8(std::string_view bytes);
std::string encode_utf8(std::u32string_view code_points);

// Canonical composition (NFC). Input must be valid UTF-8.
std::string to_nfc(std::string_view utf8);
bool is_nfc(std::string_view utf8);

// General categories Pc, Pd, Ps, Pe, Pi, Pf, Po.
bool is_punctuation(char32_t c) noexcept;
// Unicode White_Space property.
bool is_whitespace(char32_t c) noexcept;

}  // namespace forge::unicode
