#pragma once

#include <cstddef>
#include <string_view>

namespace forge {

// Unit-cost insert/delete/substitute distance over code points.
std::size_t levenshtein(std::u32string_view a, std::u32string_view b);

// Both strings are NFC-composed first and compared by code point.
// Throws EncodingError for invalid UTF-8.
std::size_t levenshtein(std::string_view a, std::string_view b);

// levenshtein(ref, hyp) / len(ref) in code points, spaces included.
// Both empty -> 0. Throws EmptyReference if only the reference is empty.
double char_error_rate(std::string_view reference, std::string_view hypothesis);

}  // namespace forge
