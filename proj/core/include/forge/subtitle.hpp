#pragma once

#include <chrono>
#include <cstddef>
#include <string>
#include <string_view>
#include <vector>

namespace forge {

// Millisecond timestamps. Subtitle times are non-negative; the SRT clock
// format tops out at 99:59:59,999.
using TimeMs = std::chrono::milliseconds;

inline constexpr TimeMs kMaxSrtTime{359'999'999};

// "HH:MM:SS,mmm" with exactly 2/2/2/3 digits. Throws MalformedTimestamp.
TimeMs parse_timestamp(std::string_view text);
// Inverse of parse_timestamp. Throws TimestampOverflow outside [0, kMaxSrtTime].
std::string format_timestamp(TimeMs t);

struct SubtitleSegment {
  int index = 0;  // cue number as written in the file
  TimeMs start{0};
  TimeMs end{0};
  std::string raw_text;  // cue lines joined by a single space

  friend bool operator==(const SubtitleSegment&, const SubtitleSegment&) = default;
};

struct SubtitleDocument {
  std::string source_id;
  std::vector<SubtitleSegment> segments;  // sorted by start (stable)

  friend bool operator==(const SubtitleDocument&, const SubtitleDocument&) = default;
};

// Why a cue block was skipped or dropped. Parsing never aborts on a single
// bad cue.
struct CueDiagnostic {
  enum class Kind { malformed_index, malformed_timing, missing_timing, empty_text, inverted_timing };

  Kind kind;
  std::size_t line = 0;  // 1-based line where the block starts
  std::string message;
};

struct SrtParseResult {
  SubtitleDocument document;
  std::vector<CueDiagnostic> diagnostics;
};

// Accepts UTF-8 with an optional BOM, LF or CRLF line endings.
// Throws EncodingError for invalid UTF-8 and FatalFormat when the input has
// content but not a single structurally valid cue.
SrtParseResult parse_srt(std::string_view bytes, std::string source_id = {});

// Canonical output: LF endings, no BOM, one blank line between cues.
std::string serialize_srt(const SubtitleDocument& doc);

}  // namespace forge
