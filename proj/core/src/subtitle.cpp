#include "forge/subtitle.hpp"

#include <algorithm>
#include <charconv>
#include <cstdio>
#include <span>

#include "forge/error.hpp"
#include "forge/unicode.hpp"

namespace forge {
namespace {

constexpr std::string_view kBom = "\xEF\xBB\xBF";

bool is_digit(char c) noexcept { return c >= '0' && c <= '9'; }
bool is_blank(char c) noexcept { return c == ' ' || c == '\t'; }

std::string_view trim(std::string_view s) noexcept {
  while (!s.empty() && is_blank(s.front())) s.remove_prefix(1);
  while (!s.empty() && is_blank(s.back())) s.remove_suffix(1);
  return s;
}

int two_digits(std::string_view s, std::size_t at) noexcept {
  return (s[at] - '0') * 10 + (s[at + 1] - '0');
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

bool parse_index(std::string_view line, int& out) noexcept {
  line = trim(line);
  if (line.empty() || !std::all_of(line.begin(), line.end(), is_digit)) return false;
  const auto [ptr, ec] = std::from_chars(line.data(), line.data() + line.size(), out);
  return ec == std::errc() && ptr == line.data() + line.size() && out > 0;
}

// "start --> end"; anything after the end timestamp (position hints written by
// some tools) is ignored.
bool parse_timing(std::string_view line, TimeMs& start, TimeMs& end) {
  const std::size_t arrow = line.find("-->");
  if (arrow == std::string_view::npos) return false;
  std::string_view lhs = trim(line.substr(0, arrow));
  std::string_view rhs = trim(line.substr(arrow + 3));
  const std::size_t sp = rhs.find_first_of(" \t");
  if (sp != std::string_view::npos) rhs = rhs.substr(0, sp);
  try {
    start = parse_timestamp(lhs);
    end = parse_timestamp(rhs);
  } catch (const MalformedTimestamp&) {
    return false;
  }
  return true;
}

}  // namespace

TimeMs parse_timestamp(std::string_view s) {
  auto fail = [&](const char* why) {
    return MalformedTimestamp("bad timestamp '" + std::string(s) + "': " + why);
  };
  if (s.size() != 12) throw fail("expected HH:MM:SS,mmm");
  if (s[2] != ':' || s[5] != ':' || s[8] != ',') throw fail("expected HH:MM:SS,mmm");
  for (std::size_t i : {0, 1, 3, 4, 6, 7, 9, 10, 11}) {
    if (!is_digit(s[i])) throw fail("non-digit character");
  }
  const int hh = two_digits(s, 0);
  const int mm = two_digits(s, 3);
  const int ss = two_digits(s, 6);
  const int ms = (s[9] - '0') * 100 + two_digits(s, 10);
  if (mm >= 60) throw fail("minutes out of range");
  if (ss >= 60) throw fail("seconds out of range");
  return TimeMs{std::int64_t{hh} * 3'600'000 + mm * 60'000 + ss * 1'000 + ms};
}

std::string format_timestamp(TimeMs t) {
  const std::int64_t v = t.count();
  if (v < 0 || v > kMaxSrtTime.count()) {
    throw TimestampOverflow("timestamp " + std::to_string(v) + " ms outside SRT range");
  }
  char buf[16];
  std::snprintf(buf, sizeof buf, "%02d:%02d:%02d,%03d", static_cast<int>(v / 3'600'000),
                static_cast<int>(v / 60'000 % 60), static_cast<int>(v / 1'000 % 60),
                static_cast<int>(v % 1'000));
  return buf;
}

SrtParseResult parse_srt(std::string_view bytes, std::string source_id) {
  if (bytes.starts_with(kBom)) bytes.remove_prefix(kBom.size());
  if (!unicode::is_valid_utf8(bytes)) {
    // decode_utf8 reports the offending offset
    (void)unicode::decode_utf8(bytes);
  }

  SrtParseResult result;
  result.document.source_id = std::move(source_id);

  const auto lines = split_lines(bytes);
  bool has_content = false;
  std::size_t structural_cues = 0;

  std::size_t i = 0;
  while (i < lines.size()) {
    if (trim(lines[i]).empty()) {
      ++i;
      continue;
    }
    has_content = true;
    const std::size_t first = i;
    while (i < lines.size() && !trim(lines[i]).empty()) ++i;
    const std::span block(lines.begin() + static_cast<std::ptrdiff_t>(first),
                          lines.begin() + static_cast<std::ptrdiff_t>(i));
    const std::size_t line_no = first + 1;

    int index = 0;
    if (!parse_index(block[0], index)) {
      result.diagnostics.push_back({CueDiagnostic::Kind::malformed_index, line_no,
                                    "cue index is not a positive integer"});
      continue;
    }
    if (block.size() < 2) {
      result.diagnostics.push_back({CueDiagnostic::Kind::missing_timing, line_no,
                                    "cue " + std::to_string(index) + " has no timing line"});
      continue;
    }
    SubtitleSegment seg;
    seg.index = index;
    if (!parse_timing(block[1], seg.start, seg.end)) {
      result.diagnostics.push_back({CueDiagnostic::Kind::malformed_timing, line_no + 1,
                                    "cue " + std::to_string(index) + " has a malformed timing line"});
      continue;
    }
    ++structural_cues;

    for (std::size_t k = 2; k < block.size(); ++k) {
      const std::string_view text = trim(block[k]);
      if (!seg.raw_text.empty()) seg.raw_text.push_back(' ');
      seg.raw_text.append(text);
    }
    if (seg.raw_text.empty()) {
      result.diagnostics.push_back({CueDiagnostic::Kind::empty_text, line_no,
                                    "cue " + std::to_string(index) + " has no text"});
      continue;
    }
    if (seg.start >= seg.end) {
      result.diagnostics.push_back({CueDiagnostic::Kind::inverted_timing, line_no + 1,
                                    "cue " + std::to_string(index) + " starts at or after its end"});
      continue;
    }
    result.document.segments.push_back(std::move(seg));
  }

  if (has_content && structural_cues == 0) {
    throw FatalFormat("no parsable SubRip cue in input");
  }
  std::stable_sort(result.document.segments.begin(), result.document.segments.end(),
                   [](const SubtitleSegment& a, const SubtitleSegment& b) { return a.start < b.start; });
  return result;
}

std::string serialize_srt(const SubtitleDocument& doc) {
  std::string out;
  bool first = true;
  for (const auto& seg : doc.segments) {
    if (!first) out.push_back('\n');
    first = false;
    out += std::to_string(seg.index);
    out.push_back('\n');
    out += format_timestamp(seg.start);
    out += " --> ";
    out += format_timestamp(seg.end);
    out.push_back('\n');
    out += seg.raw_text;
    out.push_back('\n');
  }
  return out;
}

}  // namespace forge
