#include <random>

#include "doctest.h"

#include "forge/error.hpp"
#include "forge/subtitle.hpp"
#include "test_support.hpp"

using namespace forge;
using namespace std::chrono_literals;

TEST_CASE("parse_timestamp") {
  CHECK(parse_timestamp("00:00:15,761") == 15761ms);
  CHECK(parse_timestamp("00:00:00,000") == 0ms);
  CHECK(parse_timestamp("01:02:03,004") == 3723004ms);
  CHECK(parse_timestamp("99:59:59,999") == TimeMs(kMaxSrtTime));

  for (const char* bad : {"", "0:00:15,761", "00:00:15.761", "00:60:00,000", "00:00:60,000", "00:00:15,76",
                          "00:00:15,7611", "aa:00:15,761", " 00:00:15,761", "-0:00:15,761"}) {
    CAPTURE(bad);
    CHECK_THROWS_AS(parse_timestamp(bad), MalformedTimestamp);
  }
}

TEST_CASE("format_timestamp") {
  CHECK(format_timestamp(20337ms) == "00:00:20,337");
  CHECK(format_timestamp(0ms) == "00:00:00,000");
  CHECK(format_timestamp(3723004ms) == "01:02:03,004");
  CHECK_THROWS_AS(format_timestamp(-1ms), TimestampOverflow);
  CHECK_THROWS_AS(format_timestamp(kMaxSrtTime + TimeMs(1)), TimestampOverflow);
}

TEST_CASE("timestamp bijection on 1e5 random values") {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<std::int64_t> dist(0, kMaxSrtTime.count());
  for (int i = 0; i < 100'000; ++i) {
    const TimeMs t(dist(rng));
    REQUIRE(parse_timestamp(format_timestamp(t)) == t);
  }
}

TEST_CASE("parse_srt on the two-cue sample") {
  const auto result = parse_srt(test::kSampleSrt, "sample");
  CHECK(result.diagnostics.empty());
  const auto& segs = result.document.segments;
  REQUIRE(segs.size() == 2);
  CHECK(segs[0] == SubtitleSegment{1, 15761ms, 17129ms, "오늘 제가 얘기할 주제는요"});
  CHECK(segs[1] == SubtitleSegment{2, 17129ms, 20337ms, "예술가가 되자. 지금 당장! 입니다."});
  CHECK(result.document.source_id == "sample");
}

TEST_CASE("parse_srt input variants") {
  SUBCASE("empty input") {
    CHECK(parse_srt("").document.segments.empty());
    CHECK(parse_srt("\n\n  \n").document.segments.empty());
  }
  SUBCASE("CRLF and BOM") {
    std::string crlf = "\xEF\xBB\xBF";
    for (char c : std::string(test::kSampleSrt)) {
      if (c == '\n') crlf += '\r';
      crlf += c;
    }
    CHECK(parse_srt(crlf).document == parse_srt(test::kSampleSrt).document);
  }
  SUBCASE("leading blank lines and extra blank lines between cues") {
    const auto doc = parse_srt("\n\n1\n00:00:01,000 --> 00:00:02,000\na\n\n\n\n2\n00:00:02,000 --> 00:00:03,000\nb\n");
    CHECK(doc.document.segments.size() == 2);
  }
  SUBCASE("multi-line text joins with one space, lines trimmed") {
    const auto doc = parse_srt("1\n00:00:01,000 --> 00:00:02,000\n  첫 줄  \n둘째 줄\n");
    REQUIRE(doc.document.segments.size() == 1);
    CHECK(doc.document.segments[0].raw_text == "첫 줄 둘째 줄");
  }
  SUBCASE("position hints after the end timestamp are ignored") {
    const auto doc = parse_srt("1\n00:00:01,000 --> 00:00:02,000 X1:10 X2:20\na\n");
    REQUIRE(doc.document.segments.size() == 1);
    CHECK(doc.document.segments[0].end == 2000ms);
  }
  SUBCASE("segments sorted by start, stable on ties") {
    const auto doc = parse_srt(
        "1\n00:00:05,000 --> 00:00:06,000\nlate\n\n"
        "2\n00:00:01,000 --> 00:00:02,000\nfirst\n\n"
        "3\n00:00:01,000 --> 00:00:03,000\nsecond\n");
    const auto& s = doc.document.segments;
    REQUIRE(s.size() == 3);
    CHECK(s[0].raw_text == "first");
    CHECK(s[1].raw_text == "second");
    CHECK(s[2].index == 1);
  }
}

TEST_CASE("parse_srt skips bad cues with diagnostics") {
  const std::string input =
      "x\n00:00:01,000 --> 00:00:02,000\nbad index\n\n"
      "2\n00:00:01,000 -> 00:00:02,000\nbad arrow\n\n"
      "3\n00:00:03,000 --> 00:00:04,000\n\n"
      "4\n00:00:05,000 --> 00:00:04,000\ninverted\n\n"
      "5\n00:00:06,000 --> 00:00:07,000\nkept\n\n"
      "6\n";
  const auto result = parse_srt(input);
  REQUIRE(result.document.segments.size() == 1);
  CHECK(result.document.segments[0].index == 5);

  std::vector<CueDiagnostic::Kind> kinds;
  for (const auto& d : result.diagnostics) kinds.push_back(d.kind);
  CHECK(kinds == std::vector<CueDiagnostic::Kind>{
                     CueDiagnostic::Kind::malformed_index, CueDiagnostic::Kind::malformed_timing,
                     CueDiagnostic::Kind::empty_text, CueDiagnostic::Kind::inverted_timing,
                     CueDiagnostic::Kind::missing_timing});
  CHECK(result.diagnostics[0].line == 1);
}

TEST_CASE("parse_srt fatal and encoding errors") {
  CHECK_THROWS_AS(parse_srt("this is not a subtitle file\nat all\n"), FatalFormat);
  CHECK_THROWS_AS(parse_srt("1\n00:00:01,000 --> 00:00:02,000\n\xC3\x28\n"), EncodingError);
}

TEST_CASE("serialize_srt") {
  SubtitleDocument one{"", {{1, 0ms, 1000ms, "a"}}};
  CHECK(serialize_srt(one) == "1\n00:00:00,000 --> 00:00:01,000\na\n");
  const std::string sample = serialize_srt(parse_srt(test::kSampleSrt).document);
  CHECK(sample.find("00:00:17,129 --> 00:00:20,337") != std::string::npos);
  CHECK(sample == test::kSampleSrt);
}

TEST_CASE("parse(serialize(d)) == d on random documents") {
  std::mt19937_64 rng(11);
  for (int i = 0; i < 500; ++i) {
    SubtitleDocument doc = test::random_document(rng);
    doc.source_id = "r";
    const std::string text = serialize_srt(doc);
    if (doc.segments.empty()) {
      CHECK(text.empty());
      continue;
    }
    const auto parsed = parse_srt(text, "r");
    REQUIRE(parsed.diagnostics.empty());
    REQUIRE(parsed.document == doc);
    REQUIRE(serialize_srt(parsed.document) == text);
  }
}

TEST_CASE("parsed documents are sorted with start < end") {
  std::mt19937_64 rng(12);
  for (int i = 0; i < 200; ++i) {
    SubtitleDocument doc = test::random_document(rng);
    std::shuffle(doc.segments.begin(), doc.segments.end(), rng);
    if (doc.segments.empty()) continue;
    const auto parsed = parse_srt(serialize_srt(doc));
    const auto& s = parsed.document.segments;
    for (std::size_t k = 0; k < s.size(); ++k) {
      CHECK(s[k].start < s[k].end);
      if (k > 0) CHECK(s[k - 1].start <= s[k].start);
    }
  }
}

TEST_CASE("parse_srt never fails outside its error contract on random bytes") {
  std::mt19937_64 rng(13);
  const std::string alphabet = "0123456789:,-> \n\r\nabc\xEA\xB0\x80";
  for (int i = 0; i < 3000; ++i) {
    std::string bytes;
    const std::size_t n = rng() % 200;
    const bool arbitrary = i % 3 == 0;
    for (std::size_t k = 0; k < n; ++k) {
      bytes.push_back(arbitrary ? static_cast<char>(rng() & 0xFF) : alphabet[rng() % alphabet.size()]);
    }
    // Mutations of a valid file exercise the cue-level paths.
    if (i % 3 == 1) {
      bytes = test::kSampleSrt;
      for (int m = 0; m < 4; ++m) bytes[rng() % bytes.size()] = alphabet[rng() % alphabet.size()];
    }
    try {
      const auto r = parse_srt(bytes);
      for (const auto& s : r.document.segments) CHECK(s.start < s.end);
    } catch (const EncodingError&) {
    } catch (const FatalFormat&) {
    }
  }
}
