#include <map>
#include <random>

#include "doctest.h"

#include "forge/asr_backend.hpp"
#include "forge/error.hpp"
#include "forge/unicode.hpp"
#include "forge/validation.hpp"
#include "test_support.hpp"

using namespace forge;
using namespace std::chrono_literals;

namespace {

class ThrowingBackend final : public AsrBackend {
 public:
  explicit ThrowingBackend(bool auth) : auth_(auth) {}
  std::string id() const override { return "throwing"; }
  BackendCapabilities capabilities() const override { return {}; }

 protected:
  TranscriptionResult recognize(const AudioBuffer&, std::string_view) override {
    if (auth_) throw AuthError("401 from recognizer");
    throw BackendUnavailable("recognizer down");
  }

 private:
  bool auth_;
};

class LimitedBackend final : public AsrBackend {
 public:
  std::string id() const override { return "limited"; }
  BackendCapabilities capabilities() const override { return {{8000}, 1000ms}; }

 protected:
  TranscriptionResult recognize(const AudioBuffer&, std::string_view) override { return {"x", {}, "", 0}; }
};

struct Fixture {
  AudioBuffer audio;
  SyncMap map;
  std::map<std::string, std::string> table;
};

// n entries of 1 s tone each with 200 ms gaps; `bad` entries get a wrong
// transcript in the table.
Fixture make_fixture(int n, const std::set<int>& bad) {
  Fixture f;
  std::vector<test::Part> parts;
  for (int i = 0; i < n; ++i) {
    parts.push_back({1000, 8000, 200.0 + 50 * i});
    parts.push_back({200, 0});
  }
  f.audio = test::make_signal(parts);
  f.map.source_id = "v";
  f.map.audio_ref = "a.wav";
  for (int i = 0; i < n; ++i) {
    SyncEntry e{i + 1, TimeMs(i * 1200), TimeMs(i * 1200 + 1000), test::synthetic_cue_text("v", i + 1),
                EntryStatus::pending, EntryOrigin::subtitle};
    f.table[audio_fingerprint(slice_ms(f.audio, e.begin, e.end))] =
        bad.count(e.id) ? "전혀 관계없는 엉뚱한 인식 결과 xyz" : e.text;
    f.map.entries.push_back(std::move(e));
  }
  return f;
}

ValidationPolicy pinned(double threshold = 0.25) {
  ValidationPolicy p;
  p.cer_threshold = threshold;
  p.min_duration = 500ms;
  p.max_duration = 30000ms;
  p.language_code = "ko-KR";
  return p;
}

}  // namespace

TEST_CASE("audio_fingerprint is SHA-256 of little-endian PCM") {
  CHECK(audio_fingerprint(AudioBuffer(16000, {})) ==
        "e3b0c44298fc1c149afbf4c8996fb92427ae41e4649b934ca495991b7852b855");
  CHECK(audio_fingerprint(AudioBuffer(16000, {1, -2, 258})) ==
        "aa6ddc9bef9de0ef52ce99f8409f6eb4e040876efe37057d1e64179d83b956c7");
}

TEST_CASE("mock backend") {
  const AudioBuffer a(16000, std::vector<std::int16_t>(1600, 5));
  MockBackend mock({{audio_fingerprint(a), "안녕하세요"}});
  CHECK(transcribe(mock, a, "ko-KR").hypothesis == "안녕하세요");
  CHECK(transcribe(mock, AudioBuffer(16000, {1}), "ko-KR").hypothesis.empty());
  CHECK(mock.call_count() == 2);
  CHECK(transcribe(mock, a, "ko-KR").backend_id == "mock");

  const std::string json = serialize_mock_table({{"abc", "x"}, {"def", "y"}});
  MockBackend loaded = MockBackend::from_json(json);
  CHECK(loaded.call_count() == 0);
  CHECK_THROWS_AS(MockBackend::from_json("[1,2]"), SchemaError);
  CHECK_THROWS_AS(MockBackend::from_json("{\"k\": 3}"), SchemaError);
  CHECK_THROWS_AS(MockBackend::from_file("/nonexistent/table.json"), IoError);
}

TEST_CASE("transcribe checks capabilities") {
  LimitedBackend limited;
  CHECK_THROWS_AS(transcribe(limited, AudioBuffer(16000, std::vector<std::int16_t>(10)), "ko-KR"),
                  std::invalid_argument);
  CHECK_THROWS_AS(transcribe(limited, AudioBuffer(8000, std::vector<std::int16_t>(8001)), "ko-KR"), PayloadTooLarge);
  CHECK(transcribe(limited, AudioBuffer(8000, std::vector<std::int16_t>(8000)), "ko-KR").hypothesis == "x");
}

TEST_CASE("policy check") {
  CHECK_NOTHROW(pinned().check());
  auto p = pinned(1.5);
  CHECK_THROWS_AS(p.check(), std::invalid_argument);
  p = pinned();
  p.min_duration = p.max_duration;
  CHECK_THROWS_AS(p.check(), std::invalid_argument);
}

TEST_CASE("validate_segment") {
  Fixture f = make_fixture(2, {});
  MockBackend mock(f.table);
  const auto slice = [&](const SyncEntry& e) { return slice_ms(f.audio, e.begin, e.end); };

  SUBCASE("duration gates skip the backend") {
    SyncEntry shorty{9, 0ms, 300ms, "짧은 말", EntryStatus::pending, EntryOrigin::subtitle};
    const auto r = validate_segment(shorty, slice(shorty), mock, pinned());
    CHECK(r.reason == ValidationReason::too_short);
    CHECK_FALSE(r.accepted);
    CHECK_FALSE(r.cer.has_value());
    auto policy = pinned();
    policy.max_duration = 900ms;
    const auto long_r = validate_segment(f.map.entries[0], slice(f.map.entries[0]), mock, policy);
    CHECK(long_r.reason == ValidationReason::too_long);
    CHECK(mock.call_count() == 0);
  }
  SUBCASE("exact match") {
    const auto r = validate_segment(f.map.entries[0], slice(f.map.entries[0]), mock, pinned());
    CHECK(r.accepted);
    CHECK(r.reason == ValidationReason::ok);
    REQUIRE(r.cer.has_value());
    CHECK(*r.cer == 0.0);
    CHECK(mock.call_count() == 1);
  }
  SUBCASE("punctuation in the hypothesis is not an error") {
    SyncEntry e = f.map.entries[0];
    e.text = "예술가가 되자 지금 당장 입니다";
    MockBackend m({{audio_fingerprint(slice(e)), "예술가가 되자. 지금 당장! 입니다."}});
    const auto r = validate_segment(e, slice(e), m, pinned());
    CHECK(r.accepted);
    CHECK(r.hypothesis == "예술가가 되자 지금 당장 입니다");
  }
  SUBCASE("empty reference") {
    SyncEntry e = f.map.entries[0];
    e.text = "(박수)";
    const auto r = validate_segment(e, slice(e), mock, pinned());
    CHECK(r.reason == ValidationReason::empty_reference);
    CHECK(mock.call_count() == 0);
  }
  SUBCASE("unknown audio gives an empty hypothesis, CER 1") {
    MockBackend empty({});
    const auto r = validate_segment(f.map.entries[0], slice(f.map.entries[0]), empty, pinned());
    CHECK_FALSE(r.accepted);
    CHECK(r.reason == ValidationReason::cer_exceeded);
    CHECK(*r.cer == doctest::Approx(1.0));
  }
  SUBCASE("backend failures") {
    ThrowingBackend down(false);
    const auto r = validate_segment(f.map.entries[0], slice(f.map.entries[0]), down, pinned());
    CHECK(r.reason == ValidationReason::backend_error);
    CHECK(r.detail.find("recognizer down") != std::string::npos);
    ThrowingBackend auth(true);
    CHECK_THROWS_AS(validate_segment(f.map.entries[0], slice(f.map.entries[0]), auth, pinned()), AuthError);
  }
  SUBCASE("only pending entries") {
    SyncEntry e = f.map.entries[0];
    e.status = EntryStatus::rejected;
    CHECK_THROWS_AS(validate_segment(e, slice(e), mock, pinned()), std::invalid_argument);
  }
}

TEST_CASE("validate_map") {
  SUBCASE("10 entries with 3 corrupted hypotheses -> 7 accepted") {
    Fixture f = make_fixture(10, {2, 5, 9});
    MockBackend mock(f.table);
    const auto out = validate_map(f.map, f.audio, mock, pinned(), 4);
    REQUIRE(out.records.size() == 10);
    int accepted = 0;
    for (std::size_t i = 0; i < 10; ++i) {
      CHECK(out.records[i].entry_id == f.map.entries[i].id);
      const bool bad = out.records[i].entry_id == 2 || out.records[i].entry_id == 5 || out.records[i].entry_id == 9;
      CHECK(out.records[i].accepted == !bad);
      CHECK(out.map.entries[i].status == (bad ? EntryStatus::rejected : EntryStatus::accepted));
      accepted += out.records[i].accepted;
    }
    CHECK(accepted == 7);
  }
  SUBCASE("empty map") {
    MockBackend mock({});
    const SyncMap empty{"e", "a.wav", {}};
    CHECK(validate_map(empty, AudioBuffer(16000, {}), mock, pinned()).records.empty());
  }
  SUBCASE("only pending entries are checked; manual rejections stay") {
    Fixture f = make_fixture(6, {});
    f.map.entries[1].status = EntryStatus::rejected;
    f.map.entries[4].status = EntryStatus::accepted;
    MockBackend mock(f.table);
    const auto out = validate_map(f.map, f.audio, mock, pinned(), 3);
    CHECK(out.records.size() == 4);
    CHECK(out.map.entries[1].status == EntryStatus::rejected);
    CHECK(out.map.entries[4].status == EntryStatus::accepted);
    CHECK(mock.call_count() == 4);
  }
  SUBCASE("parallelism does not change the result") {
    std::mt19937_64 rng(61);
    for (int round = 0; round < 5; ++round) {
      std::set<int> bad;
      for (int i = 1; i <= 16; ++i) {
        if (rng() % 3 == 0) bad.insert(i);
      }
      Fixture f = make_fixture(16, bad);
      for (auto& e : f.map.entries) {
        if (rng() % 5 == 0) e.status = EntryStatus::rejected;
      }
      MockBackend a(f.table);
      MockBackend b(f.table);
      const auto serial = validate_map(f.map, f.audio, a, pinned(), 1);
      const auto parallel = validate_map(f.map, f.audio, b, pinned(), 8);
      REQUIRE(serial.records == parallel.records);
      REQUIRE(serial.map == parallel.map);
      std::size_t pending = 0;
      for (const auto& e : f.map.entries) pending += e.status == EntryStatus::pending;
      REQUIRE(serial.records.size() == pending);
    }
  }
  SUBCASE("a lower threshold never accepts more") {
    Fixture f = make_fixture(10, {3});
    // Partially wrong transcripts give a spread of CER values.
    int k = 0;
    for (auto& [key, text] : f.table) {
      if (k++ % 2 == 0) {
        const std::u32string cps = unicode::decode_utf8(text);
        text = unicode::encode_utf8(cps.substr(0, cps.size() * (k % 5 + 3) / 8));
      }
    }
    MockBackend mock(f.table);
    std::vector<bool> previous(10, true);
    for (double threshold : {1.0, 0.75, 0.5, 0.25, 0.1, 0.0}) {
      const auto out = validate_map(f.map, f.audio, mock, pinned(threshold), 2);
      for (std::size_t i = 0; i < out.records.size(); ++i) {
        if (!previous[i]) REQUIRE_FALSE(out.records[i].accepted);
        previous[i] = out.records[i].accepted;
      }
    }
  }
  SUBCASE("AuthError aborts the run") {
    Fixture f = make_fixture(5, {});
    ThrowingBackend auth(true);
    CHECK_THROWS_AS(validate_map(f.map, f.audio, auth, pinned(), 3), AuthError);
  }
}

TEST_CASE("validation records JSON round trip") {
  std::vector<ValidationRecord> records{
      {1, "가나다", 0.0, true, ValidationReason::ok, ""},
      {2, "", std::nullopt, false, ValidationReason::too_short, ""},
      {3, "", std::nullopt, false, ValidationReason::backend_error, "503 twice"},
      {4, "abc", 0.6666666666666666, false, ValidationReason::cer_exceeded, ""},
  };
  const std::string json = save_validation_records("src", records);
  CHECK(load_validation_records(json) == records);
  for (auto r : {ValidationReason::ok, ValidationReason::cer_exceeded, ValidationReason::too_short,
                 ValidationReason::too_long, ValidationReason::empty_reference, ValidationReason::backend_error}) {
    CHECK(parse_reason(to_string(r)) == r);
  }
  CHECK_THROWS_AS(load_validation_records("{}"), SchemaError);
}
