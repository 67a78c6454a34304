#pragma once

#include <atomic>
#include <chrono>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/audio.hpp"

namespace forge {

struct BackendCapabilities {
  std::vector<int> sample_rates;  // empty: any rate
  TimeMs max_duration{0};         // 0: unlimited
};

struct TranscriptionResult {
  std::string hypothesis;  // empty when nothing was recognized
  std::optional<double> confidence;
  std::string backend_id;
  std::int64_t latency_ms = 0;
};

// A speech-to-text service. Implementations must be callable from several
// threads at once.
class AsrBackend {
 public:
  virtual ~AsrBackend() = default;
  virtual std::string id() const = 0;
  virtual BackendCapabilities capabilities() const = 0;

 protected:
  friend TranscriptionResult transcribe(AsrBackend& backend, const AudioBuffer& audio, std::string_view language_code);
  virtual TranscriptionResult recognize(const AudioBuffer& audio, std::string_view language_code) = 0;
};

// Checks the audio against the backend's capabilities (PayloadTooLarge when
// too long, std::invalid_argument for an unsupported rate), then calls it and
// stamps backend_id and latency.
// Throws BackendUnavailable, AuthError, PayloadTooLarge.
TranscriptionResult transcribe(AsrBackend& backend, const AudioBuffer& audio, std::string_view language_code);

// Lowercase hex SHA-256 of the little-endian PCM bytes.
std::string audio_fingerprint(const AudioBuffer& audio);

// Deterministic table-driven backend: fingerprint -> transcript. Unknown
// fingerprints transcribe to the empty string.
class MockBackend final : public AsrBackend {
 public:
  explicit MockBackend(std::map<std::string, std::string> table);
  MockBackend(MockBackend&& other) noexcept : table_(std::move(other.table_)), calls_(other.calls_.load()) {}
  // JSON object {"<fingerprint>": "<transcript>", ...}. Throws SchemaError/IoError.
  static MockBackend from_file(const std::filesystem::path& path);
  static MockBackend from_json(std::string_view json);

  std::string id() const override { return "mock"; }
  BackendCapabilities capabilities() const override { return {}; }
  std::size_t call_count() const noexcept { return calls_.load(); }

 protected:
  TranscriptionResult recognize(const AudioBuffer& audio, std::string_view language_code) override;

 private:
  std::map<std::string, std::string> table_;
  std::atomic<std::size_t> calls_{0};
};

std::string serialize_mock_table(const std::map<std::string, std::string>& table);

// Exponential backoff between attempts: base, base*factor, ...
struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base{1000};
  double factor = 2.0;

  std::chrono::milliseconds delay_before(int attempt) const;  // attempt >= 2
};

enum class HttpDisposition { ok, retry, auth, too_large, fail };
HttpDisposition classify_http_status(int status) noexcept;

// {"config":{"encoding":"LINEAR16","sampleRateHertz":R,"languageCode":L},"audio":{"content":"<base64>"}}
std::string build_recognize_request(const AudioBuffer& audio, std::string_view language_code);
// Reads results[0].alternatives[0].{transcript,confidence}; no results means
// no speech. Throws BackendUnavailable on a malformed body.
TranscriptionResult parse_recognize_response(std::string_view body);

// Cloud-style recognizer reached over HTTP(S) with a JSON body.
class HttpBackend final : public AsrBackend {
 public:
  using Sleeper = std::function<void(std::chrono::milliseconds)>;

  struct Options {
    std::string url;          // e.g. https://speech.googleapis.com/v1/speech:recognize
    std::string api_key_env;  // environment variable holding the key; empty: none
    RetryPolicy retry;
    std::chrono::seconds timeout{60};
    TimeMs max_duration{60'000};
    Sleeper sleep;  // defaults to std::this_thread::sleep_for
  };

  explicit HttpBackend(Options options);

  std::string id() const override { return "http"; }
  BackendCapabilities capabilities() const override;

 protected:
  TranscriptionResult recognize(const AudioBuffer& audio, std::string_view language_code) override;

 private:
  Options options_;
  std::string base_;  // scheme://host[:port]
  std::string path_;
};

}  // namespace forge
