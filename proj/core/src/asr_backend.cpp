#include "forge/asr_backend.hpp"

#include <cmath>
#include <cstdlib>
#include <thread>

#include <openssl/evp.h>

#include "httplib.h"
#include "json.hpp"

#include "forge/error.hpp"
#include "forge/file_io.hpp"

namespace forge {
namespace {

using json = nlohmann::json;

std::string pcm_bytes(const AudioBuffer& audio) {
  std::string bytes;
  bytes.reserve(audio.size() * 2);
  for (std::int16_t s : audio.samples()) {
    const auto u = static_cast<std::uint16_t>(s);
    bytes.push_back(static_cast<char>(u & 0xFF));
    bytes.push_back(static_cast<char>(u >> 8));
  }
  return bytes;
}

std::string base64(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()), static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

}  // namespace

TranscriptionResult transcribe(AsrBackend& backend, const AudioBuffer& audio, std::string_view language_code) {
  const BackendCapabilities caps = backend.capabilities();
  if (!caps.sample_rates.empty() &&
      std::find(caps.sample_rates.begin(), caps.sample_rates.end(), audio.sample_rate_hz()) == caps.sample_rates.end()) {
    throw std::invalid_argument("backend " + backend.id() + " does not accept " +
                                std::to_string(audio.sample_rate_hz()) + " Hz audio");
  }
  // Compared in samples: duration() floors, which would let a partial
  // millisecond past the limit through.
  if (caps.max_duration.count() > 0 && static_cast<std::int64_t>(audio.size()) * 1000 >
                                           caps.max_duration.count() * audio.sample_rate_hz()) {
    throw PayloadTooLarge("segment of " + std::to_string(audio.duration().count()) + " ms exceeds backend limit of " +
                          std::to_string(caps.max_duration.count()) + " ms");
  }
  const auto t0 = std::chrono::steady_clock::now();
  TranscriptionResult result = backend.recognize(audio, language_code);
  result.backend_id = backend.id();
  result.latency_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  return result;
}

std::string audio_fingerprint(const AudioBuffer& audio) {
  const std::string bytes = pcm_bytes(audio);
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(bytes.data(), bytes.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string hex;
  hex.reserve(2 * len);
  for (unsigned int i = 0; i < len; ++i) {
    hex.push_back(kHex[digest[i] >> 4]);
    hex.push_back(kHex[digest[i] & 0x0F]);
  }
  return hex;
}

MockBackend::MockBackend(std::map<std::string, std::string> table) : table_(std::move(table)) {}

MockBackend MockBackend::from_json(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  if (!doc.is_object()) throw SchemaError("/", "mock table must be a JSON object");
  std::map<std::string, std::string> table;
  for (const auto& [key, value] : doc.items()) {
    if (!value.is_string()) throw SchemaError("/" + key, "transcript must be a string");
    table.emplace(key, value.get<std::string>());
  }
  return MockBackend(std::move(table));
}

MockBackend MockBackend::from_file(const std::filesystem::path& path) { return from_json(read_file(path)); }

TranscriptionResult MockBackend::recognize(const AudioBuffer& audio, std::string_view) {
  calls_.fetch_add(1);
  TranscriptionResult r;
  if (const auto it = table_.find(audio_fingerprint(audio)); it != table_.end()) {
    r.hypothesis = it->second;
    r.confidence = 1.0;
  }
  return r;
}

std::string serialize_mock_table(const std::map<std::string, std::string>& table) {
  json doc = json::object();
  for (const auto& [k, v] : table) doc[k] = v;
  return doc.dump(2) + "\n";
}

std::chrono::milliseconds RetryPolicy::delay_before(int attempt) const {
  const double scale = std::pow(factor, std::max(0, attempt - 2));
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(static_cast<double>(base.count()) * scale)));
}

HttpDisposition classify_http_status(int status) noexcept {
  if (status >= 200 && status < 300) return HttpDisposition::ok;
  if (status == 401 || status == 403) return HttpDisposition::auth;
  if (status == 413) return HttpDisposition::too_large;
  if (status == 408 || status == 429 || status >= 500) return HttpDisposition::retry;
  return HttpDisposition::fail;
}

std::string build_recognize_request(const AudioBuffer& audio, std::string_view language_code) {
  nlohmann::ordered_json req;
  req["config"]["encoding"] = "LINEAR16";
  req["config"]["sampleRateHertz"] = audio.sample_rate_hz();
  req["config"]["languageCode"] = std::string(language_code);
  req["audio"]["content"] = base64(pcm_bytes(audio));
  return req.dump();
}

TranscriptionResult parse_recognize_response(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error& e) {
    throw BackendUnavailable(std::string("unparsable recognizer response: ") + e.what());
  }
  TranscriptionResult r;
  if (!doc.is_object()) throw BackendUnavailable("recognizer response is not a JSON object");
  const auto results = doc.find("results");
  if (results == doc.end() || results->empty()) return r;
  if (!results->is_array() || !(*results)[0].is_object()) throw BackendUnavailable("malformed results array");
  const auto& first = (*results)[0];
  const auto alts = first.find("alternatives");
  if (alts == first.end() || !alts->is_array() || alts->empty()) return r;
  const auto& best = (*alts)[0];
  if (const auto t = best.find("transcript"); t != best.end()) {
    if (!t->is_string()) throw BackendUnavailable("transcript is not a string");
    r.hypothesis = t->get<std::string>();
  }
  if (const auto c = best.find("confidence"); c != best.end() && c->is_number()) r.confidence = c->get<double>();
  return r;
}

HttpBackend::HttpBackend(Options options) : options_(std::move(options)) {
  const std::size_t scheme = options_.url.find("://");
  if (scheme == std::string::npos) throw std::invalid_argument("backend URL needs a scheme: " + options_.url);
  const std::size_t slash = options_.url.find('/', scheme + 3);
  base_ = options_.url.substr(0, slash);
  path_ = slash == std::string::npos ? "/" : options_.url.substr(slash);
  if (!options_.sleep) options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  if (options_.retry.max_attempts < 1) throw std::invalid_argument("retry policy needs at least one attempt");
}

BackendCapabilities HttpBackend::capabilities() const {
  return {{8000, 16000, 22050, 44100, 48000}, options_.max_duration};
}

TranscriptionResult HttpBackend::recognize(const AudioBuffer& audio, std::string_view language_code) {
  httplib::Headers headers;
  if (!options_.api_key_env.empty()) {
    const char* key = std::getenv(options_.api_key_env.c_str());
    if (key == nullptr || *key == '\0') {
      throw AuthError("environment variable " + options_.api_key_env + " holding the API key is not set");
    }
    headers.emplace("x-goog-api-key", key);
  }
  const std::string body = build_recognize_request(audio, language_code);

  httplib::Client client(base_);
  client.set_connection_timeout(options_.timeout);
  client.set_read_timeout(options_.timeout);
  client.set_write_timeout(options_.timeout);

  std::string last_error;
  for (int attempt = 1; attempt <= options_.retry.max_attempts; ++attempt) {
    if (attempt > 1) options_.sleep(options_.retry.delay_before(attempt));
    const auto res = client.Post(path_, headers, body, "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    switch (classify_http_status(res->status)) {
      case HttpDisposition::ok:
        return parse_recognize_response(res->body);
      case HttpDisposition::auth:
        throw AuthError("recognizer rejected credentials (HTTP " + std::to_string(res->status) + ")");
      case HttpDisposition::too_large:
        throw PayloadTooLarge("recognizer rejected payload (HTTP 413)");
      case HttpDisposition::retry:
        last_error = "HTTP " + std::to_string(res->status);
        continue;
      case HttpDisposition::fail:
        throw BackendUnavailable("recognizer returned HTTP " + std::to_string(res->status) + ": " + res->body);
    }
  }
  throw BackendUnavailable("recognizer unavailable after " + std::to_string(options_.retry.max_attempts) +
                           " attempts: " + last_error);
}

}  // namespace forge
