#include "forge/validation.hpp"

#include <algorithm>
#include <atomic>
#include <exception>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "forge/edit_distance.hpp"
#include "forge/error.hpp"
#include "forge/text_normalizer.hpp"

namespace forge {

void ValidationPolicy::check() const {
  if (!(cer_threshold >= 0.0 && cer_threshold <= 1.0)) throw std::invalid_argument("cer_threshold must be in [0, 1]");
  if (min_duration.count() < 0 || min_duration >= max_duration) {
    throw std::invalid_argument("require 0 <= min_duration < max_duration");
  }
}

std::string_view to_string(ValidationReason r) noexcept {
  switch (r) {
    case ValidationReason::ok:
      return "ok";
    case ValidationReason::cer_exceeded:
      return "cer_exceeded";
    case ValidationReason::too_short:
      return "too_short";
    case ValidationReason::too_long:
      return "too_long";
    case ValidationReason::empty_reference:
      return "empty_reference";
    case ValidationReason::backend_error:
      return "backend_error";
  }
  return "ok";
}

std::optional<ValidationReason> parse_reason(std::string_view s) noexcept {
  for (auto r : {ValidationReason::ok, ValidationReason::cer_exceeded, ValidationReason::too_short,
                 ValidationReason::too_long, ValidationReason::empty_reference, ValidationReason::backend_error}) {
    if (to_string(r) == s) return r;
  }
  return std::nullopt;
}

ValidationRecord validate_segment(const SyncEntry& entry, const AudioBuffer& audio_slice, AsrBackend& backend,
                                  const ValidationPolicy& policy) {
  if (entry.status != EntryStatus::pending) {
    throw std::invalid_argument("entry " + std::to_string(entry.id) + " is not pending");
  }
  ValidationRecord rec;
  rec.entry_id = entry.id;

  const TimeMs duration = entry.duration();
  if (duration < policy.min_duration) {
    rec.reason = ValidationReason::too_short;
    return rec;
  }
  if (duration > policy.max_duration) {
    rec.reason = ValidationReason::too_long;
    return rec;
  }
  const std::string reference = normalize_text(entry.text).text;
  if (reference.empty()) {
    rec.reason = ValidationReason::empty_reference;
    return rec;
  }

  try {
    const TranscriptionResult result = transcribe(backend, audio_slice, policy.language_code);
    rec.hypothesis = normalize_text(result.hypothesis).text;
  } catch (const AuthError&) {
    throw;
  } catch (const Error& e) {
    rec.reason = ValidationReason::backend_error;
    rec.detail = e.what();
    return rec;
  } catch (const std::invalid_argument& e) {
    rec.reason = ValidationReason::backend_error;
    rec.detail = e.what();
    return rec;
  }

  rec.cer = char_error_rate(reference, rec.hypothesis);
  rec.accepted = *rec.cer <= policy.cer_threshold;
  rec.reason = rec.accepted ? ValidationReason::ok : ValidationReason::cer_exceeded;
  return rec;
}

ValidationOutcome validate_map(const SyncMap& map, const AudioBuffer& audio, AsrBackend& backend,
                               const ValidationPolicy& policy, int parallelism) {
  policy.check();
  if (parallelism < 1) throw std::invalid_argument("parallelism must be >= 1");

  std::vector<std::size_t> pending;
  for (std::size_t i = 0; i < map.entries.size(); ++i) {
    if (map.entries[i].status == EntryStatus::pending) pending.push_back(i);
  }

  std::vector<ValidationRecord> records(pending.size());
  std::atomic<std::size_t> next{0};
  std::atomic<bool> abort{false};
  std::exception_ptr failure;
  std::mutex failure_mutex;

  auto worker = [&] {
    while (!abort.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= pending.size()) return;
      const SyncEntry& entry = map.entries[pending[k]];
      try {
        const TimeMs end = std::min(entry.end, audio.duration());
        AudioBuffer slice = entry.begin < end ? slice_ms(audio, entry.begin, end) : AudioBuffer(audio.sample_rate_hz(), {});
        records[k] = validate_segment(entry, slice, backend, policy);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        abort.store(true);
      }
    }
  };

  const auto threads = static_cast<std::size_t>(parallelism);
  if (threads == 1 || pending.size() <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, pending.size()); ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);

  ValidationOutcome out{map, std::move(records)};
  for (std::size_t k = 0; k < pending.size(); ++k) {
    out.map.entries[pending[k]].status = out.records[k].accepted ? EntryStatus::accepted : EntryStatus::rejected;
  }
  return out;
}

std::string save_validation_records(std::string_view source_id, const std::vector<ValidationRecord>& records) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["source_id"] = std::string(source_id);
  doc["records"] = nlohmann::ordered_json::array();
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["entry_id"] = r.entry_id;
    j["hypothesis"] = r.hypothesis;
    j["cer"] = r.cer ? nlohmann::ordered_json(*r.cer) : nlohmann::ordered_json(nullptr);
    j["accepted"] = r.accepted;
    j["reason"] = to_string(r.reason);
    if (!r.detail.empty()) j["detail"] = r.detail;
    doc["records"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::vector<ValidationRecord> load_validation_records(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  if (!doc.is_object() || !doc.contains("records") || !doc["records"].is_array()) {
    throw SchemaError("/records", "expected an array of validation records");
  }
  std::vector<ValidationRecord> out;
  const auto& arr = doc["records"];
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const std::string where = "/records/" + std::to_string(i);
    try {
      const auto& j = arr[i];
      ValidationRecord r;
      r.entry_id = j.at("entry_id").get<int>();
      r.hypothesis = j.at("hypothesis").get<std::string>();
      if (!j.at("cer").is_null()) r.cer = j.at("cer").get<double>();
      r.accepted = j.at("accepted").get<bool>();
      const auto reason = parse_reason(j.at("reason").get<std::string>());
      if (!reason) throw SchemaError(where + "/reason", "unknown reason");
      r.reason = *reason;
      if (j.contains("detail")) r.detail = j["detail"].get<std::string>();
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(where, e.what());
    }
  }
  return out;
}

}  // namespace forge
