#pragma once

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/alignment.hpp"
#include "forge/asr_backend.hpp"
#include "forge/audio.hpp"

namespace forge {

struct ValidationPolicy {
  double cer_threshold = 0.25;
  TimeMs min_duration{500};
  TimeMs max_duration{30'000};
  std::string language_code = "ko-KR";

  // Throws std::invalid_argument unless 0 <= threshold <= 1 and min < max.
  void check() const;
};

enum class ValidationReason { ok, cer_exceeded, too_short, too_long, empty_reference, backend_error };
std::string_view to_string(ValidationReason r) noexcept;
std::optional<ValidationReason> parse_reason(std::string_view s) noexcept;

struct ValidationRecord {
  int entry_id = 0;
  std::string hypothesis;     // normalized
  std::optional<double> cer;  // absent when the recognizer was not consulted
  bool accepted = false;      // accepted implies reason == ok
  ValidationReason reason = ValidationReason::ok;
  std::string detail;  // backend error message, if any

  friend bool operator==(const ValidationRecord&, const ValidationRecord&) = default;
};

// Duration gates first (no backend call), then transcribe, normalize the
// hypothesis with the subtitle rules and compare by CER. Backend failures
// become reason backend_error except AuthError, which propagates.
// Requires entry.status == pending (std::invalid_argument otherwise).
ValidationRecord validate_segment(const SyncEntry& entry, const AudioBuffer& audio_slice, AsrBackend& backend,
                                  const ValidationPolicy& policy);

struct ValidationOutcome {
  SyncMap map;                           // pending entries now accepted or rejected
  std::vector<ValidationRecord> records;  // one per pending entry, in entry order
};

// Runs validate_segment over every pending entry with up to `parallelism`
// concurrent backend calls. The first AuthError stops the run and is
// rethrown; other failures are recorded per entry.
ValidationOutcome validate_map(const SyncMap& map, const AudioBuffer& audio, AsrBackend& backend,
                               const ValidationPolicy& policy, int parallelism = 1);

std::string save_validation_records(std::string_view source_id, const std::vector<ValidationRecord>& records);
std::vector<ValidationRecord> load_validation_records(std::string_view json);

}  // namespace forge
