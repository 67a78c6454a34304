#pragma once

#include <functional>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/audio.hpp"
#include "forge/error.hpp"
#include "forge/subtitle.hpp"
#include "forge/text_normalizer.hpp"

namespace forge {

enum class EntryStatus { pending, accepted, rejected };
enum class EntryOrigin { subtitle, snapped, manual };

std::string_view to_string(EntryStatus s) noexcept;
std::string_view to_string(EntryOrigin o) noexcept;
std::optional<EntryStatus> parse_status(std::string_view s) noexcept;
std::optional<EntryOrigin> parse_origin(std::string_view s) noexcept;

struct SyncEntry {
  int id = 0;  // original subtitle cue number
  TimeMs begin{0};
  TimeMs end{0};
  std::string text;  // normalized
  EntryStatus status = EntryStatus::pending;
  EntryOrigin origin = EntryOrigin::subtitle;

  TimeMs duration() const noexcept { return end - begin; }
  friend bool operator==(const SyncEntry&, const SyncEntry&) = default;
};

// Editable speech/text alignment for one source. Entries are sorted by begin,
// have begin < end, unique ids, and never overlap (end_i <= begin_{i+1}).
struct SyncMap {
  std::string source_id;
  std::string audio_ref;  // path of the audio relative to the map file
  std::vector<SyncEntry> entries;

  const SyncEntry* find(int id) const noexcept;
  friend bool operator==(const SyncMap&, const SyncMap&) = default;
};

struct Adjustment {
  int entry_id = 0;
  std::int64_t delta_begin_ms = 0;
  std::int64_t delta_end_ms = 0;
  bool reject = false;
};

inline constexpr std::int64_t kMaxAdjustmentMs = 5000;
inline constexpr int kDefaultSnapWindowMs = 250;

// First violated invariant, if any.
std::optional<InvariantViolation> find_violation(const SyncMap& map);
// Throws InvariantViolation.
void check_invariants(const SyncMap& map);

using Normalizer = std::function<NormalizedText(std::string_view)>;

// One pending entry per cue whose normalized text is non-empty. Overlapping
// neighbours share the midpoint of their overlap (kept strictly inside both
// entries); a cue that cannot keep a positive duration is dropped. Cue
// numbers that repeat get fresh ids above the largest one.
// Throws EmptyDocument when no entry survives.
SyncMap build_sync_map(const SubtitleDocument& doc, std::string audio_ref,
                       const Normalizer& normalizer = normalize_text);

// Moves every boundary to find_low_energy_point(boundary, window). A boundary
// shared by two entries moves as one point. Each point is clamped between the
// midpoints to its neighbouring points so order and non-overlap survive.
// window_ms == 0 returns the map unchanged.
SyncMap snap_boundaries(const SyncMap& map, const AudioBuffer& audio, int window_ms = kDefaultSnapWindowMs);

// Applies the adjustments in order. Any failure throws (UnknownEntry or
// InvariantViolation) and the input map is untouched.
SyncMap apply_adjustments(const SyncMap& map, const std::vector<Adjustment>& adjustments);

// Replacing `current` by `proposed` from the tuner: same entries (ids and
// texts), statuses only move to rejected or stay, all invariants hold.
// Throws InvariantViolation.
void check_replacement(const SyncMap& current, const SyncMap& proposed);

// Canonical JSON, keys in schema order, LF line endings.
std::string save_sync_map(const SyncMap& map);
// Throws SchemaError (with a JSON pointer) or InvariantViolation.
SyncMap load_sync_map(std::string_view json);

}  // namespace forge
