#include "forge/alignment.hpp"

#include <algorithm>
#include <limits>
#include <set>

#include "json.hpp"

#include "forge/error.hpp"

namespace forge {
namespace {

using ordered_json = nlohmann::ordered_json;

constexpr int kSchemaVersion = 1;

std::string pointer(std::string_view base, std::string_view key) {
  std::string out(base);
  out.push_back('/');
  out.append(key);
  return out;
}

void expect_exact_keys(const ordered_json& obj, const std::string& where,
                       std::initializer_list<std::string_view> keys) {
  if (!obj.is_object()) throw SchemaError(where.empty() ? "/" : where, "expected an object");
  for (std::string_view k : keys) {
    if (!obj.contains(std::string(k))) throw SchemaError(pointer(where, k), "missing required key");
  }
  for (const auto& [k, _] : obj.items()) {
    if (std::find(keys.begin(), keys.end(), k) == keys.end()) {
      throw SchemaError(pointer(where, k), "unexpected key");
    }
  }
}

std::int64_t get_int(const ordered_json& obj, const std::string& where, const char* key,
                     std::int64_t min, std::int64_t max) {
  const auto& v = obj.at(key);
  const std::string at = pointer(where, key);
  if (!v.is_number_integer()) throw SchemaError(at, "expected an integer");
  if (v.is_number_unsigned() && v.get<std::uint64_t>() > static_cast<std::uint64_t>(max)) {
    throw SchemaError(at, "integer out of range");
  }
  const auto x = v.get<std::int64_t>();
  if (x < min || x > max) throw SchemaError(at, "integer out of range");
  return x;
}

std::string get_string(const ordered_json& obj, const std::string& where, const char* key) {
  const auto& v = obj.at(key);
  if (!v.is_string()) throw SchemaError(pointer(where, key), "expected a string");
  return v.get<std::string>();
}

}  // namespace

std::string_view to_string(EntryStatus s) noexcept {
  switch (s) {
    case EntryStatus::pending:
      return "pending";
    case EntryStatus::accepted:
      return "accepted";
    case EntryStatus::rejected:
      return "rejected";
  }
  return "pending";
}

std::string_view to_string(EntryOrigin o) noexcept {
  switch (o) {
    case EntryOrigin::subtitle:
      return "subtitle";
    case EntryOrigin::snapped:
      return "snapped";
    case EntryOrigin::manual:
      return "manual";
  }
  return "subtitle";
}

std::optional<EntryStatus> parse_status(std::string_view s) noexcept {
  if (s == "pending") return EntryStatus::pending;
  if (s == "accepted") return EntryStatus::accepted;
  if (s == "rejected") return EntryStatus::rejected;
  return std::nullopt;
}

std::optional<EntryOrigin> parse_origin(std::string_view s) noexcept {
  if (s == "subtitle") return EntryOrigin::subtitle;
  if (s == "snapped") return EntryOrigin::snapped;
  if (s == "manual") return EntryOrigin::manual;
  return std::nullopt;
}

const SyncEntry* SyncMap::find(int id) const noexcept {
  const auto it = std::find_if(entries.begin(), entries.end(), [id](const SyncEntry& e) { return e.id == id; });
  return it == entries.end() ? nullptr : &*it;
}

std::optional<InvariantViolation> find_violation(const SyncMap& map) {
  std::set<int> ids;
  for (std::size_t i = 0; i < map.entries.size(); ++i) {
    const SyncEntry& e = map.entries[i];
    if (!ids.insert(e.id).second) return InvariantViolation(e.id, "duplicate entry id");
    if (e.begin.count() < 0) return InvariantViolation(e.id, "begin must be >= 0");
    if (e.begin >= e.end) return InvariantViolation(e.id, "begin must be < end");
    if (i > 0 && map.entries[i - 1].end > e.begin) {
      return InvariantViolation(e.id, "overlaps previous entry " + std::to_string(map.entries[i - 1].id));
    }
  }
  return std::nullopt;
}

void check_invariants(const SyncMap& map) {
  if (auto v = find_violation(map)) throw *v;
}

SyncMap build_sync_map(const SubtitleDocument& doc, std::string audio_ref, const Normalizer& normalizer) {
  SyncMap map;
  map.source_id = doc.source_id;
  map.audio_ref = std::move(audio_ref);

  int max_id = 0;
  for (const auto& seg : doc.segments) max_id = std::max(max_id, seg.index);

  std::set<int> used;
  for (const auto& seg : doc.segments) {
    NormalizedText norm = normalizer(seg.raw_text);
    if (norm.text.empty()) continue;

    SyncEntry entry;
    entry.id = used.contains(seg.index) ? ++max_id : seg.index;
    used.insert(entry.id);
    entry.begin = seg.start;
    entry.end = seg.end;
    entry.text = std::move(norm.text);

    if (!map.entries.empty() && map.entries.back().end > entry.begin) {
      SyncEntry& prev = map.entries.back();
      const TimeMs lo = prev.begin + TimeMs{1};
      const TimeMs hi = entry.end - TimeMs{1};
      if (lo > hi) continue;
      const TimeMs mid{(entry.begin.count() + prev.end.count()) / 2};
      const TimeMs boundary = std::clamp(mid, lo, hi);
      prev.end = boundary;
      entry.begin = boundary;
    }
    map.entries.push_back(std::move(entry));
  }

  if (map.entries.empty()) {
    throw EmptyDocument("subtitle document '" + doc.source_id + "' has no speech text");
  }
  return map;
}

SyncMap snap_boundaries(const SyncMap& map, const AudioBuffer& audio, int window_ms) {
  if (window_ms < 0) throw std::invalid_argument("snap window must be >= 0");
  if (window_ms == 0 || map.entries.empty()) return map;

  // Distinct boundary points in time order; shared boundaries appear once.
  std::vector<TimeMs> points;
  std::vector<std::pair<std::size_t, std::size_t>> refs;  // entry -> (begin point, end point)
  for (std::size_t i = 0; i < map.entries.size(); ++i) {
    const SyncEntry& e = map.entries[i];
    std::size_t b = 0;
    if (i > 0 && map.entries[i - 1].end == e.begin) {
      b = refs.back().second;
    } else {
      b = points.size();
      points.push_back(e.begin);
    }
    refs.emplace_back(b, points.size());
    points.push_back(e.end);
  }

  const EnergyTrack track = rms_frames(audio, kEnergyFrameMs, kEnergyHopMs);
  const TimeMs duration = audio.duration();
  const TimeMs window{window_ms};

  std::vector<TimeMs> moved(points.size());
  for (std::size_t j = 0; j < points.size(); ++j) {
    const TimeMs p = points[j];
    const TimeMs lo = j == 0 ? TimeMs{0} : TimeMs{(points[j - 1].count() + p.count()) / 2 + 1};
    const TimeMs hi = j + 1 == points.size() ? std::max(duration, p) : TimeMs{(p.count() + points[j + 1].count()) / 2};
    moved[j] = std::clamp(find_low_energy_point(track, duration, p, window), lo, hi);
  }

  SyncMap out = map;
  for (std::size_t i = 0; i < out.entries.size(); ++i) {
    SyncEntry& e = out.entries[i];
    const TimeMs b = moved[refs[i].first];
    const TimeMs en = moved[refs[i].second];
    if (b != e.begin || en != e.end) {
      e.begin = b;
      e.end = en;
      e.origin = EntryOrigin::snapped;
    }
  }
  return out;
}

SyncMap apply_adjustments(const SyncMap& map, const std::vector<Adjustment>& adjustments) {
  SyncMap out = map;
  auto& entries = out.entries;
  for (const Adjustment& adj : adjustments) {
    const auto it = std::find_if(entries.begin(), entries.end(),
                                 [&](const SyncEntry& e) { return e.id == adj.entry_id; });
    if (it == entries.end()) throw UnknownEntry(adj.entry_id);
    if (std::abs(adj.delta_begin_ms) > kMaxAdjustmentMs || std::abs(adj.delta_end_ms) > kMaxAdjustmentMs) {
      throw InvariantViolation(adj.entry_id, "adjustment larger than 5000 ms");
    }
    const TimeMs begin = it->begin + TimeMs{adj.delta_begin_ms};
    const TimeMs end = it->end + TimeMs{adj.delta_end_ms};
    if (begin.count() < 0) throw InvariantViolation(adj.entry_id, "begin must be >= 0");
    if (begin >= end) throw InvariantViolation(adj.entry_id, "begin must be < end");
    if (it != entries.begin() && std::prev(it)->end > begin) {
      throw InvariantViolation(adj.entry_id, "overlaps previous entry " + std::to_string(std::prev(it)->id));
    }
    if (std::next(it) != entries.end() && end > std::next(it)->begin) {
      throw InvariantViolation(adj.entry_id, "overlaps next entry " + std::to_string(std::next(it)->id));
    }
    if (adj.delta_begin_ms != 0 || adj.delta_end_ms != 0) {
      it->begin = begin;
      it->end = end;
      it->origin = EntryOrigin::manual;
    }
    if (adj.reject) it->status = EntryStatus::rejected;
  }
  return out;
}

void check_replacement(const SyncMap& current, const SyncMap& proposed) {
  if (proposed.source_id != current.source_id || proposed.audio_ref != current.audio_ref) {
    throw InvariantViolation(0, "source_id and audio_ref cannot change");
  }
  if (proposed.entries.size() != current.entries.size()) {
    throw InvariantViolation(0, "entries cannot be added or removed");
  }
  for (std::size_t i = 0; i < current.entries.size(); ++i) {
    const SyncEntry& was = current.entries[i];
    const SyncEntry& now = proposed.entries[i];
    if (now.id != was.id) throw InvariantViolation(now.id, "entry ids and order cannot change");
    if (now.text != was.text) throw InvariantViolation(now.id, "entry text cannot change");
    if (now.status != was.status && now.status != EntryStatus::rejected) {
      throw InvariantViolation(now.id, std::string("status cannot change from ") + std::string(to_string(was.status)) +
                                           " to " + std::string(to_string(now.status)));
    }
  }
  check_invariants(proposed);
}

std::string save_sync_map(const SyncMap& map) {
  ordered_json doc;
  doc["version"] = kSchemaVersion;
  doc["source_id"] = map.source_id;
  doc["audio_ref"] = map.audio_ref;
  doc["entries"] = ordered_json::array();
  for (const SyncEntry& e : map.entries) {
    ordered_json j;
    j["id"] = e.id;
    j["begin_ms"] = e.begin.count();
    j["end_ms"] = e.end.count();
    j["text"] = e.text;
    j["status"] = to_string(e.status);
    j["origin"] = to_string(e.origin);
    doc["entries"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

SyncMap load_sync_map(std::string_view text) {
  ordered_json doc;
  try {
    doc = ordered_json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  expect_exact_keys(doc, "", {"version", "source_id", "audio_ref", "entries"});
  if (get_int(doc, "", "version", 0, std::numeric_limits<int>::max()) != kSchemaVersion) {
    throw SchemaError("/version", "unsupported version");
  }

  SyncMap map;
  map.source_id = get_string(doc, "", "source_id");
  map.audio_ref = get_string(doc, "", "audio_ref");
  const auto& entries = doc.at("entries");
  if (!entries.is_array()) throw SchemaError("/entries", "expected an array");
  for (std::size_t i = 0; i < entries.size(); ++i) {
    const std::string where = "/entries/" + std::to_string(i);
    const auto& j = entries[i];
    expect_exact_keys(j, where, {"id", "begin_ms", "end_ms", "text", "status", "origin"});
    SyncEntry e;
    e.id = static_cast<int>(get_int(j, where, "id", std::numeric_limits<int>::min(), std::numeric_limits<int>::max()));
    e.begin = TimeMs{get_int(j, where, "begin_ms", std::numeric_limits<std::int64_t>::min(),
                             std::numeric_limits<std::int64_t>::max())};
    e.end = TimeMs{get_int(j, where, "end_ms", std::numeric_limits<std::int64_t>::min(),
                           std::numeric_limits<std::int64_t>::max())};
    e.text = get_string(j, where, "text");
    const auto status = parse_status(get_string(j, where, "status"));
    if (!status) throw SchemaError(where + "/status", "expected pending, accepted or rejected");
    e.status = *status;
    const auto origin = parse_origin(get_string(j, where, "origin"));
    if (!origin) throw SchemaError(where + "/origin", "expected subtitle, snapped or manual");
    e.origin = *origin;
    map.entries.push_back(std::move(e));
  }
  check_invariants(map);
  return map;
}

}  // namespace forge
