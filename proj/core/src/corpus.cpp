#include "forge/corpus.hpp"

#include <algorithm>
#include <atomic>
#include <cstdio>
#include <exception>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "json.hpp"

#include "forge/error.hpp"
#include "forge/file_io.hpp"

namespace forge {
namespace fs = std::filesystem;

std::string fragment_id(std::string_view source_id, int entry_id) {
  char num[16];
  std::snprintf(num, sizeof num, "%04d", entry_id);
  return std::string(source_id) + "-" + num;
}

CorpusManifest make_manifest(std::string corpus_name, std::string license, std::vector<FragmentRecord> fragments) {
  CorpusManifest m{std::move(corpus_name), std::move(license), std::move(fragments), 0, 0};
  m.fragment_count = m.fragments.size();
  m.total_duration_ms = std::accumulate(m.fragments.begin(), m.fragments.end(), std::int64_t{0},
                                        [](std::int64_t acc, const FragmentRecord& f) { return acc + f.duration_ms; });
  return m;
}

void check_manifest_totals(const CorpusManifest& m) {
  if (m.fragment_count != m.fragments.size()) {
    throw SchemaError("/fragment_count", "does not match the number of fragments");
  }
  std::int64_t sum = 0;
  for (const auto& f : m.fragments) sum += f.duration_ms;
  if (sum != m.total_duration_ms) throw SchemaError("/total_duration_ms", "does not match the sum of fragment durations");
}

std::vector<FragmentRecord> emit_fragments(const SyncMap& map, const AudioBuffer& audio, const fs::path& out_dir,
                                           int parallelism) {
  const fs::path source_dir = out_dir / map.source_id;
  std::error_code ec;
  fs::create_directories(source_dir, ec);
  if (ec) throw IoError("cannot create " + source_dir.string() + ": " + ec.message());

  std::vector<const SyncEntry*> accepted;
  std::set<std::string> ids;
  for (const SyncEntry& e : map.entries) {
    if (e.status != EntryStatus::accepted) continue;
    if (!ids.insert(fragment_id(map.source_id, e.id)).second) {
      throw DuplicateFragmentId("duplicate fragment id " + fragment_id(map.source_id, e.id));
    }
    accepted.push_back(&e);
  }

  std::vector<FragmentRecord> records(accepted.size());
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < accepted.size(); k = next.fetch_add(1)) {
      try {
        const SyncEntry& e = *accepted[k];
        const AudioBuffer clip = slice_ms(audio, e.begin, e.end);
        FragmentRecord rec;
        rec.fragment_id = fragment_id(map.source_id, e.id);
        rec.audio_path = (fs::path(map.source_id) / (rec.fragment_id + ".wav")).generic_string();
        rec.text = e.text;
        rec.duration_ms = clip.duration().count();
        write_wav(clip, out_dir / rec.audio_path);
        write_file_atomic(source_dir / (rec.fragment_id + ".txt"), rec.text + "\n");
        records[k] = std::move(rec);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        return;
      }
    }
  };
  const auto threads = static_cast<std::size_t>(std::max(1, parallelism));
  if (threads == 1 || accepted.size() <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < std::min(threads, accepted.size()); ++t) pool.emplace_back(worker);
  }
  if (failure) std::rethrow_exception(failure);
  return records;
}

std::string manifest_to_json(const CorpusManifest& m) {
  nlohmann::ordered_json doc;
  doc["version"] = 1;
  doc["corpus_name"] = m.corpus_name;
  doc["license"] = m.license;
  doc["fragment_count"] = m.fragment_count;
  doc["total_duration_ms"] = m.total_duration_ms;
  doc["fragments"] = nlohmann::ordered_json::array();
  for (const auto& f : m.fragments) {
    nlohmann::ordered_json j;
    j["fragment_id"] = f.fragment_id;
    j["audio_path"] = f.audio_path;
    j["duration_ms"] = f.duration_ms;
    j["text"] = f.text;
    doc["fragments"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

std::string manifest_to_tsv(const CorpusManifest& m) {
  std::string out = "fragment_id\taudio_path\tduration_ms\ttext\n";
  for (const auto& f : m.fragments) {
    out += f.fragment_id + '\t' + f.audio_path + '\t' + std::to_string(f.duration_ms) + '\t' + f.text + '\n';
  }
  return out;
}

CorpusManifest manifest_from_json(std::string_view text) {
  nlohmann::json doc;
  try {
    doc = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw SchemaError("", e.what());
  }
  auto require = [](const nlohmann::json& obj, const std::string& where, const char* key) -> const nlohmann::json& {
    if (!obj.is_object() || !obj.contains(key)) throw SchemaError(where + "/" + key, "missing required key");
    return obj[key];
  };
  auto as_string = [](const nlohmann::json& v, const std::string& at) {
    if (!v.is_string()) throw SchemaError(at, "expected a string");
    return v.get<std::string>();
  };
  auto as_int = [](const nlohmann::json& v, const std::string& at) {
    if (!v.is_number_integer()) throw SchemaError(at, "expected an integer");
    return v.get<std::int64_t>();
  };

  if (!doc.is_object()) throw SchemaError("/", "expected an object");
  if (as_int(require(doc, "", "version"), "/version") != 1) throw SchemaError("/version", "unsupported version");
  CorpusManifest m;
  m.corpus_name = as_string(require(doc, "", "corpus_name"), "/corpus_name");
  m.license = as_string(require(doc, "", "license"), "/license");
  const std::int64_t count = as_int(require(doc, "", "fragment_count"), "/fragment_count");
  if (count < 0) throw SchemaError("/fragment_count", "must be >= 0");
  m.fragment_count = static_cast<std::size_t>(count);
  m.total_duration_ms = as_int(require(doc, "", "total_duration_ms"), "/total_duration_ms");
  const auto& frags = require(doc, "", "fragments");
  if (!frags.is_array()) throw SchemaError("/fragments", "expected an array");
  for (std::size_t i = 0; i < frags.size(); ++i) {
    const std::string where = "/fragments/" + std::to_string(i);
    const auto& j = frags[i];
    FragmentRecord f;
    f.fragment_id = as_string(require(j, where, "fragment_id"), where + "/fragment_id");
    f.audio_path = as_string(require(j, where, "audio_path"), where + "/audio_path");
    f.duration_ms = as_int(require(j, where, "duration_ms"), where + "/duration_ms");
    f.text = as_string(require(j, where, "text"), where + "/text");
    m.fragments.push_back(std::move(f));
  }
  check_manifest_totals(m);
  return m;
}

void write_manifest(const CorpusManifest& manifest, const fs::path& json_path) {
  check_manifest_totals(manifest);
  fs::path tsv_path = json_path;
  tsv_path.replace_extension(".tsv");
  write_file_atomic(json_path, manifest_to_json(manifest));
  write_file_atomic(tsv_path, manifest_to_tsv(manifest));
}

CorpusManifest load_manifest(const fs::path& json_path) { return manifest_from_json(read_file(json_path)); }

}  // namespace forge
