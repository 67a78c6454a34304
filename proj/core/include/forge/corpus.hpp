#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "forge/alignment.hpp"
#include "forge/audio.hpp"

namespace forge {

struct FragmentRecord {
  std::string fragment_id;  // "<source_id>-<entry id, 4 digits>"
  std::string audio_path;   // relative to the corpus root
  std::string text;
  std::int64_t duration_ms = 0;

  friend bool operator==(const FragmentRecord&, const FragmentRecord&) = default;
};

std::string fragment_id(std::string_view source_id, int entry_id);

struct CorpusManifest {
  std::string corpus_name;
  std::string license;
  std::vector<FragmentRecord> fragments;
  std::int64_t total_duration_ms = 0;
  std::size_t fragment_count = 0;

  friend bool operator==(const CorpusManifest&, const CorpusManifest&) = default;
};

// Fills in the totals.
CorpusManifest make_manifest(std::string corpus_name, std::string license, std::vector<FragmentRecord> fragments);
// Throws SchemaError if the totals disagree with the fragments.
void check_manifest_totals(const CorpusManifest& manifest);

// Writes <out_dir>/<source_id>/<fragment_id>.wav and .txt for every accepted
// entry. Throws IoError, DuplicateFragmentId.
std::vector<FragmentRecord> emit_fragments(const SyncMap& map, const AudioBuffer& audio,
                                           const std::filesystem::path& out_dir, int parallelism = 1);

// JSON at `json_path` plus a TSV sibling (same stem, .tsv) with header
// "fragment_id\taudio_path\tduration_ms\ttext".
void write_manifest(const CorpusManifest& manifest, const std::filesystem::path& json_path);
CorpusManifest load_manifest(const std::filesystem::path& json_path);

std::string manifest_to_json(const CorpusManifest& manifest);
std::string manifest_to_tsv(const CorpusManifest& manifest);
// Throws SchemaError.
CorpusManifest manifest_from_json(std::string_view json);

}  // namespace forge
