#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/asr_backend.hpp"
#include "forge/corpus.hpp"
#include "forge/pipeline_config.hpp"
#include "forge/yield_table.hpp"

namespace forge {

// Execution order. transform cuts the accepted entries into fragment pairs,
// so the manual tuning pause sits between align and validate.
enum class Stage { ingest, align, validate, transform, build };

std::string_view to_string(Stage s) noexcept;
std::optional<Stage> parse_stage(std::string_view s) noexcept;

struct StageResult {
  Stage stage = Stage::ingest;
  std::string source_id;  // empty for build
  std::size_t in = 0;
  std::size_t out = 0;
  std::size_t warnings = 0;
  std::int64_t elapsed_ms = 0;
  bool skipped = false;  // --resume found the stage marker
};

// Files of one source under the output directory. Fragments live directly in
// `dir`; intermediate artifacts and stage markers in `work`.
struct SourceLayout {
  std::filesystem::path dir;
  std::filesystem::path work;
  std::filesystem::path audio;       // 16 kHz mono 16-bit WAV
  std::filesystem::path subtitle;    // verbatim copy of the SRT
  std::filesystem::path sync_map;    // aligned map, edited by the tuner
  std::filesystem::path validated;   // map with validation verdicts
  std::filesystem::path validation;  // per-entry validation records
  std::filesystem::path fragments;   // fragment list + source stats

  std::filesystem::path marker(Stage s) const;
};

SourceLayout source_layout(const std::filesystem::path& out_dir, std::string_view source_id);

struct IngestResult {
  std::filesystem::path wav_path;
  std::filesystem::path srt_path;
  bool converted = false;  // false when the media was already a pipeline WAV
};

// Fetches or copies both streams into the source's work directory. WAV media
// is conditioned in-process (downmix, resample to 16 kHz); anything else goes
// through converter_command.
// Throws FetchFailed, ConvertFailed, MissingSubtitle, IoError.
IngestResult ingest(const SourceSpec& spec, const PipelineConfig& config);

std::unique_ptr<AsrBackend> make_backend(const BackendConfig& config);

struct RunOptions {
  bool resume = false;
  std::optional<Stage> start_from;
  std::optional<Stage> stop_after;
};

struct SourceFailure {
  std::string source_id;
  Stage stage = Stage::ingest;
  std::string message;
};

struct RunReport {
  std::vector<StageResult> stages;  // sources in config order, then build
  std::optional<CorpusManifest> manifest;  // set when build ran
  std::vector<YieldReport> yields;
  std::vector<SourceFailure> failures;

  bool ok() const noexcept { return failures.empty(); }
};

// Runs the stages in [start_from, stop_after] for every source, sources in
// parallel. A failing source is recorded and the others continue. build
// writes manifest.json, manifest.tsv and yield.json under out_dir from every
// source whose transform stage has completed. `backend` overrides the one
// described by the config.
RunReport run_pipeline(const PipelineConfig& config, const RunOptions& options = {},
                       std::shared_ptr<AsrBackend> backend = nullptr);

}  // namespace forge
