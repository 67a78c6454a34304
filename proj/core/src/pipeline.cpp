#include "forge/pipeline.hpp"

#include <algorithm>
#include <array>
#include <atomic>
#include <chrono>
#include <map>
#include <thread>

#include "json.hpp"

#include "forge/error.hpp"
#include "forge/file_io.hpp"
#include "forge/process.hpp"
#include "forge/subtitle.hpp"

namespace forge {
namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr std::array<std::string_view, 5> kStageNames{"ingest", "align", "validate", "transform", "build"};
constexpr char kAudioRef[] = "audio.wav";

int index_of(Stage s) { return static_cast<int>(s); }

void remove_file(const fs::path& p) {
  std::error_code ec;
  fs::remove(p, ec);
}

void run_fetch(const std::string& tmpl, const StreamSource& src, const std::string& source_id, const fs::path& out,
               const std::string& what) {
  remove_file(out);
  const std::string cmd =
      expand_command(tmpl, {{"out", out.string()}, {"url", src.url}, {"source_id", source_id}});
  const CommandResult r = run_shell(cmd);
  if (r.exit_code != 0) throw FetchFailed(source_id + ": " + what + " fetch failed", r.exit_code, r.stderr_text);
}

AudioBuffer condition(AudioBuffer audio) {
  if (audio.sample_rate_hz() != kPipelineSampleRate) audio = resample_linear(audio, kPipelineSampleRate);
  return audio;
}

bool is_pipeline_wav(const fs::path& p) {
  try {
    const WavInfo info = probe_wav(p);
    return info.sample_rate_hz == kPipelineSampleRate && info.channels == 1 && info.bits_per_sample == 16;
  } catch (const UnsupportedFormat&) {
    return false;
  } catch (const CorruptFile&) {
    return false;
  }
}

struct SourceStatsFile {
  SourceStats source;
  std::vector<FragmentRecord> fragments;
};

std::string save_fragments_file(std::string_view source_id, const SourceStats& source,
                                const std::vector<FragmentRecord>& fragments) {
  ordered_json doc;
  doc["version"] = 1;
  doc["source_id"] = source_id;
  doc["source_segments"] = source.segments;
  doc["source_duration_ms"] = source.duration_ms;
  doc["fragments"] = ordered_json::array();
  for (const auto& f : fragments) {
    ordered_json j;
    j["fragment_id"] = f.fragment_id;
    j["audio_path"] = f.audio_path;
    j["duration_ms"] = f.duration_ms;
    j["text"] = f.text;
    doc["fragments"].push_back(std::move(j));
  }
  return doc.dump(2) + "\n";
}

SourceStatsFile load_fragments_file(const fs::path& path) {
  SourceStatsFile out;
  try {
    const auto doc = nlohmann::json::parse(read_file(path));
    out.source.segments = doc.at("source_segments").get<std::int64_t>();
    out.source.duration_ms = doc.at("source_duration_ms").get<std::int64_t>();
    for (const auto& j : doc.at("fragments")) {
      out.fragments.push_back({j.at("fragment_id").get<std::string>(), j.at("audio_path").get<std::string>(),
                               j.at("text").get<std::string>(), j.at("duration_ms").get<std::int64_t>()});
    }
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(path.string(), e.what());
  }
  return out;
}

// Fragments left by an earlier transform of this source.
void clear_fragments(const SourceLayout& layout) {
  std::error_code ec;
  if (!fs::is_directory(layout.dir, ec)) return;
  for (const auto& entry : fs::directory_iterator(layout.dir, ec)) {
    if (!entry.is_regular_file()) continue;
    const auto ext = entry.path().extension();
    if (ext == ".wav" || ext == ".txt") remove_file(entry.path());
  }
}

class SourceRunner {
 public:
  SourceRunner(const SourceSpec& spec, const PipelineConfig& config, const RunOptions& options, AsrBackend* backend)
      : spec_(spec), config_(config), options_(options), backend_(backend),
        layout_(source_layout(config.out_dir, spec.source_id)) {}

  std::vector<StageResult> results;
  std::optional<SourceFailure> failure;

  void run(Stage first, Stage last) {
    for (int i = index_of(first); i <= index_of(last) && i < index_of(Stage::build); ++i) {
      const auto stage = static_cast<Stage>(i);
      try {
        step(stage, i == index_of(first));
      } catch (const std::exception& e) {
        failure = SourceFailure{spec_.source_id, stage, e.what()};
        return;
      }
    }
  }

 private:
  void step(Stage stage, bool is_first) {
    const fs::path marker = layout_.marker(stage);
    if (options_.resume && fs::exists(marker)) {
      StageResult r;
      r.stage = stage;
      r.source_id = spec_.source_id;
      r.skipped = true;
      results.push_back(r);
      return;
    }
    if (is_first && stage != Stage::ingest) {
      const auto prev = static_cast<Stage>(index_of(stage) - 1);
      if (!fs::exists(layout_.marker(prev))) {
        throw Error("stage " + std::string(to_string(prev)) + " has not completed for this source");
      }
    }
    for (int i = index_of(stage); i < index_of(Stage::build); ++i) remove_file(layout_.marker(static_cast<Stage>(i)));

    const auto t0 = std::chrono::steady_clock::now();
    StageResult r;
    r.stage = stage;
    r.source_id = spec_.source_id;
    switch (stage) {
      case Stage::ingest: do_ingest(r); break;
      case Stage::align: do_align(r); break;
      case Stage::validate: do_validate(r); break;
      case Stage::transform: do_transform(r); break;
      case Stage::build: break;
    }
    r.elapsed_ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
    write_file_atomic(marker, "ok\n");
    results.push_back(r);
  }

  void do_ingest(StageResult& r) {
    ingest(spec_, config_);
    r.in = 2;
    r.out = 2;
  }

  void do_align(StageResult& r) {
    const SrtParseResult parsed = parse_srt(read_file(layout_.subtitle), spec_.source_id);
    const AudioBuffer audio = read_wav(layout_.audio);
    SyncMap map = build_sync_map(parsed.document, kAudioRef);
    map = snap_boundaries(map, audio, config_.snap_window_ms);
    write_file_atomic(layout_.sync_map, save_sync_map(map));
    r.in = parsed.document.segments.size() + parsed.diagnostics.size();
    r.out = map.entries.size();
    r.warnings = r.in - r.out;
  }

  void do_validate(StageResult& r) {
    if (backend_ == nullptr) throw BackendUnavailable("no recognizer configured");
    const SyncMap map = load_sync_map(read_file(layout_.sync_map));
    const AudioBuffer audio = read_wav(layout_.sync_map.parent_path() / map.audio_ref);
    ValidationPolicy policy = config_.validation;
    if (!spec_.language_code.empty()) policy.language_code = spec_.language_code;
    const ValidationOutcome outcome = validate_map(map, audio, *backend_, policy, config_.parallelism);
    write_file_atomic(layout_.validation, save_validation_records(spec_.source_id, outcome.records));
    write_file_atomic(layout_.validated, save_sync_map(outcome.map));
    r.in = outcome.records.size();
    for (const auto& rec : outcome.records) {
      if (rec.accepted) ++r.out;
      if (rec.reason == ValidationReason::backend_error) ++r.warnings;
    }
  }

  void do_transform(StageResult& r) {
    const SyncMap map = load_sync_map(read_file(layout_.validated));
    const AudioBuffer audio = read_wav(layout_.validated.parent_path() / map.audio_ref);
    const SrtParseResult parsed = parse_srt(read_file(layout_.subtitle), spec_.source_id);
    clear_fragments(layout_);
    const auto fragments = emit_fragments(map, audio, config_.out_dir, config_.parallelism);
    const SourceStats source{static_cast<std::int64_t>(parsed.document.segments.size()), audio.duration().count()};
    write_file_atomic(layout_.fragments, save_fragments_file(spec_.source_id, source, fragments));
    r.in = static_cast<std::size_t>(
        std::count_if(map.entries.begin(), map.entries.end(),
                      [](const SyncEntry& e) { return e.status == EntryStatus::accepted; }));
    r.out = fragments.size();
  }

  const SourceSpec& spec_;
  const PipelineConfig& config_;
  const RunOptions& options_;
  AsrBackend* backend_;
  SourceLayout layout_;
};

}  // namespace

std::string_view to_string(Stage s) noexcept { return kStageNames[static_cast<std::size_t>(s)]; }

std::optional<Stage> parse_stage(std::string_view s) noexcept {
  for (std::size_t i = 0; i < kStageNames.size(); ++i) {
    if (kStageNames[i] == s) return static_cast<Stage>(i);
  }
  return std::nullopt;
}

fs::path SourceLayout::marker(Stage s) const { return work / (std::string(to_string(s)) + ".done"); }

SourceLayout source_layout(const fs::path& out_dir, std::string_view source_id) {
  SourceLayout l;
  l.dir = out_dir / std::string(source_id);
  l.work = l.dir / ".forge";
  l.audio = l.work / kAudioRef;
  l.subtitle = l.work / "subtitle.srt";
  l.sync_map = l.work / "syncmap.json";
  l.validated = l.work / "validated.json";
  l.validation = l.work / "validation.json";
  l.fragments = l.work / "fragments.json";
  return l;
}

IngestResult ingest(const SourceSpec& spec, const PipelineConfig& config) {
  const SourceLayout layout = source_layout(config.out_dir, spec.source_id);
  std::error_code ec;
  fs::create_directories(layout.work, ec);
  if (ec) throw IoError("cannot create " + layout.work.string() + ": " + ec.message());

  IngestResult result{layout.audio, layout.subtitle, false};

  fs::path media;
  if (spec.media.is_fetch()) {
    media = layout.work / "media.download";
    run_fetch(*spec.media.fetch, spec.media, spec.source_id, media, "media");
    if (!fs::is_regular_file(media)) {
      throw FetchFailed(spec.source_id + ": media fetch produced no file", 0, {});
    }
  } else {
    media = *spec.media.path;
    if (!fs::is_regular_file(media)) throw IoError(spec.source_id + ": media not found: " + media.string());
  }

  if (is_pipeline_wav(media)) {
    write_file_atomic(layout.audio, read_file(media));
  } else {
    std::optional<AudioBuffer> decoded;
    try {
      decoded = read_wav(media);
    } catch (const UnsupportedFormat&) {
    } catch (const CorruptFile&) {
    }
    if (!decoded) {
      if (config.converter_command.empty()) {
        throw ConvertFailed(spec.source_id + ": " + media.filename().string() +
                                " is not a PCM WAV and no converter_command is configured",
                            -1, {});
      }
      const fs::path converted = layout.work / "media.converted.wav";
      remove_file(converted);
      const CommandResult r =
          run_shell(expand_command(config.converter_command, {{"in", media.string()}, {"out", converted.string()}}));
      if (r.exit_code != 0) throw ConvertFailed(spec.source_id + ": converter failed", r.exit_code, r.stderr_text);
      try {
        decoded = read_wav(converted);
      } catch (const Error& e) {
        throw ConvertFailed(spec.source_id + ": converter output unreadable: " + e.what(), 0, {});
      }
      remove_file(converted);
    }
    write_wav(condition(std::move(*decoded)), layout.audio);
    result.converted = true;
  }
  if (spec.media.is_fetch()) remove_file(media);

  if (spec.subtitle.is_fetch()) {
    run_fetch(*spec.subtitle.fetch, spec.subtitle, spec.source_id, layout.subtitle, "subtitle");
    if (!fs::is_regular_file(layout.subtitle)) {
      throw MissingSubtitle(spec.source_id + ": subtitle fetch produced no file");
    }
  } else {
    const fs::path& srt = *spec.subtitle.path;
    if (!fs::is_regular_file(srt)) throw MissingSubtitle(spec.source_id + ": subtitle not found: " + srt.string());
    write_file_atomic(layout.subtitle, read_file(srt));
  }
  return result;
}

std::unique_ptr<AsrBackend> make_backend(const BackendConfig& config) {
  if (config.kind == BackendConfig::Kind::mock) {
    return std::make_unique<MockBackend>(MockBackend::from_file(config.mock_table));
  }
  HttpBackend::Options opts;
  opts.url = config.url;
  opts.api_key_env = config.api_key_env;
  return std::make_unique<HttpBackend>(std::move(opts));
}

RunReport run_pipeline(const PipelineConfig& config, const RunOptions& options, std::shared_ptr<AsrBackend> backend) {
  check_config(config);
  const Stage first = options.start_from.value_or(Stage::ingest);
  const Stage last = options.stop_after.value_or(Stage::build);
  if (index_of(first) > index_of(last)) {
    throw ConfigError("--start-from " + std::string(to_string(first)) + " comes after --stop-after " +
                      std::string(to_string(last)));
  }

  const bool needs_backend = index_of(first) <= index_of(Stage::validate) &&
                             index_of(last) >= index_of(Stage::validate) && !config.sources.empty();
  if (needs_backend && !backend) backend = make_backend(config.backend);

  std::vector<SourceRunner> runners;
  runners.reserve(config.sources.size());
  for (const auto& spec : config.sources) runners.emplace_back(spec, config, options, backend.get());

  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t k = next.fetch_add(1); k < runners.size(); k = next.fetch_add(1)) runners[k].run(first, last);
  };
  const std::size_t threads = std::min<std::size_t>(static_cast<std::size_t>(config.parallelism), runners.size());
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::jthread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(worker);
  }

  RunReport report;
  for (auto& runner : runners) {
    report.stages.insert(report.stages.end(), runner.results.begin(), runner.results.end());
    if (runner.failure) report.failures.push_back(*runner.failure);
  }
  if (last != Stage::build) return report;

  const auto t0 = std::chrono::steady_clock::now();
  std::vector<FragmentRecord> fragments;
  StageResult build;
  build.stage = Stage::build;
  for (const auto& spec : config.sources) {
    const SourceLayout layout = source_layout(config.out_dir, spec.source_id);
    if (!fs::exists(layout.marker(Stage::transform))) continue;
    const bool failed_now = std::any_of(report.failures.begin(), report.failures.end(),
                                        [&](const SourceFailure& f) { return f.source_id == spec.source_id; });
    if (failed_now) continue;
    try {
      SourceStatsFile stats = load_fragments_file(layout.fragments);
      SourceStats corpus{static_cast<std::int64_t>(stats.fragments.size()), 0};
      for (const auto& f : stats.fragments) corpus.duration_ms += f.duration_ms;
      report.yields.push_back(compute_yield(spec.source_id, stats.source, corpus));
      fragments.insert(fragments.end(), std::make_move_iterator(stats.fragments.begin()),
                       std::make_move_iterator(stats.fragments.end()));
      ++build.in;
    } catch (const std::exception& e) {
      report.failures.push_back({spec.source_id, Stage::build, e.what()});
    }
  }
  CorpusManifest manifest = make_manifest(config.corpus_name, config.license, std::move(fragments));
  write_manifest(manifest, config.out_dir / "manifest.json");
  write_file_atomic(config.out_dir / "yield.json", save_yield_reports(report.yields));
  build.out = manifest.fragment_count;
  build.elapsed_ms =
      std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - t0).count();
  report.stages.push_back(build);
  report.manifest = std::move(manifest);
  return report;
}

}  // namespace forge
