// forge: corpus pipeline command line.

#include <csignal>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>

#include <pthread.h>

#include "CLI11.hpp"

#include "forge/error.hpp"
#include "forge/file_io.hpp"
#include "forge/pipeline.hpp"
#include "forge/pipeline_config.hpp"
#include "forge/tuner_service.hpp"
#include "forge/yield_table.hpp"

namespace fs = std::filesystem;

namespace {

constexpr int kExitFailure = 1;
constexpr int kExitUsage = 2;

struct CommonArgs {
  std::string config = "forge.json";
  std::string out;
  bool resume = false;
  std::string stop_after;
  std::string start_from;
};

forge::PipelineConfig load(const CommonArgs& args) {
  forge::PipelineConfig config = forge::load_config(args.config);
  if (!args.out.empty()) config.out_dir = fs::absolute(args.out);
  return config;
}

std::optional<forge::Stage> stage_arg(const std::string& text, const char* flag) {
  if (text.empty()) return std::nullopt;
  auto s = forge::parse_stage(text);
  if (!s) throw forge::ConfigError(std::string(flag) + ": unknown stage \"" + text + "\"");
  return s;
}

void print_report(const forge::RunReport& report) {
  for (const auto& r : report.stages) {
    const std::string who = r.source_id.empty() ? "*" : r.source_id;
    if (r.skipped) {
      std::printf("%-9s  %-20s  skipped (done)\n", std::string(forge::to_string(r.stage)).c_str(), who.c_str());
      continue;
    }
    std::printf("%-9s  %-20s  in=%zu out=%zu warnings=%zu  %lld ms\n", std::string(forge::to_string(r.stage)).c_str(),
                who.c_str(), r.in, r.out, r.warnings, static_cast<long long>(r.elapsed_ms));
  }
  if (report.manifest) {
    std::printf("manifest: %zu fragments, %s\n", report.manifest->fragment_count,
                forge::format_duration(static_cast<double>(report.manifest->total_duration_ms)).c_str());
  }
  for (const auto& f : report.failures) {
    std::fprintf(stderr, "error: %s [%s]: %s\n", f.source_id.c_str(), std::string(forge::to_string(f.stage)).c_str(),
                 f.message.c_str());
  }
}

int run_stages(const CommonArgs& args, std::optional<forge::Stage> from, std::optional<forge::Stage> to) {
  const forge::PipelineConfig config = load(args);
  forge::RunOptions options;
  options.resume = args.resume;
  options.start_from = from;
  options.stop_after = to;
  const forge::RunReport report = forge::run_pipeline(config, options);
  print_report(report);
  return report.ok() ? 0 : kExitFailure;
}

int stats(const std::string& input_arg) {
  const fs::path input(input_arg);
  std::vector<forge::YieldReport> reports;
  std::optional<forge::YieldSummary> summary;
  if (input.extension() == ".csv") {
    const forge::TableFixture table = forge::load_table_fixture(input);
    reports = table.reports();
    if (table.printed_total) {
      summary = forge::aggregate_stats(reports, table.printed_total->source, table.printed_total->corpus);
    }
  } else {
    fs::path yield = input;
    if (fs::is_directory(input)) {
      yield = input / "yield.json";
    } else if (input.filename() != "yield.json") {
      yield = input.parent_path() / "yield.json";
    }
    reports = forge::load_yield_reports(forge::read_file(yield));
  }
  if (!summary) summary = forge::aggregate_stats(reports);
  std::fputs(forge::format_yield_table(reports, *summary).c_str(), stdout);
  return 0;
}

struct TunerArgs {
  std::string source;
  std::string syncmap;
  std::string audio;
  std::string ui_dir;
  std::string host = "127.0.0.1";
  int port = 8765;
};

int serve_tuner(const CommonArgs& common, const TunerArgs& args) {
  forge::TunerService::Options opts;
  if (!args.syncmap.empty()) {
    opts.sync_map = args.syncmap;
  } else if (!args.source.empty()) {
    const forge::PipelineConfig config = load(common);
    opts.sync_map = forge::source_layout(config.out_dir, args.source).sync_map;
  } else {
    throw forge::ConfigError("serve-tuner needs --syncmap or --source");
  }
  opts.audio = args.audio;
  if (!args.ui_dir.empty()) opts.ui_dir = fs::path(args.ui_dir);
  opts.host = args.host;
  opts.port = args.port;

  // Signals are taken by a dedicated thread so stop() never runs in a handler.
  sigset_t signals;
  sigemptyset(&signals);
  sigaddset(&signals, SIGINT);
  sigaddset(&signals, SIGTERM);
  pthread_sigmask(SIG_BLOCK, &signals, nullptr);

  forge::TunerService service(opts);
  const int port = service.bind();
  std::printf("tuner: http://%s:%d/ (%s)\n", opts.host.c_str(), port, opts.sync_map.string().c_str());
  std::fflush(stdout);
  std::jthread waiter([&] {
    int sig = 0;
    sigwait(&signals, &sig);
    service.stop();
  });
  service.listen();
  // listen() can return on its own; wake the waiter in that case.
  pthread_kill(waiter.native_handle(), SIGTERM);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"forge: build a speech corpus from audio + subtitle pairs"};
  app.require_subcommand(1);
  CommonArgs common;

  auto add_common = [&](CLI::App* sub, bool stages) {
    sub->add_option("--config", common.config, "pipeline config (JSON)")->capture_default_str();
    sub->add_option("--out", common.out, "output directory (overrides out_dir)");
    sub->add_flag("--resume", common.resume, "skip stages whose markers exist");
    if (stages) {
      sub->add_option("--start-from", common.start_from, "first stage: ingest|align|validate|transform|build");
      sub->add_option("--stop-after", common.stop_after, "last stage: ingest|align|validate|transform|build");
    }
  };

  auto* run = app.add_subcommand("run", "run the pipeline (all stages by default)");
  add_common(run, true);
  auto* ingest = app.add_subcommand("ingest", "fetch/copy and convert media and subtitles");
  add_common(ingest, false);
  auto* align = app.add_subcommand("align", "parse subtitles, build and snap sync maps");
  add_common(align, false);
  auto* validate = app.add_subcommand("validate", "check each segment against the recognizer");
  add_common(validate, false);
  auto* build = app.add_subcommand("build", "cut accepted fragments and write the manifest");
  add_common(build, false);

  std::string stats_input;
  auto* stats_cmd = app.add_subcommand("stats", "print the yield table");
  stats_cmd->add_option("input", stats_input, "table CSV, manifest.json, yield.json or output directory")->required();

  TunerArgs tuner;
  auto* tuner_cmd = app.add_subcommand("serve-tuner", "serve the boundary tuning UI for one sync map");
  add_common(tuner_cmd, false);
  tuner_cmd->add_option("--source", tuner.source, "source id (sync map under the config's out_dir)");
  tuner_cmd->add_option("--syncmap", tuner.syncmap, "sync map file");
  tuner_cmd->add_option("--audio", tuner.audio, "audio file (default: the map's audio_ref)");
  tuner_cmd->add_option("--ui-dir", tuner.ui_dir, "directory with the built UI bundle");
  tuner_cmd->add_option("--host", tuner.host, "bind address")->capture_default_str();
  tuner_cmd->add_option("--port", tuner.port, "port (0 picks a free one)")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    // --help and friends exit 0; every usage error maps to 2.
    return app.exit(e) == 0 ? 0 : kExitUsage;
  }

  using forge::Stage;
  try {
    if (*run) {
      return run_stages(common, stage_arg(common.start_from, "--start-from"),
                        stage_arg(common.stop_after, "--stop-after"));
    }
    if (*ingest) return run_stages(common, Stage::ingest, Stage::ingest);
    if (*align) return run_stages(common, Stage::align, Stage::align);
    if (*validate) return run_stages(common, Stage::validate, Stage::validate);
    if (*build) return run_stages(common, Stage::transform, Stage::build);
    if (*stats_cmd) return stats(stats_input);
    if (*tuner_cmd) return serve_tuner(common, tuner);
  } catch (const forge::ConfigError& e) {
    std::fprintf(stderr, "config error: %s\n", e.what());
    return kExitUsage;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kExitFailure;
  }
  return kExitUsage;
}
