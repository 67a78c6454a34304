#pragma once

#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "forge/alignment.hpp"
#include "forge/validation.hpp"

namespace forge {

// Where a stream comes from: a local file, or a command template that writes
// it to {out}. Templates may also use {url} and {source_id}.
struct StreamSource {
  std::optional<std::filesystem::path> path;
  std::optional<std::string> fetch;
  std::string url;

  bool is_fetch() const noexcept { return fetch.has_value(); }
};

struct SourceSpec {
  std::string source_id;
  StreamSource media;
  StreamSource subtitle;
  std::string language_code;  // empty: the validation policy's language
};

struct BackendConfig {
  enum class Kind { mock, http };
  Kind kind = Kind::mock;
  std::filesystem::path mock_table;
  std::string url;
  std::string api_key_env;
};

struct PipelineConfig {
  std::vector<SourceSpec> sources;
  std::string converter_command;  // empty: only WAV media is accepted
  int snap_window_ms = kDefaultSnapWindowMs;
  ValidationPolicy validation;
  BackendConfig backend;
  int parallelism = 1;
  std::filesystem::path out_dir = "out";
  std::string corpus_name = "corpus";
  std::string license;
};

// Parses the version 1 JSON schema. Relative paths resolve against
// `base_dir` (the directory holding the config file).
// Throws ConfigError with the offending key.
PipelineConfig parse_config(std::string_view json, const std::filesystem::path& base_dir);
PipelineConfig load_config(const std::filesystem::path& path);

// Throws ConfigError: duplicate or malformed source ids, templates without
// {out}, a converter without {in}/{out}, parallelism < 1, bad policy values.
void check_config(const PipelineConfig& config);

}  // namespace forge
