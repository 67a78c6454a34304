#include "forge/pipeline_config.hpp"

#include <set>
#include <stdexcept>

#include "json.hpp"

#include "forge/error.hpp"
#include "forge/file_io.hpp"

namespace forge {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void expect_keys(const json& obj, const std::string& where, std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& [key, _] : obj.items()) {
    bool known = false;
    for (auto a : allowed) known = known || key == a;
    if (!known) throw ConfigError(where + "/" + key + ": unknown key");
  }
}

std::string get_string(const json& obj, const std::string& where, const char* key, bool required,
                       std::string fallback = {}) {
  if (!obj.contains(key)) {
    if (required) throw ConfigError(where + "/" + key + ": missing required key");
    return fallback;
  }
  const auto& v = obj[key];
  if (!v.is_string()) throw ConfigError(where + "/" + key + ": expected a string");
  return v.get<std::string>();
}

std::int64_t get_int(const json& obj, const std::string& where, const char* key, std::int64_t fallback) {
  if (!obj.contains(key)) return fallback;
  const auto& v = obj[key];
  if (!v.is_number_integer()) throw ConfigError(where + "/" + key + ": expected an integer");
  return v.get<std::int64_t>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  const fs::path path(p);
  return path.is_absolute() ? path : base / path;
}

StreamSource parse_stream(const json& v, const std::string& where, const fs::path& base) {
  StreamSource s;
  if (v.is_string()) {
    s.path = resolve(base, v.get<std::string>());
    return s;
  }
  expect_keys(v, where, {"path", "fetch", "url"});
  const bool has_path = v.contains("path");
  const bool has_fetch = v.contains("fetch");
  if (has_path == has_fetch) throw ConfigError(where + ": exactly one of \"path\" or \"fetch\" is required");
  if (has_path) s.path = resolve(base, get_string(v, where, "path", true));
  if (has_fetch) s.fetch = get_string(v, where, "fetch", true);
  s.url = get_string(v, where, "url", false);
  return s;
}

bool valid_source_id(std::string_view id) {
  if (id.empty() || id.front() == '.') return false;
  for (char c : id) {
    const bool ok = (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') || (c >= '0' && c <= '9') || c == '-' ||
                    c == '_' || c == '.';
    if (!ok) return false;
  }
  return true;
}

}  // namespace

PipelineConfig parse_config(std::string_view text, const fs::path& base_dir) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("config is not valid JSON: ") + e.what());
  }
  expect_keys(doc, "", {"version", "out_dir", "corpus_name", "license", "converter_command", "snap_window_ms",
                        "validation", "backend", "parallelism", "sources"});
  if (!doc.contains("version")) throw ConfigError("/version: missing required key");
  if (get_int(doc, "", "version", 0) != 1) throw ConfigError("/version: unsupported version");

  PipelineConfig c;
  c.out_dir = resolve(base_dir, get_string(doc, "", "out_dir", false, "out"));
  c.corpus_name = get_string(doc, "", "corpus_name", false, c.corpus_name);
  c.license = get_string(doc, "", "license", false);
  c.converter_command = get_string(doc, "", "converter_command", false);
  c.snap_window_ms = static_cast<int>(get_int(doc, "", "snap_window_ms", c.snap_window_ms));
  c.parallelism = static_cast<int>(get_int(doc, "", "parallelism", c.parallelism));

  if (doc.contains("validation")) {
    const auto& v = doc["validation"];
    expect_keys(v, "/validation", {"cer_threshold", "min_duration_ms", "max_duration_ms", "language_code"});
    if (v.contains("cer_threshold")) {
      if (!v["cer_threshold"].is_number()) throw ConfigError("/validation/cer_threshold: expected a number");
      c.validation.cer_threshold = v["cer_threshold"].get<double>();
    }
    c.validation.min_duration = TimeMs(get_int(v, "/validation", "min_duration_ms", c.validation.min_duration.count()));
    c.validation.max_duration = TimeMs(get_int(v, "/validation", "max_duration_ms", c.validation.max_duration.count()));
    c.validation.language_code = get_string(v, "/validation", "language_code", false, c.validation.language_code);
  }

  if (doc.contains("backend")) {
    const auto& b = doc["backend"];
    expect_keys(b, "/backend", {"type", "table", "url", "api_key_env"});
    const std::string type = get_string(b, "/backend", "type", true);
    if (type == "mock") {
      c.backend.kind = BackendConfig::Kind::mock;
      c.backend.mock_table = resolve(base_dir, get_string(b, "/backend", "table", true));
    } else if (type == "http") {
      c.backend.kind = BackendConfig::Kind::http;
      c.backend.url = get_string(b, "/backend", "url", true);
      c.backend.api_key_env = get_string(b, "/backend", "api_key_env", false);
    } else {
      throw ConfigError("/backend/type: expected \"mock\" or \"http\"");
    }
  }

  if (doc.contains("sources")) {
    const auto& list = doc["sources"];
    if (!list.is_array()) throw ConfigError("/sources: expected an array");
    for (std::size_t i = 0; i < list.size(); ++i) {
      const std::string where = "/sources/" + std::to_string(i);
      const auto& s = list[i];
      expect_keys(s, where, {"source_id", "media", "subtitle", "language_code"});
      SourceSpec spec;
      spec.source_id = get_string(s, where, "source_id", true);
      if (!s.contains("media")) throw ConfigError(where + "/media: missing required key");
      if (!s.contains("subtitle")) throw ConfigError(where + "/subtitle: missing required key");
      spec.media = parse_stream(s["media"], where + "/media", base_dir);
      spec.subtitle = parse_stream(s["subtitle"], where + "/subtitle", base_dir);
      spec.language_code = get_string(s, where, "language_code", false);
      c.sources.push_back(std::move(spec));
    }
  }

  check_config(c);
  return c;
}

PipelineConfig load_config(const fs::path& path) {
  return parse_config(read_file(path), fs::absolute(path).parent_path());
}

void check_config(const PipelineConfig& c) {
  if (c.parallelism < 1) throw ConfigError("/parallelism: must be >= 1");
  if (c.snap_window_ms < 0) throw ConfigError("/snap_window_ms: must be >= 0");
  try {
    c.validation.check();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("/validation: ") + e.what());
  }
  if (!c.converter_command.empty() && (c.converter_command.find("{in}") == std::string::npos ||
                                       c.converter_command.find("{out}") == std::string::npos)) {
    throw ConfigError("/converter_command: template needs both {in} and {out}");
  }
  std::set<std::string> seen;
  for (const auto& s : c.sources) {
    if (!valid_source_id(s.source_id)) {
      throw ConfigError("source id \"" + s.source_id + "\" must be non-empty and use only [A-Za-z0-9._-]");
    }
    if (!seen.insert(s.source_id).second) throw ConfigError("duplicate source id \"" + s.source_id + "\"");
    for (const StreamSource* stream : {&s.media, &s.subtitle}) {
      if (stream->fetch && stream->fetch->find("{out}") == std::string::npos) {
        throw ConfigError("source " + s.source_id + ": fetch template lacks {out}");
      }
    }
  }
}

}  // namespace forge
