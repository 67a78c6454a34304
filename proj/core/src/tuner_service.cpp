#include "forge/tuner_service.hpp"

#include <mutex>
#include <shared_mutex>

#include "httplib.h"
#include "json.hpp"

#include "forge/alignment.hpp"
#include "forge/error.hpp"
#include "forge/file_io.hpp"

namespace forge {
namespace fs = std::filesystem;

namespace {

constexpr char kJson[] = "application/json; charset=utf-8";

constexpr char kStubPage[] = R"(<!doctype html>
<html><head><meta charset="utf-8"><title>forge tuner</title></head>
<body><p>No UI bundle configured. The API is at <a href="/api/syncmap">/api/syncmap</a>
and <a href="/api/audio">/api/audio</a>.</p></body></html>
)";

std::string error_body(const std::string& message) {
  return nlohmann::json{{"error", message}}.dump() + "\n";
}

}  // namespace

struct TunerService::Impl {
  Options options;
  fs::path audio_path;
  std::string audio_bytes;
  mutable std::shared_mutex mutex;
  SyncMap current;
  std::string current_json;
  httplib::Server server;
  int bound_port = -1;
  // stop() may race listen() starting up; httplib ignores a stop that
  // arrives before the accept loop runs, so both sides agree under this lock.
  std::mutex lifecycle;
  bool stop_requested = false;
  bool listening = false;
};

TunerService::TunerService(Options options) : impl_(std::make_unique<Impl>()) {
  impl_->options = std::move(options);
  impl_->current = load_sync_map(read_file(impl_->options.sync_map));
  impl_->current_json = save_sync_map(impl_->current);
  impl_->audio_path = impl_->options.audio.empty()
                          ? impl_->options.sync_map.parent_path() / impl_->current.audio_ref
                          : impl_->options.audio;
  impl_->audio_bytes = read_file(impl_->audio_path);

  auto& srv = impl_->server;
  // httplib's default sets SO_REUSEPORT, which lets a second tuner share the
  // port silently; plain SO_REUSEADDR makes that a bind failure.
  srv.set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, &yes, sizeof(yes));
  });
  if (impl_->options.ui_dir) {
    if (!srv.set_mount_point("/", impl_->options.ui_dir->string())) {
      throw IoError("UI directory not found: " + impl_->options.ui_dir->string());
    }
  } else {
    srv.Get("/", [](const httplib::Request&, httplib::Response& res) { res.set_content(kStubPage, "text/html"); });
  }
  srv.Get("/api/syncmap", [this](const httplib::Request&, httplib::Response& res) {
    const Reply r = get_sync_map();
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  srv.Post("/api/syncmap", [this](const httplib::Request& req, httplib::Response& res) {
    const Reply r = post_sync_map(req.body);
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  });
  // Status left unset so the server answers a Range request with 206.
  srv.Get("/api/audio", [this](const httplib::Request&, httplib::Response& res) {
    res.set_header("Accept-Ranges", "bytes");
    res.set_content(impl_->audio_bytes, "audio/wav");
  });
}

TunerService::~TunerService() { stop(); }

int TunerService::bind() {
  auto& srv = impl_->server;
  const auto& opt = impl_->options;
  if (opt.port == 0) {
    impl_->bound_port = srv.bind_to_any_port(opt.host);
  } else {
    impl_->bound_port = srv.bind_to_port(opt.host, opt.port) ? opt.port : -1;
  }
  if (impl_->bound_port < 0) {
    throw PortInUse("cannot bind " + opt.host + ":" + std::to_string(opt.port));
  }
  return impl_->bound_port;
}

void TunerService::listen() {
  if (impl_->bound_port < 0) bind();
  {
    std::lock_guard lock(impl_->lifecycle);
    if (impl_->stop_requested) return;
    impl_->listening = true;
  }
  impl_->server.listen_after_bind();
}

void TunerService::stop() {
  if (!impl_) return;
  {
    std::lock_guard lock(impl_->lifecycle);
    impl_->stop_requested = true;
    if (!impl_->listening) return;
  }
  impl_->server.wait_until_ready();
  impl_->server.stop();
}

TunerService::Reply TunerService::get_sync_map() const {
  std::shared_lock lock(impl_->mutex);
  return {200, kJson, impl_->current_json};
}

TunerService::Reply TunerService::post_sync_map(std::string_view body) {
  SyncMap proposed;
  try {
    proposed = load_sync_map(body);
  } catch (const SchemaError& e) {
    nlohmann::json j{{"error", e.what()}, {"location", e.location()}};
    return {400, kJson, j.dump() + "\n"};
  } catch (const InvariantViolation& e) {
    nlohmann::json j{{"error", e.what()}, {"entry_id", e.entry_id()}, {"invariant", e.invariant()}};
    return {422, kJson, j.dump() + "\n"};
  }

  std::unique_lock lock(impl_->mutex);
  try {
    check_replacement(impl_->current, proposed);
  } catch (const InvariantViolation& e) {
    nlohmann::json j{{"error", e.what()}, {"entry_id", e.entry_id()}, {"invariant", e.invariant()}};
    return {422, kJson, j.dump() + "\n"};
  }
  for (std::size_t i = 0; i < proposed.entries.size(); ++i) {
    const SyncEntry& was = impl_->current.entries[i];
    SyncEntry& now = proposed.entries[i];
    if (now.begin != was.begin || now.end != was.end) now.origin = EntryOrigin::manual;
  }
  std::string json = save_sync_map(proposed);
  try {
    write_file_atomic(impl_->options.sync_map, json);
  } catch (const Error& e) {
    return {500, kJson, error_body(e.what())};
  }
  impl_->current = std::move(proposed);
  impl_->current_json = std::move(json);
  return {200, kJson, impl_->current_json};
}

}  // namespace forge
