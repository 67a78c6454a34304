#pragma once

#include <filesystem>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

namespace forge {

// HTTP backend of the boundary tuning UI, serving one sync map and its audio.
//   GET  /api/syncmap   canonical sync-map JSON
//   POST /api/syncmap   whole-document replace: 400 on a schema error, 422
//                       {"error","entry_id","invariant"} on an invariant
//                       violation, otherwise the file is rewritten atomically
//   GET  /api/audio     WAV bytes, byte ranges honoured
//   GET  /              the UI bundle from ui_dir, or a stub page
// One writer at a time; readers run concurrently.
class TunerService {
 public:
  struct Options {
    std::filesystem::path sync_map;
    std::filesystem::path audio;  // empty: the map's audio_ref next to the map
    std::optional<std::filesystem::path> ui_dir;
    std::string host = "127.0.0.1";
    int port = 8765;  // 0 picks a free port
  };

  struct Reply {
    int status = 200;
    std::string content_type;
    std::string body;
  };

  // Loads and checks the map and audio. Throws IoError, SchemaError,
  // InvariantViolation.
  explicit TunerService(Options options);
  ~TunerService();
  TunerService(const TunerService&) = delete;
  TunerService& operator=(const TunerService&) = delete;

  // Binds the socket and returns the port. Throws PortInUse.
  int bind();
  // Serves until stop(). Call bind() first.
  void listen();
  void stop();

  // The handlers, usable without a socket.
  Reply get_sync_map() const;
  Reply post_sync_map(std::string_view body);

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace forge
