#pragma once

#include "patchsmith/pipeline.hpp"

#include <filesystem>
#include <memory>
#include <string>

namespace patchsmith {

struct ServerOptions {
  std::string address = "127.0.0.1";
  unsigned short port = 8080;  // 0 picks a free port
  PipelineConfig config;       // used for every new session
  std::filesystem::path static_root;  // served for other GET paths when set
};

/// HTTP + WebSocket front end for modeling sessions.
///
///   POST /session                  body: OBJ; returns {id, revision, ...}
///   GET  /session/{id}/export.obj  current tessellation
///   GET  /session/{id}/defects.csv ?metric=c1|g1|c2|ring (default c1)
///   GET  /session/{id}/ws          WebSocket upgrade
///
/// On the WebSocket the server first sends a full update. Each update is a
/// text frame with the update header followed by three binary frames per
/// patch (positions, normals, indices). Clients send edit messages as text;
/// `{"op":"full_sync"}` asks for a full update. A rejected edit is answered
/// with `{"type":"error", kind, message, revision}`.
class Server {
 public:
  explicit Server(ServerOptions options);
  ~Server();
  Server(const Server&) = delete;
  Server& operator=(const Server&) = delete;

  /// Binds and starts accepting on a background thread; returns the port.
  unsigned short start();
  /// Closes the listener and all open connections.
  void stop();
  /// Blocks until stop() is called.
  void wait();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace patchsmith
