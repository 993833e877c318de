#pragma once

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <string>
#include <vector>

#include "mexpr/codec.hpp"
#include "mexpr/json_io.hpp"
#include "mexpr/project_store.hpp"
#include "mexpr/reenactment.hpp"
#include "mexpr/session.hpp"

namespace mexpr {

struct ServiceConfig {
  std::filesystem::path project_dir;          // empty: in-memory project
  std::vector<std::string> external_engines;  // "label=command"
  std::string detector;                       // default detector spec
  SessionOptions session_options;
};

// The pipeline behind the request/response surface. Request and response
// bodies are JSON documents; image payloads are PNG bytes. Errors are thrown
// as mexpr::Error and mapped to ApiError by the transport.
class Service {
 public:
  explicit Service(ServiceConfig config);

  Json create_panel(const Bytes& png);
  Json auto_detect(const std::string& panel_id, const Json& request);
  Json manual_region(const std::string& panel_id, const Json& request);
  Json create_mapping(const Json& request);
  Json request_frames(const std::string& session_id, const Json& request);
  Json get_status(const std::string& session_id) const;
  Bytes get_frame(const std::string& session_id, int index) const;
  Json set_session_params(const std::string& session_id, const Json& request);
  Json select_keyframe(const std::string& session_id, const Json& request);
  Json commit_session(const std::string& session_id);
  Json compose_panel(const std::string& panel_id, const Json& request);
  // Panel id or composition id.
  Bytes export_asset(const std::string& id) const;
  Json list_engines() const;

  // Blocks until the session has no queued or running generation.
  void wait_session(const std::string& session_id) const;

  Project project() const;

 private:
  std::shared_ptr<MappingSession> session(const std::string& session_id) const;
  const RasterImage& panel_image_locked(const std::string& panel_id);
  int next_face_index_locked(const std::string& panel_id) const;
  void persist_locked();

  ServiceConfig config_;
  EngineRegistry engines_;
  mutable std::mutex mutex_;
  Project project_;
  std::map<std::string, RasterImage> panel_cache_;
  std::map<std::string, std::shared_ptr<MappingSession>> sessions_;
  int panel_counter_ = 0;
  int session_counter_ = 0;
  int mapped_counter_ = 0;
  int composed_counter_ = 0;
};

// Machine-readable error body: {code, message, retryable}.
Json api_error(const Error& error);
int http_status(ErrorCode code);

// HTTP binding for Service. Runs on a background thread until stop().
class HttpServer {
 public:
  explicit HttpServer(Service& service);
  ~HttpServer();
  HttpServer(const HttpServer&) = delete;
  HttpServer& operator=(const HttpServer&) = delete;

  // Binds (port 0 picks a free port) and starts serving. Returns the port.
  int start(const std::string& host, int port);
  // Serves on the calling thread until stop() is called elsewhere.
  void run(const std::string& host, int port);
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace mexpr
