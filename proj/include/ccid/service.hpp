/*
Copyright 2026 The CCID Workbench Authors

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

                http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
*/

#pragma once

#include <cstdint>
#include <filesystem>
#include <list>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "ccid/confidence.hpp"
#include "ccid/denoisers.hpp"
#include "ccid/fusion.hpp"
#include "ccid/metrics.hpp"
#include "ccid/pipeline.hpp"

namespace ccid::service {

inline constexpr std::uint16_t kDefaultPort = 8787;
inline constexpr std::size_t kDefaultMaxSessions = 16;
inline constexpr std::size_t kMaxUploadBytes = 16u << 20;

/// Port from CCID_PORT, falling back to 8787.
std::uint16_t port_from_env();

struct ServiceConfig {
  std::size_t max_sessions = kDefaultMaxSessions;
  std::optional<ConfidenceModel> model;  // enables the "model" confidence source
  DenoiserSpec default_reliable;         // gaussian:4
  DenoiserSpec default_deep = parse_denoiser_spec("mock:identity");
  std::filesystem::path app_dir;  // served under /app when set
  std::string cors_origin = "*";
};

/// Built-in surrogate model, fitted on the bundled fixtures.
ConfidenceModel builtin_model();

struct UploadPart {
  std::string content;
  std::string filename;
};

/// Transport-neutral request, so handlers can be exercised without sockets.
struct Request {
  std::string method;  // GET, POST, DELETE, OPTIONS
  std::string path;
  std::map<std::string, std::string> query;
  std::map<std::string, UploadPart> parts;  // multipart fields by name
};

struct Response {
  int status = 200;
  std::string content_type = "application/json";
  std::string body;
  std::vector<std::pair<std::string, std::string>> headers;

  std::string header(const std::string& name) const;
};

struct FusedEntry {
  std::string png;
  std::optional<MetricReport> metrics;  // present when the session has ground truth
};

struct Session {
  std::string id;
  Scene scene;
  FusionParams defaults;  // a, eps, t, wavelet, levels from the upload config
  std::map<ConfidenceSource, ConfidenceMap> confidence;
  std::unique_ptr<FusionEngine> engine;
  std::mutex cache_mutex;
  std::map<std::string, std::shared_ptr<const FusedEntry>> fused_cache;
};

/// Sessions with least-recently-used eviction.
class SessionStore {
 public:
  explicit SessionStore(std::size_t capacity);

  void insert(std::shared_ptr<Session> session);
  std::shared_ptr<Session> find(const std::string& id);  // refreshes recency
  bool erase(const std::string& id);
  std::size_t size() const;

 private:
  mutable std::mutex mutex_;
  std::size_t capacity_;
  std::list<std::shared_ptr<Session>> order_;  // front = most recent
  std::unordered_map<std::string, std::list<std::shared_ptr<Session>>::iterator> index_;
};

class Service {
 public:
  explicit Service(ServiceConfig config);

  /// Routes one request. Thread-safe.
  Response handle(const Request& request);

  /// Blocks serving HTTP on host:port until stop() is called.
  void listen(const std::string& host, std::uint16_t port);
  /// Binds an ephemeral port and serves on a background thread; returns the port.
  std::uint16_t start_background(const std::string& host = "127.0.0.1");
  void stop();

  ~Service();

 private:
  struct Server;

  void install_routes(Server& server);
  Response create_session(const Request& request);
  Response get_plane(Session& session, const std::string& which);
  Response get_fused(Session& session, const Request& request);
  Response get_metrics(Session& session, const Request& request);
  Response get_confidence(Session& session, const Request& request);
  Response get_info(const Session& session);

  std::shared_ptr<const FusedEntry> fused_entry(Session& session, const FusionParams& params,
                                                const std::string& conf_name);

  ServiceConfig config_;
  SessionStore store_;
  std::unique_ptr<Server> server_;
};

}  // namespace ccid::service
