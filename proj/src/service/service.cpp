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

#include "ccid/service.hpp"

#include <httplib.h>

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <json.hpp>
#include <random>
#include <sstream>
#include <thread>

#include "ccid/errors.hpp"
#include "ccid/io.hpp"
#include "default_model.hpp"

namespace ccid::service {

namespace {

using nlohmann::json;

class HttpError : public Error {
 public:
  HttpError(int status, const std::string& message, std::string detail = {})
      : Error(message), status_(status), detail_(std::move(detail)) {}
  int status() const noexcept { return status_; }
  const std::string& detail() const noexcept { return detail_; }

 private:
  int status_;
  std::string detail_;
};

Response json_response(int status, const json& body) {
  Response r;
  r.status = status;
  r.body = body.dump();
  return r;
}

Response error_response(int status, const std::string& message, const std::string& detail = {}) {
  json body{{"error", message}};
  if (!detail.empty()) body["stderr"] = detail;
  return json_response(status, body);
}

Response png_response(std::string bytes) {
  Response r;
  r.content_type = "image/png";
  r.body = std::move(bytes);
  return r;
}

std::string to_bytes_string(const std::vector<std::uint8_t>& bytes) {
  return std::string(bytes.begin(), bytes.end());
}

std::string new_session_id() {
  static std::mutex mutex;
  static std::mt19937_64 engine{std::random_device{}()};
  std::lock_guard lock(mutex);
  std::ostringstream os;
  os << std::hex;
  for (int i = 0; i < 2; ++i) {
    const auto v = engine();
    for (int shift = 60; shift >= 0; shift -= 4) os << ((v >> shift) & 0xF);
  }
  return os.str();
}

std::vector<std::string> split_path(const std::string& path) {
  std::vector<std::string> parts;
  std::size_t start = 0;
  while (start <= path.size()) {
    const auto pos = path.find('/', start);
    const auto end = pos == std::string::npos ? path.size() : pos;
    if (end > start) parts.push_back(path.substr(start, end - start));
    if (pos == std::string::npos) break;
    start = pos + 1;
  }
  return parts;
}

const std::string* query_value(const Request& request, const std::string& key) {
  const auto it = request.query.find(key);
  return it == request.query.end() ? nullptr : &it->second;
}

double query_number(const Request& request, const std::string& key, double fallback) {
  const auto* text = query_value(request, key);
  if (!text) return fallback;
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(text->data(), text->data() + text->size(), v);
  if (ec != std::errc() || ptr != text->data() + text->size()) {
    throw HttpError(400, "query parameter " + key + " is not a number: '" + *text + "'");
  }
  return v;
}

ConfidenceSource parse_source_name(const std::string& name) {
  if (name == "oracle") return ConfidenceSource::oracle;
  if (name == "model") return ConfidenceSource::model;
  if (name == "file") return ConfidenceSource::external;
  if (name == "none") return ConfidenceSource::none;
  throw HttpError(400, "unknown confidence source '" + name + "' (oracle|model|file|none)");
}

ImagePlane decode_part(const UploadPart& part, const std::string& field) {
  try {
    return decode_image(std::span(reinterpret_cast<const std::uint8_t*>(part.content.data()),
                                  part.content.size()));
  } catch (const Error& e) {
    throw HttpError(400, "cannot decode '" + field + "': " + e.what());
  }
}

json metrics_json(const MetricReport& m) {
  json j;
  if (std::isinf(m.psnr_db)) {
    j["psnr_db"] = nullptr;  // identical images; JSON has no infinity
    j["identical"] = true;
  } else {
    j["psnr_db"] = m.psnr_db;
  }
  j["ssim"] = m.ssim;
  return j;
}

}  // namespace

std::uint16_t port_from_env() {
  const char* env = std::getenv("CCID_PORT");
  if (!env || !*env) return kDefaultPort;
  unsigned value = 0;
  const std::string_view text(env);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size() || value == 0 || value > 65535) {
    throw InvalidArgument("CCID_PORT must be a port number, got '" + std::string(text) + "'");
  }
  return static_cast<std::uint16_t>(value);
}

ConfidenceModel builtin_model() { return parse_model(kDefaultModelJson); }

std::string Response::header(const std::string& name) const {
  for (const auto& [k, v] : headers) {
    if (k == name) return v;
  }
  return {};
}

//------------------------------------------------------------------------------
// SessionStore

SessionStore::SessionStore(std::size_t capacity) : capacity_(capacity) {
  if (capacity_ == 0) throw InvalidArgument("session capacity must be positive");
}

void SessionStore::insert(std::shared_ptr<Session> session) {
  std::lock_guard lock(mutex_);
  order_.push_front(session);
  index_[session->id] = order_.begin();
  while (order_.size() > capacity_) {
    index_.erase(order_.back()->id);
    order_.pop_back();
  }
}

std::shared_ptr<Session> SessionStore::find(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(id);
  if (it == index_.end()) return nullptr;
  order_.splice(order_.begin(), order_, it->second);
  return *it->second;
}

bool SessionStore::erase(const std::string& id) {
  std::lock_guard lock(mutex_);
  const auto it = index_.find(id);
  if (it == index_.end()) return false;
  order_.erase(it->second);
  index_.erase(it);
  return true;
}

std::size_t SessionStore::size() const {
  std::lock_guard lock(mutex_);
  return order_.size();
}

//------------------------------------------------------------------------------
// Service

struct Service::Server {
  httplib::Server http;
  std::thread thread;
};

Service::Service(ServiceConfig config)
    : config_(std::move(config)), store_(config_.max_sessions) {}

Service::~Service() { stop(); }

Response Service::handle(const Request& request) {
  Response response;
  try {
    const auto parts = split_path(request.path);
    if (request.method == "OPTIONS") {
      response.status = 204;
      response.content_type.clear();
    } else if (parts.size() == 1 && parts[0] == "health" && request.method == "GET") {
      response = json_response(200, {{"status", "ok"}, {"sessions", store_.size()}});
    } else if (parts.empty() || parts[0] != "sessions") {
      response = error_response(404, "no such endpoint: " + request.path);
    } else if (parts.size() == 1) {
      response = request.method == "POST" ? create_session(request)
                                          : error_response(405, "use POST /sessions");
    } else {
      auto session = store_.find(parts[1]);
      if (!session) {
        response = error_response(404, "unknown session '" + parts[1] + "'");
      } else if (parts.size() == 2) {
        if (request.method == "DELETE") {
          store_.erase(parts[1]);
          response.status = 204;
          response.content_type.clear();
        } else {
          response = get_info(*session);
        }
      } else if (parts.size() == 3 && request.method == "GET") {
        const auto& what = parts[2];
        if (what == "noisy" || what == "reliable" || what == "deep" || what == "ground_truth") {
          response = get_plane(*session, what);
        } else if (what == "fused") {
          response = get_fused(*session, request);
        } else if (what == "metrics") {
          response = get_metrics(*session, request);
        } else if (what == "confidence") {
          response = get_confidence(*session, request);
        } else {
          response = error_response(404, "no such endpoint: " + request.path);
        }
      } else {
        response = error_response(404, "no such endpoint: " + request.path);
      }
    }
  } catch (const HttpError& e) {
    response = error_response(e.status(), e.what(), e.detail());
  } catch (const ExternalToolError& e) {
    response = error_response(502, e.what(), e.stderr_excerpt());
  } catch (const DimensionError& e) {
    response = error_response(422, e.what());
  } catch (const InvalidArgument& e) {
    response = error_response(400, e.what());
  } catch (const FormatError& e) {
    response = error_response(400, e.what());
  } catch (const json::exception& e) {
    response = error_response(400, std::string("malformed config JSON: ") + e.what());
  } catch (const std::exception& e) {
    response = error_response(500, e.what());
  }
  response.headers.emplace_back("Access-Control-Allow-Origin", config_.cors_origin);
  response.headers.emplace_back("Access-Control-Allow-Methods", "GET, POST, DELETE, OPTIONS");
  response.headers.emplace_back("Access-Control-Allow-Headers", "Content-Type");
  response.headers.emplace_back("Access-Control-Expose-Headers",
                                "X-PSNR-dB, X-SSIM, X-Fusion-Mode, X-Fusion-Weight");
  return response;
}

Response Service::create_session(const Request& request) {
  const auto noisy_part = request.parts.find("noisy");
  if (noisy_part == request.parts.end()) throw HttpError(400, "missing multipart field 'noisy'");

  json config = json::object();
  if (const auto it = request.parts.find("config"); it != request.parts.end()) {
    config = json::parse(it->second.content);
    if (!config.is_object()) throw HttpError(400, "config must be a JSON object");
  }
  const DenoiserSpec reliable = config.contains("reliable")
                                    ? parse_denoiser_spec(config["reliable"].get<std::string>())
                                    : config_.default_reliable;
  const DenoiserSpec deep = config.contains("deep")
                                ? parse_denoiser_spec(config["deep"].get<std::string>())
                                : config_.default_deep;
  FusionParams defaults;
  defaults.a = config.value("a", defaults.a);
  defaults.eps = config.value("eps", defaults.eps);
  defaults.t = config.value("t", defaults.t);
  defaults.levels = config.value("levels", defaults.levels);
  if (config.contains("wavelet")) {
    defaults.wavelet = parse_wavelet(config["wavelet"].get<std::string>());
  }
  defaults.validate();

  ImagePlane noisy = decode_part(noisy_part->second, "noisy");
  std::optional<ImagePlane> clean;
  if (const auto it = request.parts.find("ground_truth"); it != request.parts.end()) {
    clean = decode_part(it->second, "ground_truth");
  }
  std::optional<ConfidenceMap> uploaded_conf;
  if (const auto it = request.parts.find("confidence"); it != request.parts.end()) {
    try {
      uploaded_conf = parse_confidence(it->second.content);
    } catch (const Error& e) {
      throw HttpError(400, std::string("malformed confidence map: ") + e.what());
    }
  }

  auto session = std::make_shared<Session>();
  session->id = new_session_id();
  const std::string name = noisy_part->second.filename.empty()
                               ? std::string("upload")
                               : std::filesystem::path(noisy_part->second.filename).stem().string();
  if (const auto it = request.parts.find("deep"); it != request.parts.end()) {
    const ImagePlane deep_plane = decode_part(it->second, "deep");
    session->scene =
        make_scene_with_deep(name, std::move(clean), std::move(noisy), reliable, deep_plane);
  } else {
    session->scene = make_scene(name, std::move(clean), std::move(noisy), reliable, deep);
  }
  if (config.value("clamp_deep", false)) {
    session->scene.deep = clamp_deep_output(session->scene.noisy, session->scene.deep);
  }
  const Scene& scene = session->scene;
  session->defaults = defaults;

  if (scene.clean) session->confidence[ConfidenceSource::oracle] = oracle_confidence(scene);
  if (uploaded_conf) {
    const auto [gw, gh] = confidence_grid_dims(scene.noisy.width(), scene.noisy.height());
    if (uploaded_conf->grid_width != gw || uploaded_conf->grid_height != gh) {
      throw DimensionError("uploaded confidence map does not match the image grid");
    }
    session->confidence[ConfidenceSource::external] = *uploaded_conf;
  }
  if (config_.model) {
    session->confidence[ConfidenceSource::model] = model_confidence(*config_.model, scene);
  }
  session->engine = std::make_unique<FusionEngine>(scene.deep.denoised, scene.reliable);
  store_.insert(session);

  Response r = get_info(*session);
  r.status = 201;
  return r;
}

Response Service::get_info(const Session& session) {
  json sources = json::array();
  for (const auto& [source, map] : session.confidence) sources.push_back(to_string(source));
  return json_response(200, {{"id", session.id},
                             {"width", session.scene.noisy.width()},
                             {"height", session.scene.noisy.height()},
                             {"has_ground_truth", session.scene.clean.has_value()},
                             {"confidence_sources", sources},
                             {"a", session.defaults.a},
                             {"eps", session.defaults.eps},
                             {"t", session.defaults.t}});
}

Response Service::get_plane(Session& session, const std::string& which) {
  const Scene& s = session.scene;
  if (which == "ground_truth") {
    if (!s.clean) throw HttpError(409, "session has no ground truth");
    return png_response(to_bytes_string(encode_png(*s.clean)));
  }
  const ImagePlane& plane = which == "noisy" ? s.noisy
                            : which == "reliable" ? s.reliable
                                                  : s.deep.denoised;
  return png_response(to_bytes_string(encode_png(plane)));
}

std::shared_ptr<const FusedEntry> Service::fused_entry(Session& session, const FusionParams& params,
                                                       const std::string& conf_name) {
  const std::string key = std::string(to_string(params.mode)) + "|" + format_metric(params.w) +
                          "|" + std::string(to_string(params.schedule)) + "|" + conf_name;
  {
    std::lock_guard lock(session.cache_mutex);
    if (auto it = session.fused_cache.find(key); it != session.fused_cache.end()) return it->second;
  }
  const ConfidenceMap* conf = nullptr;
  if (params.mode == FusionMode::dwt_confidence && conf_name != "none") {
    const auto it = session.confidence.find(parse_source_name(conf_name));
    conf = &it->second;
  }
  const ImagePlane fused = session.engine->fuse(params, conf);
  auto entry = std::make_shared<FusedEntry>();
  entry->png = to_bytes_string(encode_png(fused));
  if (session.scene.clean) entry->metrics = evaluate(fused, *session.scene.clean, true);
  std::lock_guard lock(session.cache_mutex);
  return session.fused_cache.emplace(key, std::move(entry)).first->second;
}

namespace {

struct FusedQuery {
  FusionParams params;
  std::string conf;
};

FusedQuery parse_fused_query(const Session& session, const Request& request) {
  FusedQuery q;
  q.params = session.defaults;
  try {
    if (const auto* mode = query_value(request, "mode")) q.params.mode = parse_fusion_mode(*mode);
    if (const auto* sched = query_value(request, "schedule")) {
      q.params.schedule = parse_schedule(*sched);
    }
  } catch (const InvalidArgument& e) {
    throw HttpError(400, e.what());
  }
  q.params.w = query_number(request, "w", 0.5);
  if (!(q.params.w >= 0.0 && q.params.w <= 1.0)) throw HttpError(400, "w must lie in [0,1]");
  const auto* conf = query_value(request, "conf");
  q.conf = conf ? *conf : "none";
  const ConfidenceSource source = parse_source_name(q.conf);
  if (q.params.mode != FusionMode::dwt_confidence) {
    q.conf = "none";
  } else if (source != ConfidenceSource::none && !session.confidence.contains(source)) {
    throw HttpError(409, "confidence source '" + q.conf + "' is not available for this session");
  }
  return q;
}

}  // namespace

Response Service::get_fused(Session& session, const Request& request) {
  const FusedQuery q = parse_fused_query(session, request);
  const auto entry = fused_entry(session, q.params, q.conf);
  Response r = png_response(entry->png);
  if (entry->metrics) {
    r.headers.emplace_back("X-PSNR-dB", format_metric(entry->metrics->psnr_db));
    r.headers.emplace_back("X-SSIM", format_metric(entry->metrics->ssim));
  }
  r.headers.emplace_back("X-Fusion-Mode", std::string(to_string(q.params.mode)));
  r.headers.emplace_back("X-Fusion-Weight", format_metric(q.params.w));
  return r;
}

Response Service::get_metrics(Session& session, const Request& request) {
  if (!session.scene.clean) throw HttpError(409, "metrics need a ground-truth image");
  const FusedQuery q = parse_fused_query(session, request);
  const auto entry = fused_entry(session, q.params, q.conf);
  return json_response(200, metrics_json(*entry->metrics));
}

Response Service::get_confidence(Session& session, const Request& request) {
  ConfidenceSource source = ConfidenceSource::none;
  if (const auto* name = query_value(request, "source")) {
    source = parse_source_name(*name);
    if (source == ConfidenceSource::none) throw HttpError(400, "source=none has no map");
  } else {
    for (const auto s :
         {ConfidenceSource::oracle, ConfidenceSource::external, ConfidenceSource::model}) {
      if (session.confidence.contains(s)) {
        source = s;
        break;
      }
    }
    if (source == ConfidenceSource::none) {
      throw HttpError(409, "no confidence source is available for this session");
    }
  }
  const auto it = session.confidence.find(source);
  if (it == session.confidence.end()) {
    throw HttpError(409, "confidence source '" + std::string(to_string(source)) +
                             "' is not available for this session");
  }
  const double threshold = query_number(request, "threshold", kOverlayThreshold);
  if (!(threshold > 0.0 && threshold < 1.0)) throw HttpError(400, "threshold must lie in (0,1)");
  const auto* format = query_value(request, "format");
  if (format && *format == "cmap") {
    Response r;
    r.content_type = "text/plain";
    r.body = format_confidence(it->second);
    return r;
  }
  if (format && *format != "png") throw HttpError(400, "format must be png or cmap");
  const auto& noisy = session.scene.noisy;
  return png_response(
      to_bytes_string(encode_png(render_overlay(it->second, threshold, noisy.width(),
                                                noisy.height()))));
}

//------------------------------------------------------------------------------
// HTTP binding

namespace {

Request convert(const httplib::Request& req) {
  Request r;
  r.method = req.method;
  r.path = req.path;
  for (const auto& [k, v] : req.params) r.query.emplace(k, v);
  for (const auto& [k, f] : req.files) r.parts.emplace(k, UploadPart{f.content, f.filename});
  return r;
}

void emit(const Response& r, httplib::Response& res) {
  res.status = r.status;
  for (const auto& [k, v] : r.headers) res.set_header(k, v);
  if (!r.content_type.empty()) res.set_content(r.body, r.content_type);
}

}  // namespace

void Service::install_routes(Server& server) {
  auto& http = server.http;
  http.set_payload_max_length(kMaxUploadBytes);
  const auto route = [this](const httplib::Request& req, httplib::Response& res) {
    emit(handle(convert(req)), res);
  };
  http.Get(".*", route);
  http.Post(".*", route);
  http.Delete(".*", route);
  http.Options(".*", route);
  if (!config_.app_dir.empty() && !http.set_mount_point("/app", config_.app_dir.string())) {
    throw IoError("cannot serve " + config_.app_dir.string());
  }
}

void Service::listen(const std::string& host, std::uint16_t port) {
  if (server_) throw Error("service already started");
  server_ = std::make_unique<Server>();
  install_routes(*server_);
  if (!server_->http.listen(host, port)) {
    throw IoError("cannot listen on " + host + ":" + std::to_string(port));
  }
}

std::uint16_t Service::start_background(const std::string& host) {
  if (server_) throw Error("service already started");
  server_ = std::make_unique<Server>();
  install_routes(*server_);
  auto& http = server_->http;
  const int port = http.bind_to_any_port(host);
  if (port < 0) throw IoError("cannot bind " + host);
  server_->thread = std::thread([&http] { http.listen_after_bind(); });
  http.wait_until_ready();
  return static_cast<std::uint16_t>(port);
}

void Service::stop() {
  if (!server_) return;
  server_->http.stop();
  if (server_->thread.joinable()) server_->thread.join();
  server_.reset();
}

}  // namespace ccid::service
