#include "tableforge/app/service.hpp"

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iterator>

#include <httplib.h>

#include "tableforge/error.hpp"

namespace tableforge::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void send_json(httplib::Response& res, const json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& message) {
  send_json(res, {{"error", message}}, status);
}

std::string utc_now() {
  const std::time_t t = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&t, &tm);
  char buf[32];
  std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

}  // namespace

ReviewService::ReviewService(Corpus corpus, std::vector<Flag> flags, std::string ui_dir)
    : server_(std::make_unique<httplib::Server>()), corpus_(std::move(corpus)), ui_dir_(std::move(ui_dir)) {
  review_.instances = corpus_.manifest.instances;
  review_.flags = std::move(flags);
  // SO_REUSEPORT (the library default) would let a second server share a busy port.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const void*>(&yes), sizeof(yes));
  });
  routes();
}

ReviewService::~ReviewService() = default;

bool ReviewService::bind(const std::string& host, int port) {
  if (port == 0) {
    port_ = server_->bind_to_any_port(host);
    return port_ > 0;
  }
  if (!server_->bind_to_port(host, port)) return false;
  port_ = port;
  return true;
}

void ReviewService::run() { server_->listen_after_bind(); }

void ReviewService::wait_until_ready() { server_->wait_until_ready(); }

void ReviewService::stop() { server_->stop(); }

void ReviewService::routes() {
  server_->Get("/api/flags", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    json out = json::array();
    for (const auto& f : review_.flags) out.push_back(to_json(f));
    send_json(res, out);
  });

  server_->Get(R"(/api/instances/([^/]+))", [this](const httplib::Request& req, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    const std::string id = req.matches[1];
    for (const auto& in : review_.instances) {
      if (in.id != id) continue;
      json flags = json::array();
      for (const auto& f : review_.flags) {
        if (f.instance_id == id) flags.push_back(to_json(f));
      }
      json body = {{"instance", to_json(in)}, {"image_url", "/api/images/" + id + ".png"}, {"flags", flags}};
      if (auto t = corpus_.tables.find(in.table_id); t != corpus_.tables.end()) body["region_map"] = to_json(t->second.map);
      send_json(res, body);
      return;
    }
    send_error(res, 404, "no instance '" + id + "'");
  });

  server_->Get(R"(/api/images/([^/]+)\.png)", [this](const httplib::Request& req, httplib::Response& res) {
    std::string path;
    {
      std::lock_guard lock(mutex_);
      const std::string id = req.matches[1];
      for (const auto& in : review_.instances) {
        if (in.id == id) path = in.image;
      }
    }
    std::ifstream f(path, std::ios::binary);
    if (path.empty() || !f) {
      send_error(res, 404, "no image for '" + std::string(req.matches[1]) + "'");
      return;
    }
    res.set_content(std::string(std::istreambuf_iterator<char>(f), std::istreambuf_iterator<char>()), "image/png");
  });

  server_->Get("/api/stats", [this](const httplib::Request&, httplib::Response& res) {
    std::lock_guard lock(mutex_);
    try {
      send_json(res, to_json(compute_stats(corpus_.manifest, corpus_.tables)));
    } catch (const Error& e) {
      send_error(res, 409, e.what());
    }
  });

  server_->Post("/api/decisions", [this](const httplib::Request& req, httplib::Response& res) {
    ReviewDecision d;
    try {
      d = decision_from_json(json::parse(req.body));
    } catch (const json::exception& e) {
      send_error(res, 400, std::string("malformed JSON: ") + e.what());
      return;
    } catch (const Error& e) {
      send_error(res, 400, e.what());
      return;
    }
    if (d.timestamp.empty()) d.timestamp = utc_now();
    std::lock_guard lock(mutex_);
    std::vector<Flag> open;
    try {
      open = apply_decision(review_, d, corpus_.tables);
    } catch (const Error& e) {
      send_error(res, e.code() == ErrorCode::kUnknownInstance ? 404 : 400, e.what());
      return;
    }
    try {
      append_audit_log((fs::path(corpus_.dir) / kAuditLogFile).string(), d);
      corpus_.manifest.instances = review_.instances;
      if (d.action == ReviewAction::kDrop) corpus_.manifest.split.erase(d.instance_id);
      save_corpus(corpus_);
      write_flags((fs::path(corpus_.dir) / kFlagsFile).string(), review_.flags);
    } catch (const Error& e) {
      send_error(res, 500, e.what());
      return;
    }
    json flags = json::array();
    for (const auto& f : open) flags.push_back(to_json(f));
    send_json(res, {{"ok", true}, {"decision", to_json(d)}, {"flags", flags}});
  });

  if (!ui_dir_.empty() && fs::is_directory(ui_dir_)) server_->set_mount_point("/", ui_dir_);
}

}  // namespace tableforge::app
