#pragma once

// HTTP transport for AnnotationService. Routes:
//   GET  /v1/pairs/next
//   GET  /v1/pairs/:id
//   PUT  /v1/pairs/:id/links
//   POST /v1/pairs/:id/discard
//   GET  /v1/progress
//   GET  /v1/export

#include <string>

#include "httplib.h"

#include "alignkit/annotation.hpp"

namespace alignkit {

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::string static_dir;  // mounted at / when set
  std::string cors_origin;  // Access-Control-Allow-Origin when set
};

class AnnotationServer {
 public:
  AnnotationServer(AnnotationService& service, ServerOptions options)
      : service_(service), options_(std::move(options)) {
    routes();
  }

  /// Binds and returns the port; throws if binding fails.
  int bind() {
    int port = options_.port;
    if (port == 0) {
      port = server_.bind_to_any_port(options_.host);
      if (port < 0) throw Error("cannot bind " + options_.host);
    } else if (!server_.bind_to_port(options_.host, port)) {
      throw Error("cannot bind " + options_.host + ":" + std::to_string(port));
    }
    return port;
  }

  /// Blocks until stop().
  void serve() { server_.listen_after_bind(); }

  void stop() { server_.stop(); }
  void wait_until_ready() const { server_.wait_until_ready(); }

 private:
  static void send(httplib::Response& res, const ApiResponse& r) {
    res.status = r.status;
    res.set_content(r.body, r.content_type);
  }

  void routes() {
    if (!options_.cors_origin.empty()) {
      server_.set_default_headers({{"Access-Control-Allow-Origin", options_.cors_origin},
                                   {"Access-Control-Allow-Methods", "GET, PUT, POST, OPTIONS"},
                                   {"Access-Control-Allow-Headers", "Content-Type"}});
      server_.Options(R"(/v1/.*)", [](const httplib::Request&, httplib::Response& res) {
        res.status = 204;
      });
    }
    if (!options_.static_dir.empty() && !server_.set_mount_point("/", options_.static_dir))
      throw Error("static directory not found: " + options_.static_dir);

    server_.Get("/v1/pairs/next", [this](const httplib::Request&, httplib::Response& res) {
      send(res, service_.next_pending());
    });
    server_.Get("/v1/pairs/:id", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, service_.get_pair(req.path_params.at("id")));
    });
    server_.Put("/v1/pairs/:id/links", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, service_.put_links(req.path_params.at("id"), req.body));
    });
    server_.Post("/v1/pairs/:id/discard", [this](const httplib::Request& req, httplib::Response& res) {
      send(res, service_.discard(req.path_params.at("id"), req.body));
    });
    server_.Get("/v1/progress", [this](const httplib::Request&, httplib::Response& res) {
      send(res, service_.progress());
    });
    server_.Get("/v1/export", [this](const httplib::Request&, httplib::Response& res) {
      send(res, service_.export_gold());
    });
    server_.set_error_handler([](const httplib::Request&, httplib::Response& res) {
      if (res.body.empty()) {
        nlohmann::json j{{"error", res.status == 404 ? "not found" : "request failed"}};
        res.set_content(j.dump(), "application/json");
      }
    });
    server_.set_exception_handler(
        [](const httplib::Request&, httplib::Response& res, std::exception_ptr ep) {
          std::string msg = "internal error";
          try {
            std::rethrow_exception(ep);
          } catch (const std::exception& e) {
            msg = e.what();
          } catch (...) {
          }
          res.status = 500;
          res.set_content(nlohmann::json{{"error", msg}}.dump(), "application/json");
        });
  }

  AnnotationService& service_;
  ServerOptions options_;
  httplib::Server server_;
};

}  // namespace alignkit
