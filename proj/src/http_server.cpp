#include <thread>

#include "httplib.h"
#include "mexpr/error.hpp"
#include "mexpr/service.hpp"

namespace mexpr {

struct HttpServer::Impl {
  Service& service;
  httplib::Server server;
  std::thread thread;

  explicit Impl(Service& s) : service(s) { routes(); }

  static Json body_json(const httplib::Request& req) {
    if (req.body.empty()) return Json::object();
    try {
      return Json::parse(req.body);
    } catch (const Json::parse_error& e) {
      fail(ErrorCode::kInvalidArgument, std::string("request body is not JSON: ") + e.what());
    }
  }

  static void reply(httplib::Response& res, const Json& body) {
    res.set_content(body.dump(), "application/json");
  }

  static void reply_png(httplib::Response& res, const Bytes& png) {
    res.set_content(std::string(png.begin(), png.end()), "image/png");
  }

  template <typename Handler>
  auto guarded(Handler handler) {
    return [handler](const httplib::Request& req, httplib::Response& res) {
      try {
        handler(req, res);
      } catch (const Error& e) {
        res.status = http_status(e.code());
        reply(res, api_error(e));
      } catch (const std::exception& e) {
        const Error wrapped(ErrorCode::kInvalidArgument, e.what());
        res.status = 400;
        reply(res, api_error(wrapped));
      }
    };
  }

  void routes() {
    Service& s = service;
    server.Post("/panels", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.create_panel(Bytes(req.body.begin(), req.body.end())));
    }));
    server.Post(R"(/panels/([^/]+)/detect)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.auto_detect(req.matches[1], body_json(req)));
    }));
    server.Post(R"(/panels/([^/]+)/regions)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.manual_region(req.matches[1], body_json(req)));
    }));
    server.Post(R"(/panels/([^/]+)/compose)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.compose_panel(req.matches[1], body_json(req)));
    }));
    server.Get(R"(/export/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply_png(res, s.export_asset(req.matches[1]));
    }));
    server.Get("/engines", guarded([&s](const httplib::Request&, httplib::Response& res) {
      reply(res, s.list_engines());
    }));
    server.Post("/sessions", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.create_mapping(body_json(req)));
    }));
    server.Get(R"(/sessions/([^/]+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.get_status(req.matches[1]));
    }));
    server.Post(R"(/sessions/([^/]+)/frames)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.request_frames(req.matches[1], body_json(req)));
    }));
    server.Get(R"(/sessions/([^/]+)/frames/(\d+))", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply_png(res, s.get_frame(req.matches[1], std::stoi(req.matches[2])));
    }));
    server.Post(R"(/sessions/([^/]+)/params)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.set_session_params(req.matches[1], body_json(req)));
    }));
    server.Post(R"(/sessions/([^/]+)/select)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.select_keyframe(req.matches[1], body_json(req)));
    }));
    server.Post(R"(/sessions/([^/]+)/commit)", guarded([&s](const httplib::Request& req, httplib::Response& res) {
      reply(res, s.commit_session(req.matches[1]));
    }));
  }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->server.bind_to_any_port(host);
  } else if (!impl_->server.bind_to_port(host, port)) {
    bound = -1;
  }
  if (bound < 0) fail(ErrorCode::kIOFailure, "cannot bind " + host + ":" + std::to_string(port));
  impl_->thread = std::thread([this] { impl_->server.listen_after_bind(); });
  impl_->server.wait_until_ready();
  return bound;
}

void HttpServer::run(const std::string& host, int port) {
  if (!impl_->server.listen(host, port)) {
    fail(ErrorCode::kIOFailure, "cannot serve on " + host + ":" + std::to_string(port));
  }
}

void HttpServer::stop() {
  if (!impl_) return;
  impl_->server.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace mexpr
