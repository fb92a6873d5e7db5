#include <charconv>
#include <thread>

#include "httplib.h"
#include "json.hpp"
#include "solicit/error.h"
#include "solicit/service.h"

namespace solicit {

namespace {

using json = nlohmann::json;

void Reply(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void ReplyError(httplib::Response& res, int status, const std::string& what) {
  Reply(res, status, json{{"error", what}});
}

// Runs a handler and maps refusals and malformed input onto HTTP errors.
template <typename F>
void Guard(httplib::Response& res, F&& handler) {
  try {
    Reply(res, 200, handler());
  } catch (const ServiceError& e) {
    ReplyError(res, e.status(), e.what());
  } catch (const json::exception& e) {
    ReplyError(res, 400, std::string("malformed request: ") + e.what());
  } catch (const Error& e) {
    ReplyError(res, 500, e.what());
  }
}

json Body(const httplib::Request& req) {
  if (req.body.empty()) return json::object();
  json j = json::parse(req.body);
  if (!j.is_object()) throw ServiceError(400, "request body must be a JSON object");
  return j;
}

std::int64_t ParseInt(const std::string& text, const char* name) {
  std::int64_t v = 0;
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc() || ptr != end) {
    throw ServiceError(400, std::string(name) + " must be an integer");
  }
  return v;
}

}  // namespace

struct Server::Impl {
  Session& session;
  httplib::Server http;
  std::thread thread;

  explicit Impl(Session& s) : session(s) {
    // No SO_REUSEPORT, so a port held by another server fails to bind.
    http.set_socket_options([](socket_t sock) {
      int yes = 1;
      setsockopt(sock, SOL_SOCKET, SO_REUSEADDR,
                 reinterpret_cast<const void*>(&yes), sizeof(yes));
    });
    Routes();
  }

  void Routes() {
    http.Get("/api/stream", [this](const httplib::Request& req,
                                   httplib::Response& res) {
      Guard(res, [&] {
        std::optional<Timestamp> since;
        std::size_t limit = 200;
        if (req.has_param("since")) {
          since = ParseInt(req.get_param_value("since"), "since");
        }
        if (req.has_param("limit")) {
          const std::int64_t l = ParseInt(req.get_param_value("limit"), "limit");
          if (l < 1) throw ServiceError(400, "limit must be positive");
          limit = static_cast<std::size_t>(l);
        }
        return session.Stream(since, limit);
      });
    });
    http.Get("/api/candidates", [this](const httplib::Request&,
                                       httplib::Response& res) {
      Guard(res, [&] { return session.Candidates(); });
    });
    http.Get(R"(/api/users/([^/]+))", [this](const httplib::Request& req,
                                            httplib::Response& res) {
      Guard(res, [&] { return session.UserProfile(req.matches[1]); });
    });
    http.Get("/api/engagements", [this](const httplib::Request&,
                                        httplib::Response& res) {
      Guard(res, [&] { return session.Engagements(); });
    });
    http.Get("/api/report", [this](const httplib::Request&,
                                   httplib::Response& res) {
      Guard(res, [&] { return session.Report(); });
    });
    http.Post("/api/recommend", [this](const httplib::Request& req,
                                       httplib::Response& res) {
      Guard(res, [&] {
        const json body = Body(req);
        std::optional<double> min_fraction;
        std::optional<std::size_t> min_length;
        if (body.contains("min_fraction")) {
          min_fraction = body.at("min_fraction").get<double>();
        }
        if (body.contains("min_length")) {
          const auto l = body.at("min_length").get<std::int64_t>();
          if (l < 1) throw ServiceError(400, "min_length must be positive");
          min_length = static_cast<std::size_t>(l);
        }
        return session.RecommendNow(min_fraction, min_length);
      });
    });
    http.Post("/api/engage", [this](const httplib::Request& req,
                                    httplib::Response& res) {
      Guard(res, [&] {
        const json body = Body(req);
        return session.Engage(body.at("user_id").get<std::string>(),
                              body.at("question").get<std::string>());
      });
    });
    http.Post("/api/mode", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      Guard(res, [&] {
        return session.SetMode(Body(req).at("mode").get<std::string>());
      });
    });
    http.Post("/api/tick", [this](const httplib::Request& req,
                                  httplib::Response& res) {
      Guard(res, [&] {
        return session.Tick(Body(req).at("seconds").get<std::int64_t>());
      });
    });
  }
};

Server::Server(Session& session) : impl_(std::make_unique<Impl>(session)) {}

Server::~Server() { Stop(); }

int Server::Start(const std::string& host, int port) {
  int bound = port;
  if (port == 0) {
    bound = impl_->http.bind_to_any_port(host);
    if (bound < 0) throw ConfigError("cannot bind " + host);
  } else if (!impl_->http.bind_to_port(host, port)) {
    throw ConfigError("port " + std::to_string(port) + " is not available");
  }
  impl_->thread = std::thread([this] { impl_->http.listen_after_bind(); });
  impl_->http.wait_until_ready();
  return bound;
}

void Server::Run(const std::string& host, int port) {
  if (!impl_->http.bind_to_port(host, port)) {
    throw ConfigError("port " + std::to_string(port) + " is not available");
  }
  impl_->http.listen_after_bind();
}

void Server::Stop() {
  impl_->http.stop();
  if (impl_->thread.joinable()) impl_->thread.join();
}

}  // namespace solicit
