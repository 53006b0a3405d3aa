#include <httplib.h>

#include <fmt/format.h>

#include "dr/error.hpp"
#include "dr/service/review.hpp"

namespace dr::service {

namespace {

int status_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kNotFound: return 404;
    case ErrorCode::kLeaseExpired:
    case ErrorCode::kConflict: return 409;
    case ErrorCode::kIo: return 500;
    default: return 400;
  }
}

void send_json(httplib::Response& res, int status, const Json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send_json(res, status, {{"error", {{"code", std::string(code)}, {"message", message}}}});
}

}  // namespace

struct ReviewHttpServer::Impl {
  ReviewService& service;
  HttpOptions options;
  httplib::Server server;

  // Returns the authenticated reviewer ("" when auth is off), or nullopt
  // after writing a 401.
  std::optional<std::string> authenticate(const httplib::Request& req, httplib::Response& res) const {
    if (options.reviewer_tokens.empty()) return std::string{};
    const auto header = req.get_header_value("Authorization");
    const std::string prefix = "Bearer ";
    if (header.compare(0, prefix.size(), prefix) == 0) {
      const auto token = header.substr(prefix.size());
      for (const auto& [reviewer, t] : options.reviewer_tokens) {
        if (t == token) return reviewer;
      }
    }
    send_error(res, 401, "unauthorized", "missing or unknown bearer token");
    return std::nullopt;
  }

  bool reviewer_matches(const std::string& authed, const std::string& claimed, httplib::Response& res) const {
    if (authed.empty() || authed == claimed) return true;
    send_error(res, 403, "forbidden", "token does not belong to reviewer " + claimed);
    return false;
  }

  template <typename F>
  httplib::Server::Handler guarded(F f) {
    return [this, f](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto who = authenticate(req, res);
        if (!who) return;
        f(req, res, *who);
      } catch (const Error& e) {
        send_error(res, status_for(e.code()), error_code_name(e.code()), e.what());
      } catch (const Json::exception& e) {
        send_error(res, 400, "parse_error", e.what());
      } catch (const std::exception& e) {
        send_error(res, 500, "internal", e.what());
      }
    };
  }

  static Json parse_body(const httplib::Request& req) {
    auto body = Json::parse(req.body, nullptr, false);
    if (body.is_discarded() || !body.is_object()) {
      throw Error(ErrorCode::kParse, "request body must be a JSON object");
    }
    return body;
  }

  Impl(ReviewService& s, HttpOptions o) : service(s), options(std::move(o)) {
    server.Post("/sessions", guarded([this](const auto& req, auto& res, const std::string&) {
      const auto spec = session_spec_from_json(parse_body(req));
      const auto id = service.create_session(spec);
      send_json(res, 201, {{"session_id", id}, {"queued", service.pairings(id).size()}});
    }));
    server.Get(R"(/sessions/([^/]+)/next)", guarded([this](const auto& req, auto& res, const std::string& who) {
      const auto reviewer = req.get_param_value("reviewer");
      if (reviewer.empty()) throw Error(ErrorCode::kInvalidArgument, "missing ?reviewer=");
      if (!reviewer_matches(who, reviewer, res)) return;
      const auto pair = service.next_pair(req.matches[1], reviewer);
      if (!pair) {
        send_json(res, 200, {{"none_remaining", true}});
      } else {
        send_json(res, 200, to_json(*pair));
      }
    }));
    server.Post(R"(/sessions/([^/]+)/verdicts)",
                guarded([this](const auto& req, auto& res, const std::string& who) {
                  const auto sub = submission_from_json(parse_body(req));
                  if (!reviewer_matches(who, sub.reviewer_id, res)) return;
                  const auto r = service.submit_verdict(req.matches[1], sub);
                  send_json(res, 200, {{"accepted", true}, {"duplicate", r.duplicate}, {"pair_id", sub.pair_id}});
                }));
    server.Get(R"(/sessions/([^/]+)/leaderboard)", guarded([this](const auto& req, auto& res, const std::string&) {
      send_json(res, 200, to_json(service.leaderboard_snapshot(req.matches[1])));
    }));
    server.Get(R"(/sessions/([^/]+)/export)", guarded([this](const auto& req, auto& res, const std::string&) {
      res.status = 200;
      res.set_content(service.export_records(req.matches[1]), "application/x-ndjson");
    }));
    if (!options.static_dir.empty()) server.set_mount_point("/", options.static_dir.string());
  }
};

ReviewHttpServer::ReviewHttpServer(ReviewService& service, HttpOptions options)
    : impl_(std::make_unique<Impl>(service, std::move(options))) {}

ReviewHttpServer::~ReviewHttpServer() { stop(); }

int ReviewHttpServer::bind() {
  const auto& o = impl_->options;
  if (o.port == 0) {
    const int port = impl_->server.bind_to_any_port(o.host);
    if (port < 0) throw Error(ErrorCode::kIo, "cannot bind " + o.host);
    return port;
  }
  if (!impl_->server.bind_to_port(o.host, o.port)) {
    throw Error(ErrorCode::kIo, fmt::format("cannot bind {}:{}", o.host, o.port));
  }
  return o.port;
}

void ReviewHttpServer::listen() { impl_->server.listen_after_bind(); }

void ReviewHttpServer::stop() {
  if (impl_) impl_->server.stop();
}

}  // namespace dr::service
