#pragma once

// HTTP+JSON front end for the annotation store.

#include <filesystem>
#include <functional>
#include <string>

#include <httplib.h>

#include "conjnli/annotate.hpp"

namespace conjnli::annotate {

namespace detail {

inline void send_json(httplib::Response& res, const ordered_json& body, int status = 200) {
  res.status = status;
  res.set_content(body.dump(), "application/json");
}

inline void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
  send_json(res, {{"code", code}, {"message", message}}, status);
}

inline ordered_json parse_body(const httplib::Request& req) {
  if (req.body.empty()) return ordered_json::object();
  try {
    auto j = ordered_json::parse(req.body);
    if (!j.is_object()) throw bad_request("request body must be a JSON object");
    return j;
  } catch (const nlohmann::json::parse_error& e) {
    throw bad_request(std::string("malformed JSON body: ") + e.what());
  }
}

// Maps library exceptions onto {code, message} responses.
inline httplib::Server::Handler guarded(std::function<void(const httplib::Request&, httplib::Response&)> f) {
  return [f = std::move(f)](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const ServiceError& e) {
      send_error(res, e.status(), e.code(), e.what());
    } catch (const nlohmann::json::exception& e) {
      send_error(res, 400, "bad_request", e.what());
    } catch (const Error& e) {
      send_error(res, 500, "internal", e.what());
    }
  };
}

}  // namespace detail

// Registers the session routes on `server`; serves `static_dir` at "/" when
// it exists.
inline void install_routes(httplib::Server& server, SessionStore& store,
                           const std::filesystem::path& static_dir = {}) {
  using detail::guarded;
  using detail::send_json;
  using httplib::Request;
  using httplib::Response;

  server.Post("/sessions", guarded([&store](const Request& req, Response& res) {
    const auto body = detail::parse_body(req);
    const std::string id = detail::require_string(body, "session_id");
    if (!body.contains("annotators") || !body["annotators"].is_array())
      throw bad_request("annotators must be a list");
    if (!body.contains("pairs") || !body["pairs"].is_array()) throw bad_request("pairs must be a list");
    std::vector<ordered_json> pairs(body["pairs"].begin(), body["pairs"].end());
    std::vector<ordered_json> warmup;
    if (body.contains("warmup")) warmup.assign(body["warmup"].begin(), body["warmup"].end());
    store.create_session(id, body["annotators"].get<std::vector<std::string>>(), pairs, warmup);
    const auto st = store.state(id);
    send_json(res,
              {{"session_id", id}, {"round", to_string(st.round())}, {"pending", st.pending_round_one()}}, 201);
  }));

  server.Get("/sessions", guarded([&store](const Request&, Response& res) {
    send_json(res, {{"sessions", store.list()}});
  }));

  server.Get(R"(/sessions/([^/]+))", guarded([&store](const Request& req, Response& res) {
    store.read(req.matches[1], [&](const SessionState& st) {
      send_json(res, {{"session_id", st.session_id},
                      {"annotators", st.annotators},
                      {"round", to_string(st.round())},
                      {"pairs", st.pairs.size()},
                      {"pending", st.pending_round_one()},
                      {"disagreements", st.disagreements().size()},
                      {"resolved", st.resolutions.size()}});
      return 0;
    });
  }));

  server.Get(R"(/sessions/([^/]+)/warmup)", guarded([&store](const Request& req, Response& res) {
    store.read(req.matches[1], [&](const SessionState& st) {
      send_json(res, {{"warmup", st.warmup}});
      return 0;
    });
  }));

  server.Get(R"(/sessions/([^/]+)/next)", guarded([&store](const Request& req, Response& res) {
    if (!req.has_param("annotator")) throw bad_request("query parameter 'annotator' is required");
    const std::string annotator = req.get_param_value("annotator");
    send_json(res, store.read(req.matches[1], [&](const SessionState& st) { return next_pair(st, annotator); }));
  }));

  server.Post(R"(/sessions/([^/]+)/labels)", guarded([&store](const Request& req, Response& res) {
    const auto body = detail::parse_body(req);
    const bool recorded =
        store.submit_label(req.matches[1], detail::require_string(body, "annotator"),
                           detail::require_string(body, "pair_id"), detail::require_string(body, "verdict"));
    const auto st = store.state(req.matches[1]);
    send_json(res, {{"ack", true}, {"recorded", recorded}, {"round", to_string(st.round())}});
  }));

  server.Get(R"(/sessions/([^/]+)/report)", guarded([&store](const Request& req, Response& res) {
    send_json(res, store.read(req.matches[1], [](const SessionState& st) {
      auto j = agreement_report(st).to_json();
      j["round"] = to_string(st.round());
      return j;
    }));
  }));

  server.Post(R"(/sessions/([^/]+)/resolutions)", guarded([&store](const Request& req, Response& res) {
    const auto body = detail::parse_body(req);
    const bool recorded = store.resolve(req.matches[1], detail::require_string(body, "pair_id"),
                                        detail::require_string(body, "verdict"));
    send_json(res, {{"ack", true}, {"recorded", recorded}});
  }));

  server.Post(R"(/sessions/([^/]+)/close)", guarded([&store](const Request& req, Response& res) {
    const bool recorded = store.close(req.matches[1]);
    send_json(res, {{"ack", true}, {"recorded", recorded}, {"round", "closed"}});
  }));

  server.Get(R"(/sessions/([^/]+)/export)", guarded([&store](const Request& req, Response& res) {
    send_json(res, store.read(req.matches[1], [](const SessionState& st) {
      const Export ex = export_agreed(st);
      ordered_json j;
      j["records"] = ordered_json::array();
      for (const auto& r : ex.dataset.records) j["records"].push_back(to_json(r));
      j["sidecar"] = ex.sidecar();
      return j;
    }));
  }));

  if (!static_dir.empty() && std::filesystem::is_directory(static_dir))
    server.set_mount_point("/", static_dir.string());
}

}  // namespace conjnli::annotate
