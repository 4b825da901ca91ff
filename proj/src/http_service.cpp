#include "fideval/http_service.hpp"

#include <httplib.h>

#include "fideval/error.hpp"
#include "fideval/serialize.hpp"

namespace fideval {

namespace {

using nlohmann::json;

void send_json(httplib::Response& res, int status, const json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

void send_error(httplib::Response& res, int status, const std::string& code, const std::string& message) {
    send_json(res, status, {{"error", code}, {"message", message}});
}

json session_json(const SessionInfo& s) {
    return {{"session_id", s.session_id}, {"annotator", s.annotator}, {"cursor", s.cursor}, {"total", s.total}};
}

// Maps library exceptions onto HTTP status codes.
template <typename Fn>
auto guarded(Fn fn) {
    return [fn = std::move(fn)](const httplib::Request& req, httplib::Response& res) {
        try {
            fn(req, res);
        } catch (const UnknownSession& e) {
            send_error(res, 404, "unknown_session", e.what());
        } catch (const UnknownImage& e) {
            send_error(res, 404, "unknown_image", e.what());
        } catch (const PreconditionError& e) {
            send_error(res, 400, "bad_request", e.what());
        } catch (const std::exception& e) {
            send_error(res, 503, "storage_failure", e.what());
        }
    };
}

}  // namespace

AnnotationServer::AnnotationServer(Campaign& campaign, std::filesystem::path ui_dir)
    : campaign_(campaign), ui_dir_(std::move(ui_dir)), server_(std::make_unique<httplib::Server>()) {
    install_routes();
}

AnnotationServer::~AnnotationServer() { stop(); }

void AnnotationServer::install_routes() {
    auto& srv = *server_;

    srv.Get("/api/session", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const std::string annotator = req.get_param_value("annotator");
                if (annotator.empty()) {
                    send_error(res, 400, "bad_request", "missing 'annotator' query parameter");
                    return;
                }
                send_json(res, 200, session_json(campaign_.start_session(annotator)));
            }));

    srv.Get(R"(/api/session/([^/]+)/next)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto next = campaign_.next_pair(req.matches[1]);
                if (!next) {
                    const auto s = campaign_.session(req.matches[1]);
                    send_json(res, 200, {{"done", true}, {"index", s.cursor}, {"total", s.total}});
                    return;
                }
                send_json(res, 200,
                          {{"done", false},
                           {"pair_id", next->pair_id},
                           {"left", next->left_ref},
                           {"right", next->right_ref},
                           {"index", next->index},
                           {"total", next->total}});
            }));

    srv.Post(R"(/api/session/([^/]+)/choice)", guarded([this](const httplib::Request& req, httplib::Response& res) {
                 json body;
                 try {
                     body = json::parse(req.body);
                 } catch (const std::exception&) {
                     send_error(res, 400, "bad_request", "body must be JSON");
                     return;
                 }
                 if (!body.contains("pair_id") || !body["pair_id"].is_string() || !body.contains("choice") ||
                     !body["choice"].is_string()) {
                     send_error(res, 400, "bad_request", "expected {\"pair_id\": str, \"choice\": \"left\"|\"right\"}");
                     return;
                 }
                 const auto choice = parse_choice(body["choice"].get<std::string>());
                 if (!choice) {
                     send_error(res, 400, "bad_request", "choice must be \"left\" or \"right\"");
                     return;
                 }
                 const auto r = campaign_.submit_choice(req.matches[1], body["pair_id"].get<std::string>(), *choice);
                 switch (r.status) {
                     case SubmitStatus::accepted:
                         send_json(res, 200, {{"status", "accepted"}, {"cursor", r.cursor}});
                         break;
                     case SubmitStatus::duplicate:
                         send_json(res, 409, {{"error", "duplicate"}, {"cursor", r.cursor}});
                         break;
                     case SubmitStatus::out_of_order:
                         send_json(res, 409, {{"error", "out_of_order"}, {"cursor", r.cursor}});
                         break;
                 }
             }));

    srv.Get(R"(/api/image/([0-9a-zA-Z]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
                const auto bytes = campaign_.serve_image(req.matches[1]);
                res.status = 200;
                res.set_content(reinterpret_cast<const char*>(bytes.data()), bytes.size(), "image/png");
            }));

    srv.Get("/api/progress", guarded([this](const httplib::Request&, httplib::Response& res) {
                json annotators = json::array();
                std::size_t answered = 0;
                for (const auto& p : campaign_.progress()) {
                    annotators.push_back({{"annotator", p.annotator}, {"answered", p.answered}, {"total", p.total}});
                    answered += p.answered;
                }
                send_json(res, 200,
                          {{"total_pairs", campaign_.pairs().size()},
                           {"events", answered},
                           {"annotators", annotators}});
            }));

    if (!ui_dir_.empty()) srv.set_mount_point("/", ui_dir_.string());
}

int AnnotationServer::bind(const std::string& host, int port) {
    if (port == 0) {
        const int bound = server_->bind_to_any_port(host);
        if (bound < 0) throw Error("cannot bind " + host);
        return bound;
    }
    if (!server_->bind_to_port(host, port)) throw Error("cannot bind " + host + ":" + std::to_string(port));
    return port;
}

void AnnotationServer::listen_after_bind() { server_->listen_after_bind(); }

void AnnotationServer::stop() {
    if (server_) server_->stop();
}

}  // namespace fideval
