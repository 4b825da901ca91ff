#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include "fideval/campaign.hpp"

namespace httplib {
class Server;
}

namespace fideval {

/// HTTP front of a Campaign:
///   GET  /api/session?annotator=ID
///   GET  /api/session/{sid}/next
///   POST /api/session/{sid}/choice   {"pair_id": ..., "choice": "left"|"right"}
///   GET  /api/image/{ref}
///   GET  /api/progress
/// plus static files from `ui_dir` when given.
class AnnotationServer {
public:
    AnnotationServer(Campaign& campaign, std::filesystem::path ui_dir = {});
    ~AnnotationServer();

    AnnotationServer(const AnnotationServer&) = delete;
    AnnotationServer& operator=(const AnnotationServer&) = delete;

    /// Binds; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Blocks serving requests until stop().
    void listen_after_bind();
    void stop();

private:
    void install_routes();

    Campaign& campaign_;
    std::filesystem::path ui_dir_;
    std::unique_ptr<httplib::Server> server_;
};

}  // namespace fideval
