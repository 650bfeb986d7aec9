#pragma once

#include <memory>
#include <string>

#include "msite/api.hpp"

namespace msite {

struct ServeOptions {
    std::string host = "127.0.0.1";
    int port = 8080;  // 0 picks a free port
    /// When nonempty, requests must carry `Authorization: Bearer <token>`.
    std::string token;
    /// Seconds between automatic processing ticks; 0 disables the ticker.
    int tick_every_s = 0;
};

/// Serves an Api over HTTP.
class HttpServer {
public:
    HttpServer(Api& api, ServeOptions options);
    ~HttpServer();

    /// Binds the socket; returns the bound port, or -1 on failure.
    int bind();
    /// Blocks until stop() is called.
    void run();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace msite
