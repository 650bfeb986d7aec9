#include "msite/http_server.hpp"

#include <atomic>
#include <condition_variable>
#include <mutex>
#include <thread>

#include <httplib.h>

namespace msite {

struct HttpServer::Impl {
    Api& api;
    ServeOptions options;
    httplib::Server server;
    int port = -1;
    std::atomic<bool> stopping{false};
    std::mutex mutex;
    std::condition_variable wake;
    std::thread ticker;

    Impl(Api& a, ServeOptions o) : api(a), options(std::move(o)) {
        const auto handler = [this](const httplib::Request& req, httplib::Response& res) {
            if (!options.token.empty() && req.get_header_value("Authorization") != "Bearer " + options.token) {
                res.status = 401;
                res.set_content(R"({"error":"Unauthorized"})", "application/json");
                return;
            }
            ApiRequest r;
            r.method = req.method;
            r.path = req.path;
            for (const auto& [k, v] : req.params) r.query[k] = v;
            r.body = req.body;
            const auto out = api.handle(r);
            res.status = out.status;
            res.set_content(out.body.dump(), "application/json");
        };
        server.Get(R"(/v1/.*)", handler);
        server.Post(R"(/v1/.*)", handler);
    }
};

HttpServer::HttpServer(Api& api, ServeOptions options) : impl_(std::make_unique<Impl>(api, std::move(options))) {}

HttpServer::~HttpServer() { stop(); }

int HttpServer::bind() {
    if (impl_->options.port == 0) {
        impl_->port = impl_->server.bind_to_any_port(impl_->options.host);
    } else {
        impl_->port = impl_->server.bind_to_port(impl_->options.host, impl_->options.port) ? impl_->options.port : -1;
    }
    return impl_->port;
}

void HttpServer::run() {
    if (impl_->options.tick_every_s > 0) {
        impl_->ticker = std::thread([this] {
            std::unique_lock lock(impl_->mutex);
            while (!impl_->stopping) {
                impl_->wake.wait_for(lock, std::chrono::seconds(impl_->options.tick_every_s));
                if (!impl_->stopping) impl_->api.tick();
            }
        });
    }
    impl_->server.listen_after_bind();
}

void HttpServer::stop() {
    {
        std::lock_guard lock(impl_->mutex);
        impl_->stopping = true;
    }
    impl_->wake.notify_all();
    impl_->server.stop();
    if (impl_->ticker.joinable()) impl_->ticker.join();
}

}  // namespace msite
