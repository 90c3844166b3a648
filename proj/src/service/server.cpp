#include "quandary/service/server.hpp"

#include <algorithm>
#include <cctype>

#include <httplib.h>

#include "quandary/common/log.hpp"

namespace quandary {

struct HttpServer::Impl {
    Service& service;
    httplib::Server server;
    std::thread worker;
    bool bound = false;

    explicit Impl(Service& s) : service(s)
    {
        auto forward = [this](const httplib::Request& req, httplib::Response& res) {
            ApiRequest api;
            api.method = req.method;
            api.path = req.path;
            api.body = req.body;
            for (const auto& [k, v] : req.params) {
                api.query[k] = v;
            }
            for (const auto& [k, v] : req.headers) {
                std::string key = k;
                std::transform(key.begin(), key.end(), key.begin(),
                               [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
                api.headers[key] = v;
            }
            const ApiResponse out = service.handle(api);
            res.status = out.status;
            res.set_content(out.body.dump(), "application/json");
        };
        const std::string any = R"(/(quandaries|sessions)(/.*)?)";
        server.Get(any, forward);
        server.Post(any, forward);
        if (const auto& dir = service.config().static_dir) {
            if (!server.set_mount_point("/ui", dir->string())) {
                log(LogLevel::warning, "static directory '" + dir->string() + "' does not exist; /ui disabled");
            }
        }
    }
};

HttpServer::HttpServer(Service& service) : impl_(std::make_unique<Impl>(service)) {}

HttpServer::~HttpServer()
{
    stop();
}

int HttpServer::bind(const std::string& host, int port)
{
    int bound = port;
    if (port == 0) {
        bound = impl_->server.bind_to_any_port(host);
    } else if (!impl_->server.bind_to_port(host, port)) {
        bound = -1;
    }
    require(bound > 0, ErrorCode::io, "cannot bind " + host + ":" + std::to_string(port));
    impl_->bound = true;
    return bound;
}

void HttpServer::serve()
{
    require(impl_->bound, ErrorCode::precondition, "bind() before serve()");
    impl_->server.listen_after_bind();
}

void HttpServer::start()
{
    require(impl_->bound, ErrorCode::precondition, "bind() before start()");
    impl_->worker = std::thread([this] { impl_->server.listen_after_bind(); });
    impl_->server.wait_until_ready();
}

void HttpServer::stop()
{
    impl_->server.stop();
    if (impl_->worker.joinable()) {
        impl_->worker.join();
    }
}

}  // namespace quandary
