#pragma once

#include <memory>
#include <string>
#include <thread>

#include "quandary/service/state.hpp"

namespace quandary {

/// cpp-httplib front end for a Service. Static files from
/// `config.static_dir` are mounted at /ui.
class HttpServer {
  public:
    explicit HttpServer(Service& service);
    ~HttpServer();

    /// Binds host:port; port 0 picks a free port. Returns the bound port.
    int bind(const std::string& host, int port);
    /// Serves on the bound socket until stop(); blocks.
    void serve();
    /// Runs serve() on a background thread.
    void start();
    void stop();

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

}  // namespace quandary
