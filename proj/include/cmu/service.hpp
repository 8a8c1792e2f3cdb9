#pragma once

#include <cstddef>
#include <memory>
#include <string>
#include <string_view>

#include "json.hpp"

namespace cmu {

struct ServiceConfig {
    std::string cors_origin;  // empty: no Access-Control-Allow-Origin header
    std::size_t max_grid_points = 40;
    std::size_t max_sims = 2000;
    std::size_t max_samples = 1000000;
    std::size_t max_draws = 1000000;
};

struct ApiResponse {
    int status = 200;
    nlohmann::json body;
};

// Stateless dispatch of one request; the HTTP server is a thin shell
// around this so handlers can be exercised without sockets.
ApiResponse handle_request(std::string_view method, std::string_view path, std::string_view body,
                           const ServiceConfig& config = {});

// HTTP front end over handle_request.
class HttpService {
public:
    explicit HttpService(ServiceConfig config = {});
    ~HttpService();
    HttpService(const HttpService&) = delete;
    HttpService& operator=(const HttpService&) = delete;

    // Port 0 picks a free port. Returns the bound port, or -1 on failure.
    int bind(const std::string& host, int port);
    // Blocks until stop() is called from another thread.
    bool listen();
    void stop();

private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

// Blocks serving HTTP until the process is stopped. Returns nonzero if the
// socket cannot be bound.
int serve(const std::string& host, int port, const ServiceConfig& config);

}  // namespace cmu
