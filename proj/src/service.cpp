#include "cmu/service.hpp"

#include <iostream>

#include "httplib.h"

#include "cmu/commands.hpp"
#include "cmu/error.hpp"

namespace cmu {

using nlohmann::json;

namespace {

int status_for(ErrorCode code) {
    switch (code) {
        case ErrorCode::ImproperPosterior:
        case ErrorCode::TargetUnreachable:
        case ErrorCode::AllSamplesInvalid: return 422;
        default: return 400;
    }
}

ApiResponse error_response(int status, std::string_view code, std::string_view message) {
    json err = {{"code", std::string(code)}, {"message", std::string(message)}};
    if (code == "ImproperPosterior") err["hint"] = "choose Laplace or Jeffreys";
    return {status, {{"error", err}}};
}

void cap(std::size_t value, std::size_t limit, std::string_view what) {
    if (value > limit) {
        throw Error(ErrorCode::RequestTooLarge, std::string(what) + " exceeds the service limit of " +
                                                    std::to_string(limit) + "; use the command-line tool");
    }
}

// Coarser default grid for the service: every other point of the CLI grid.
std::vector<Count> service_grid() {
    const auto full = default_candidate_grid();
    std::vector<Count> out;
    for (std::size_t i = 0; i < full.size(); i += 2) out.push_back(full[i]);
    return out;
}

json analyze(const json& body, const ServiceConfig& cfg) {
    const auto req = analyze_request_from_json(body);
    cap(req.options.samples, cfg.max_samples, "samples");
    return analyze_response(run_analysis(req.cm, req.options));
}

json bm(const json& body, const ServiceConfig& cfg) {
    const auto req = analyze_request_from_json(body);
    cap(req.options.samples, cfg.max_samples, "samples");
    return bm_response(run_bm(req));
}

json predictive(const json& body, const ServiceConfig& cfg) {
    const auto req = predictive_request_from_json(body);
    cap(req.base.options.samples, cfg.max_samples, "samples");
    cap(req.draws, cfg.max_draws, "draws");
    return predictive_response(run_predictive(req));
}

json leaderboard(const json& body, const ServiceConfig& cfg) {
    const auto req = leaderboard_request_from_json(body);
    cap(req.draws, cfg.max_draws, "draws");
    return leaderboard_response(run_leaderboard(req));
}

json samplesize(const json& body, const ServiceConfig& cfg) {
    auto req = samplesize_request_from_json(body);
    if (req.simulate) {
        if (!body.contains("grid")) req.grid = service_grid();
        cap(req.grid.size(), cfg.max_grid_points, "candidate grid");
        cap(req.sims, cfg.max_sims, "simulations per N");
    }
    return samplesize_response(run_samplesize(req));
}

using Handler = json (*)(const json&, const ServiceConfig&);

Handler route(std::string_view path) {
    if (path == "/api/analyze") return analyze;
    if (path == "/api/bm") return bm;
    if (path == "/api/predictive") return predictive;
    if (path == "/api/leaderboard") return leaderboard;
    if (path == "/api/samplesize") return samplesize;
    return nullptr;
}

}  // namespace

ApiResponse handle_request(std::string_view method, std::string_view path, std::string_view body,
                           const ServiceConfig& config) {
    if (path == "/api/health") {
        if (method != "GET") return error_response(405, "MethodNotAllowed", "use GET");
        return {200, {{"status", "ok"}}};
    }
    const Handler handler = route(path);
    if (!handler) return error_response(404, "NotFound", "unknown endpoint");
    if (method != "POST") return error_response(405, "MethodNotAllowed", "use POST");

    json parsed;
    try {
        parsed = json::parse(body);
    } catch (const json::parse_error& e) {
        return error_response(400, "ParseError", std::string("body is not valid JSON: ") + e.what());
    }
    try {
        return {200, handler(parsed, config)};
    } catch (const Error& e) {
        return error_response(status_for(e.code()), to_string(e.code()), e.what());
    } catch (const json::exception& e) {
        return error_response(400, "ParseError", e.what());
    } catch (const std::exception& e) {
        return error_response(500, "InternalError", e.what());
    }
}

struct HttpService::Impl {
    ServiceConfig config;
    httplib::Server server;
};

HttpService::HttpService(ServiceConfig config) : impl_(std::make_unique<Impl>()) {
    impl_->config = std::move(config);
    const ServiceConfig* cfg = &impl_->config;
    const auto respond = [cfg](const httplib::Request& req, httplib::Response& res) {
        const ApiResponse out = handle_request(req.method, req.path, req.body, *cfg);
        res.status = out.status;
        res.set_content(out.body.dump(), "application/json");
        if (!cfg->cors_origin.empty()) res.set_header("Access-Control-Allow-Origin", cfg->cors_origin);
    };
    auto& server = impl_->server;
    server.Get(R"(/api/.*)", respond);
    server.Post(R"(/api/.*)", respond);
    server.Options(R"(/api/.*)", [cfg](const httplib::Request&, httplib::Response& res) {
        if (!cfg->cors_origin.empty()) {
            res.set_header("Access-Control-Allow-Origin", cfg->cors_origin);
            res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
            res.set_header("Access-Control-Allow-Headers", "Content-Type");
        }
        res.status = 204;
    });
}

HttpService::~HttpService() = default;

int HttpService::bind(const std::string& host, int port) {
    if (port == 0) return impl_->server.bind_to_any_port(host.c_str());
    return impl_->server.bind_to_port(host.c_str(), port) ? port : -1;
}

bool HttpService::listen() { return impl_->server.listen_after_bind(); }

void HttpService::stop() { impl_->server.stop(); }

int serve(const std::string& host, int port, const ServiceConfig& config) {
    HttpService service(config);
    const int bound = service.bind(host, port);
    if (bound < 0) {
        std::cerr << "cannot bind " << host << ":" << port << "\n";
        return 1;
    }
    std::cerr << "listening on http://" << host << ":" << bound << "\n";
    return service.listen() ? 0 : 1;
}

}  // namespace cmu
