#include <future>
#include <thread>

#include "doctest.h"
#include "httplib.h"

#include "cmu/service.hpp"

using namespace cmu;
using nlohmann::json;

namespace {

const std::string kAnalyze = R"({"cm": {"tp": 26, "fn": 0, "fp": 2, "tn": 6}, "seed": 4})";

ApiResponse post(std::string_view path, const json& body, const ServiceConfig& cfg = {}) {
    return handle_request("POST", path, body.dump(), cfg);
}

}  // namespace

TEST_CASE("health and routing") {
    const auto health = handle_request("GET", "/api/health", "", {});
    CHECK(health.status == 200);
    CHECK(health.body["status"] == "ok");
    CHECK(handle_request("GET", "/api/nothing", "", {}).status == 404);
    CHECK(handle_request("GET", "/api/analyze", "", {}).status == 405);
    CHECK(handle_request("POST", "/api/health", "", {}).status == 405);
}

TEST_CASE("analyze endpoint") {
    const auto r = handle_request("POST", "/api/analyze", kAnalyze, {});
    REQUIRE(r.status == 200);
    const auto& report = r.body["report"];
    CHECK(report["seed"] == 4);
    const auto& tpr = report["metrics"][2];
    CHECK(tpr["metric"] == "TPR");
    CHECK(std::abs(tpr["hpd"][0].get<double>() - 0.89) <= 0.01);
    CHECK(std::abs(tpr["hpd"][1].get<double>() - 1.00) <= 0.01);
    CHECK(r.body["histograms"].size() == 11);
}

TEST_CASE("error mapping") {
    const auto malformed = handle_request("POST", "/api/analyze", "{not json", {});
    CHECK(malformed.status == 400);
    CHECK(malformed.body["error"]["code"] == "ParseError");

    const auto missing = post("/api/analyze", {{"cm", {{"tp", 1}}}});
    CHECK(missing.status == 400);
    CHECK(missing.body["error"]["code"] == "ParseError");

    const auto wrong_type = post("/api/analyze", {{"cm", "26,0,2,6"}, {"samples", "many"}});
    CHECK(wrong_type.status == 400);

    const auto empty = post("/api/analyze", {{"cm", {0, 0, 0, 0}}});
    CHECK(empty.status == 400);
    CHECK(empty.body["error"]["code"] == "EmptyMatrix");

    const auto improper = post("/api/analyze", {{"cm", {1, 0, 0, 0}}, {"prior", "haldane"}});
    CHECK(improper.status == 422);
    CHECK(improper.body["error"]["code"] == "ImproperPosterior");
    CHECK(improper.body["error"].contains("hint"));
}

TEST_CASE("identical requests give identical responses") {
    const auto a = handle_request("POST", "/api/analyze", kAnalyze, {});
    const auto b = handle_request("POST", "/api/analyze", kAnalyze, {});
    CHECK(a.body.dump() == b.body.dump());

    const json lb = {{"submissions", {{{"name", "a"}, {"accuracy", 0.9}}, {{"name", "b"}, {"accuracy", 0.88}}}},
                     {"n", 500},
                     {"seed", 8}};
    CHECK(post("/api/leaderboard", lb).body.dump() == post("/api/leaderboard", lb).body.dump());
}

TEST_CASE("other endpoints") {
    const auto bm = post("/api/bm", {{"cm", {26, 0, 2, 6}}, {"seed", 1}});
    REQUIRE(bm.status == 200);
    CHECK(bm.body["seed"] == 1);
    CHECK(bm.body["r_dec"].get<double>() < 0.005);

    const auto pred = post("/api/predictive", {{"cm", {1, 0, 0, 0}}, {"model", "dirichlet"}, {"n_synth", 1},
                                               {"draws", 20000}, {"seed", 2}});
    REQUIRE(pred.status == 200);
    CHECK(pred.body["seed"] == 2);
    CHECK(pred.body["empirical"]["support"].size() == 2);

    const auto lb = post("/api/leaderboard", {{"csv", "name,accuracy,n\nx,0.9,100\ny,0.8,100\n"},
                                              {"prizes", {100, 10}},
                                              {"seed", 3}});
    REQUIRE(lb.status == 200);
    CHECK(lb.body["seed"] == 3);
    CHECK(lb.body["expected_total"].get<double>() == doctest::Approx(110));

    const auto ss = post("/api/samplesize", {{"target_mu", 0.2}});
    REQUIRE(ss.status == 200);
    CHECK(ss.body["n_for_mu"] == 100);

    const auto sim = post("/api/samplesize", {{"target_mu", 0.2}, {"simulate", true}, {"sims", 200}, {"seed", 5}});
    REQUIRE(sim.status == 200);
    CHECK(sim.body["simulation"]["curve"].size() == 26);
    CHECK(sim.body["seed"] == 5);

    const auto unreachable = post("/api/samplesize", {{"target_mu", 0.001}, {"simulate", true},
                                                      {"grid", {10, 100}}, {"sims", 200}});
    CHECK(unreachable.status == 422);
    CHECK(unreachable.body["error"]["code"] == "TargetUnreachable");
}

TEST_CASE("request caps") {
    ServiceConfig cfg;
    const auto sims = post("/api/samplesize", {{"target_mu", 0.2}, {"simulate", true}, {"sims", 5000}}, cfg);
    CHECK(sims.status == 400);
    CHECK(sims.body["error"]["code"] == "RequestTooLarge");

    std::vector<int> grid;
    for (int i = 1; i <= 41; ++i) grid.push_back(10 * i);
    const auto big = post("/api/samplesize", {{"target_mu", 0.2}, {"simulate", true}, {"grid", grid}}, cfg);
    CHECK(big.body["error"]["code"] == "RequestTooLarge");

    cfg.max_samples = 1000;
    const auto samples = post("/api/analyze", {{"cm", {1, 2, 3, 4}}, {"samples", 5000}}, cfg);
    CHECK(samples.body["error"]["code"] == "RequestTooLarge");
}

TEST_CASE("HTTP server round trip") {
    ServiceConfig cfg;
    cfg.cors_origin = "http://localhost:5173";
    HttpService service(cfg);
    const int port = service.bind("127.0.0.1", 0);
    REQUIRE(port > 0);
    std::thread server([&] { service.listen(); });

    httplib::Client client("127.0.0.1", port);
    client.set_read_timeout(30, 0);
    for (int i = 0; i < 50; ++i) {
        if (auto h = client.Get("/api/health"); h && h->status == 200) break;
        std::this_thread::sleep_for(std::chrono::milliseconds(20));
    }

    const auto health = client.Get("/api/health");
    REQUIRE(health);
    CHECK(health->status == 200);
    CHECK(health->get_header_value("Access-Control-Allow-Origin") == cfg.cors_origin);

    const auto analyze = client.Post("/api/analyze", kAnalyze, "application/json");
    REQUIRE(analyze);
    CHECK(analyze->status == 200);
    CHECK(analyze->body == handle_request("POST", "/api/analyze", kAnalyze, cfg).body.dump());

    const auto bad = client.Post("/api/analyze", "{", "application/json");
    REQUIRE(bad);
    CHECK(bad->status == 400);

    // Concurrent identical requests are independent and deterministic.
    std::vector<std::future<std::string>> replies;
    for (int i = 0; i < 4; ++i) {
        replies.push_back(std::async(std::launch::async, [port] {
            httplib::Client c("127.0.0.1", port);
            c.set_read_timeout(30, 0);
            const auto r = c.Post("/api/analyze", kAnalyze, "application/json");
            return r ? r->body : std::string();
        }));
    }
    for (auto& f : replies) CHECK(f.get() == analyze->body);

    service.stop();
    server.join();
}
