#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>

#include "doctest.h"

#include "cmu/cli.hpp"
#include "cmu/commands.hpp"
#include "cmu/error.hpp"
#include "cmu/service.hpp"

using namespace cmu;
using nlohmann::json;

namespace {

struct Run {
    int code;
    std::string out;
    std::string err;
};

Run run(std::vector<std::string> args) {
    args.insert(args.begin(), "cmu");
    std::vector<const char*> argv;
    for (const auto& a : args) argv.push_back(a.c_str());
    std::ostringstream out, err;
    const int code = run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

std::filesystem::path scratch() {
    const auto dir = std::filesystem::temp_directory_path() / "cmu_cli_test";
    std::filesystem::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("analyze prints the posterior table") {
    const auto r = run({"analyze", "--cm", "26,0,2,6", "--seed", "1"});
    CHECK(r.code == 0);
    CHECK(r.out.find("[89%, 100%]") != std::string::npos);
    CHECK(r.out.find("seed 1") != std::string::npos);
}

TEST_CASE("analyze json output is reproducible and echoes the seed") {
    const auto a = run({"analyze", "--cm", "26,0,2,6", "--seed", "9", "--format", "json"});
    const auto b = run({"analyze", "--cm", "26,0,2,6", "--seed", "9", "--format", "json"});
    REQUIRE(a.code == 0);
    CHECK(a.out == b.out);
    const json j = json::parse(a.out);
    CHECK(j["seed"] == 9);
    CHECK(j["samples"] == 20000);

    const auto unseeded = run({"analyze", "--cm", "26,0,2,6", "--format", "json", "--samples", "1000"});
    const json u = json::parse(unseeded.out);
    CHECK(u["seed"].get<std::uint64_t>() < (std::uint64_t{1} << 53));
}

TEST_CASE("analyze options") {
    const auto fixed = run({"analyze", "--cm", "26,0,2,6", "--prev-fixed", "0.5", "--seed", "1", "--format", "json"});
    REQUIRE(fixed.code == 0);
    const json j = json::parse(fixed.out);
    const auto& prev = j["metrics"][0];
    CHECK(prev["metric"] == "PREV");
    CHECK(prev["mu"] == 0.0);
    CHECK(prev["point_estimate"] == 0.5);

    const auto counts = run({"analyze", "--cm", "26,0,2,6", "--prev-counts", "10,90", "--seed", "1", "--metrics",
                             "prev,tpr", "--format", "json"});
    REQUIRE(counts.code == 0);
    const json c = json::parse(counts.out);
    CHECK(c["metrics"].size() == 2);
    CHECK(c["metrics"][0]["mean"].get<double>() < 0.2);

    const auto dir = run({"analyze", "--cm", "26,0,2,6", "--model", "dirichlet", "--prior", "jeffreys", "--seed",
                          "2", "--credibility", "0.9"});
    CHECK(dir.code == 0);
    CHECK(dir.out.find("dirichlet") != std::string::npos);

    const auto per_rate = run({"analyze", "--cm", "26,0,2,6", "--prior-tnr", "custom:2,2", "--seed", "2",
                               "--format", "json"});
    REQUIRE(per_rate.code == 0);
    CHECK(json::parse(per_rate.out)["prior"]["tnr"]["alpha"] == 2.0);
}

TEST_CASE("analyze writes histogram series") {
    const auto dir = scratch() / "hist";
    std::filesystem::remove_all(dir);
    const auto r = run({"analyze", "--cm", "26,0,2,6", "--seed", "1", "--histograms", dir.string(), "--bins", "50"});
    REQUIRE(r.code == 0);
    std::size_t files = 0;
    for (const auto& e : std::filesystem::directory_iterator(dir)) {
        ++files;
        std::ifstream in(e.path());
        const json h = json::parse(in);
        CHECK(h["densities"].size() == 50);
    }
    CHECK(files == 11);
}

TEST_CASE("input and model errors exit with code 2") {
    const auto empty = run({"analyze", "--cm", "0,0,0,0"});
    CHECK(empty.code == 2);
    CHECK(empty.err.find("EmptyMatrix") != std::string::npos);

    const auto improper = run({"analyze", "--cm", "1,0,0,0", "--prior", "haldane"});
    CHECK(improper.code == 2);
    CHECK(improper.err.find("ImproperPosterior") != std::string::npos);

    const auto missing = run({"analyze", "--cm", "no_such_file.json"});
    CHECK(missing.code == 2);
    CHECK(missing.err.find("ParseError") != std::string::npos);
}

TEST_CASE("usage errors exit with code 1") {
    CHECK(run({}).code == 1);
    CHECK(run({"analyze"}).code == 1);
    CHECK(run({"analyze", "--cm", "1,2,3,4", "--format", "xml"}).code == 1);
    CHECK(run({"analyze", "--cm", "1,2,3,4", "--prev-fixed", "0.5", "--prev-counts", "1,2"}).code == 1);
    CHECK(run({"frobnicate"}).code == 1);
    CHECK(run({"--help"}).code == 0);
}

TEST_CASE("bm and predictive subcommands") {
    const auto bm = run({"bm", "--cm", "26,0,2,6", "--seed", "1", "--format", "json"});
    REQUIRE(bm.code == 0);
    const json b = json::parse(bm.out);
    CHECK(b["r_dec"].get<double>() < 0.005);
    CHECK(b["r_inf"].get<double>() + b["r_dec"].get<double>() == doctest::Approx(1.0));

    const auto pred = run({"predictive", "--cm", "1,0,0,0", "--model", "dirichlet", "--n-synth", "1", "--draws",
                           "50000", "--seed", "1", "--format", "json"});
    REQUIRE(pred.code == 0);
    const json p = json::parse(pred.out);
    CHECK(p["empirical"]["support"].size() == 2);
    CHECK(p["true_samples_at_zero"] == 0);
    CHECK(p["variance_audit"].size() == 4);

    const auto table = run({"predictive", "--cm", "26,0,2,6", "--seed", "1", "--draws", "2000"});
    CHECK(table.code == 0);
    CHECK(table.out.find("N=34") != std::string::npos);
}

TEST_CASE("leaderboard subcommand") {
    const auto csv = scratch() / "board.csv";
    std::ofstream(csv) << "name,accuracy\nfirst,0.95\nsecond,0.93\nthird,0.94\n";
    const auto r = run({"leaderboard", "--csv", csv.string(), "--n", "1000", "--seed", "3", "--prizes",
                        "10000,2000,1000", "--format", "json"});
    REQUIRE(r.code == 0);
    const json j = json::parse(r.out);
    CHECK(j["prob_best"]["name"] == "first");
    CHECK(j["expected_total"].get<double>() == doctest::Approx(13000));

    const auto table = run({"leaderboard", "--csv", csv.string(), "--n", "1000", "--seed", "3"});
    CHECK(table.code == 0);
    CHECK(table.out.find("truly best") != std::string::npos);

    CHECK(run({"leaderboard", "--csv", csv.string()}).code == 2);
}

TEST_CASE("samplesize subcommand") {
    const auto r = run({"samplesize", "--target-mu", "0.2"});
    CHECK(r.code == 0);
    CHECK(r.out.find("N >= 100 ") != std::string::npos);

    const auto sim = run({"samplesize", "--target-mu", "0.2", "--simulate", "--grid", "50,100,200", "--sims", "500",
                          "--seed", "1", "--format", "json"});
    REQUIRE(sim.code == 0);
    const json j = json::parse(sim.out);
    CHECK(j["n_for_mu"] == 100);
    CHECK(j["simulation"]["curve"].size() == 3);
    CHECK(j["simulation"]["result_n"] == 100);

    const auto unreachable =
        run({"samplesize", "--target-mu", "0.01", "--simulate", "--grid", "10,20", "--sims", "200"});
    CHECK(unreachable.code == 2);
    CHECK(unreachable.err.find("TargetUnreachable") != std::string::npos);

    CHECK(run({"samplesize", "--n", "10"}).code == 2);
}

TEST_CASE("every subcommand maps to exactly one endpoint") {
    // Subcommands as the CLI itself lists them.
    std::set<std::string> listed;
    std::istringstream help(run({"--help"}).out);
    bool in_section = false;
    for (std::string line; std::getline(help, line);) {
        if (line.rfind("Subcommands:", 0) == 0) {
            in_section = true;
        } else if (in_section && line.size() > 2 && line[0] == ' ') {
            std::istringstream words(line);
            std::string name;
            words >> name;
            listed.insert(name);
        }
    }
    std::set<std::string> declared;
    for (const auto& cap : kCapabilities) declared.insert(std::string(cap.subcommand));
    CHECK(listed == declared);

    std::set<std::string> routes;
    for (const auto& cap : kCapabilities) {
        CHECK(run({std::string(cap.subcommand), "--help"}).code == 0);
        if (cap.route.empty()) continue;
        CHECK(routes.insert(std::string(cap.route)).second);
        CHECK(handle_request("POST", cap.route, "{}", ServiceConfig{}).status != 404);
    }
    CHECK(routes.size() == kCapabilities.size() - 1);
}
