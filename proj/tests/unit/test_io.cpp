#include <cmath>
#include <filesystem>
#include <fstream>

#include "doctest.h"

#include "cmu/cm_io.hpp"
#include "cmu/error.hpp"
#include "cmu/report.hpp"

using namespace cmu;
using nlohmann::json;

namespace {

ErrorCode code_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.code();
    }
    FAIL("expected cmu::Error");
    return ErrorCode::InvalidArgument;
}

const ConfusionMatrix kSmall = ConfusionMatrix::validate(26, 0, 2, 6);

AnalysisOptions seeded(std::uint64_t seed) {
    AnalysisOptions o;
    o.seed = seed;
    return o;
}

}  // namespace

TEST_CASE("confusion matrix text formats") {
    CHECK(parse_cm_text(R"({"tp":26,"fn":0,"fp":2,"tn":6})") == kSmall);
    CHECK(parse_cm_text("[[26,0],[2,6]]") == kSmall);
    CHECK(parse_cm_text("[26,0,2,6]") == kSmall);
    CHECK(parse_cm_text("tn,fp,fn,tp\n6,2,0,26\n") == kSmall);
    CHECK(parse_cm_text("26,0,2,6") == kSmall);
    CHECK(parse_cm_text("26,0\n2,6\n") == kSmall);
    CHECK(parse_cm_text("26,0;2,6") == kSmall);

    CHECK(code_of([] { parse_cm_text(R"({"tp":26,"fn":0,"fp":2})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_cm_text(R"({"tp":26,"fn":0,"fp":2,"tn":1.5})"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_cm_text("26,0,x,6"); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_cm_text(R"({"tp":-1,"fn":0,"fp":2,"tn":6})"); }) == ErrorCode::NegativeCount);
    CHECK(code_of([] { parse_cm_text("[[0,0],[0,0]]"); }) == ErrorCode::EmptyMatrix);
    try {
        parse_cm_text("tp,fn,fp,tn\n1,2,three,4\n");
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(std::string(e.what()).find("line 2") != std::string::npos);
    }
}

TEST_CASE("confusion matrix files") {
    const auto dir = std::filesystem::temp_directory_path() / "cmu_io_test";
    std::filesystem::create_directories(dir);
    const auto path = (dir / "cm.json").string();
    std::ofstream(path) << R"({"tp": 26, "fn": 0, "fp": 2, "tn": 6})";
    CHECK(parse_cm(path) == kSmall);
    CHECK(code_of([&] { parse_cm((dir / "missing.json").string()); }) == ErrorCode::ParseError);
    CHECK(parse_cm("26,0,2,6") == kSmall);

    const json j = cm_to_json(kSmall);
    CHECK(j["n"] == 34);
    CHECK(cm_from_json(j) == kSmall);
}

TEST_CASE("rendering follows the uncertainty") {
    CHECK(resolution_exponent(0.11) == 0);
    CHECK(resolution_exponent(0.0123) == -1);
    CHECK(resolution_exponent(0.51) == 0);
    CHECK(resolution_exponent(0.00034) == -3);
    CHECK(render_mu(0.11) == "11 pp");
    CHECK(render_mu(0.0123) == "1.2 pp");
    CHECK(render_mu(0.00034) == "0.034 pp");
    CHECK(render_mu(0.0) == "0 pp");
    CHECK(render_percent(0.8912, 0.11) == "89%");
    CHECK(render_percent(0.8912, 0.0123) == "89.1%");
    CHECK(render_percent(0.5, 0.0) == "50%");
}

TEST_CASE("analysis report contents") {
    const auto result = run_analysis(kSmall, seeded(7));
    const auto& r = result.report;
    CHECK(r.metrics.size() == kAllMetrics.size());
    CHECK(result.histograms.size() == kAllMetrics.size());
    CHECK(r.convergence.passed);
    CHECK(r.seed == 7);
    const auto* tpr = r.find(MetricId::TPR);
    REQUIRE(tpr != nullptr);
    CHECK(*tpr->point_estimate == 1.0);
    CHECK(std::abs(tpr->hpd.low - 0.89) <= 0.01);
    CHECK(tpr->rendered.mu == render_mu(tpr->mu));
    CHECK(r.bm.r_dec < 0.005);

    for (const auto& h : result.histograms) {
        CHECK(h.bin_edges.size() == 201);
        CHECK(h.densities.size() == 200);
        double mass = 0.0;
        for (std::size_t i = 0; i < h.densities.size(); ++i) mass += h.densities[i] * (h.bin_edges[i + 1] - h.bin_edges[i]);
        CHECK(mass == doctest::Approx(1.0));
    }
}

TEST_CASE("fixed prevalence collapses the PREV posterior") {
    AnalysisOptions o = seeded(3);
    o.prevalence = PrevalencePolicy::fixed(0.5);
    const auto r = run_analysis(kSmall, o).report;
    const auto* prev = r.find(MetricId::PREV);
    REQUIRE(prev != nullptr);
    CHECK(*prev->point_estimate == 0.5);
    CHECK(prev->mean == 0.5);
    CHECK(prev->hpd.low == 0.5);
    CHECK(prev->hpd.high == 0.5);
    CHECK(prev->mu == 0.0);
    CHECK(prev->rendered.mu == "0 pp");
}

TEST_CASE("machine-readable report round-trips") {
    AnalysisOptions o = seeded(11);
    o.prior.tnr = RatePrior::custom(0.5, 2.0);
    o.prevalence = PrevalencePolicy::external({5, 20});
    const auto r = run_analysis(ConfusionMatrix::validate(4, 1, 3, 12), o).report;
    const json j = to_json(r);
    const auto back = report_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.cm == r.cm);
    CHECK(back.prior == r.prior);
    CHECK(back.prevalence == r.prevalence);
    CHECK(back.metrics.size() == r.metrics.size());
    for (std::size_t i = 0; i < r.metrics.size(); ++i) {
        CHECK(back.metrics[i].hpd.low == r.metrics[i].hpd.low);
        CHECK(back.metrics[i].mu == r.metrics[i].mu);
        CHECK(back.metrics[i].point_estimate == r.metrics[i].point_estimate);
    }
}

TEST_CASE("same seed gives identical output") {
    const auto a = to_json(run_analysis(kSmall, seeded(5)).report).dump();
    const auto b = to_json(run_analysis(kSmall, seeded(5)).report).dump();
    const auto c = to_json(run_analysis(kSmall, seeded(6)).report).dump();
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("undefined point estimates and invalid options") {
    const auto r = run_analysis(ConfusionMatrix::validate(3, 0, 0, 0), seeded(2)).report;
    CHECK_FALSE(r.find(MetricId::TNR)->point_estimate.has_value());
    CHECK(r.find(MetricId::TNR)->rendered.point == "undefined");
    CHECK(r.find(MetricId::TNR)->invalid_samples == 0);

    AnalysisOptions tiny = seeded(1);
    tiny.samples = 2;
    CHECK_THROWS_AS(run_analysis(kSmall, tiny), Error);
    const auto table = render_table(run_analysis(kSmall, seeded(1)).report);
    CHECK(table.find("TPR") != std::string::npos);
    CHECK(table.find("[89%, 100%]") != std::string::npos);
}
