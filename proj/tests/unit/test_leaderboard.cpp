#include <cmath>
#include <numeric>

#include "doctest.h"

#include "../oracles.hpp"
#include "cmu/error.hpp"
#include "cmu/leaderboard.hpp"

using namespace cmu;

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

std::vector<std::string> names(std::size_t k) {
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k; ++i) out.push_back("s" + std::to_string(i));
    return out;
}

}  // namespace

TEST_CASE("accuracy posteriors from point values") {
    CHECK(acc_posterior({"a", 0.9, 10}) == BetaParams{10, 2});
    CHECK(acc_posterior({"b", 1.0, 15123}) == BetaParams{15124, 1});
    CHECK(acc_posterior({"c", 0.95, 100}, RatePrior::jeffreys()) == BetaParams{95.5, 5.5});
    CHECK(code_of([] { acc_posterior({"d", 0.5004, 10}); }) == ErrorCode::RoundingInconsistent);
    CHECK(code_of([] { acc_posterior({"e", 0.5, 0}); }) == ErrorCode::InvalidArgument);
    CHECK(code_of([] { acc_posterior({"f", 1.2, 10}); }) == ErrorCode::InvalidArgument);
    // Rounded reporting: 0.935 of 15123 is 14140.005 correct, consistent at 3 decimals.
    CHECK(Submission{"g", 0.935, 15123}.correct() == 14140);
    CHECK(code_of([] { acc_posterior({"h", 1.0, 5}, RatePrior::haldane()); }) == ErrorCode::ImproperPosterior);
}

TEST_CASE("rank matrix is doubly stochastic") {
    const std::vector<BetaParams> post = {{90, 12}, {88, 14}, {91, 11}, {70, 30}, {89, 13}};
    const std::size_t draws = 20000;
    const auto m = rank_distribution(post, names(post.size()), draws, 4);
    const double tol = 3.0 / std::sqrt(double(draws));
    for (std::size_t s = 0; s < m.size(); ++s) {
        CHECK(std::abs(std::accumulate(m.entries[s].begin(), m.entries[s].end(), 0.0) - 1.0) <= tol);
        double col = 0.0;
        for (std::size_t r = 0; r < m.size(); ++r) col += m.entries[r][s];
        CHECK(std::abs(col - 1.0) <= tol);
    }
    CHECK(m.entries[3][4] > 0.99);
}

TEST_CASE("symmetric and separated submissions") {
    const auto sym = rank_distribution({{50, 50}, {50, 50}}, names(2), 10000, 5);
    for (const auto& row : sym.entries)
        for (double p : row) CHECK(std::abs(p - 0.5) < 0.02);

    const auto sep = rank_distribution({{10000, 1}, {1, 10000}}, names(2), 10000, 6);
    CHECK(sep.entries[0][0] > 0.999);
}

TEST_CASE("pairwise ranking agrees with a direct comparison oracle") {
    const auto m = rank_distribution({{96, 6}, {91, 11}}, names(2), 200000, 7);
    const double truth = oracle::prob_greater(96, 6, 91, 11, 1000000, 17);
    CHECK(std::abs(m.entries[0][0] - truth) < 0.01);
}

TEST_CASE("a stochastically larger posterior never loses rank-1 probability") {
    const std::vector<std::pair<double, double>> base = {{80, 20}, {85, 15}, {82, 18}};
    const std::vector<std::pair<double, double>> better = {{84, 16}, {85, 15}, {82, 18}};
    auto to_beta = [](const auto& v) {
        std::vector<BetaParams> out;
        for (const auto& [a, b] : v) out.push_back({a, b});
        return out;
    };
    const auto m0 = rank_distribution(to_beta(base), names(3), 200000, 8);
    const auto m1 = rank_distribution(to_beta(better), names(3), 200000, 9);
    CHECK(m1.entries[0][0] >= m0.entries[0][0]);
    CHECK(std::abs(m0.entries[0][0] - oracle::prob_first_largest(base, 1000000, 21)) < 0.01);
    CHECK(std::abs(m1.entries[0][0] - oracle::prob_first_largest(better, 1000000, 22)) < 0.01);
}

TEST_CASE("ranking is reproducible from the seed") {
    const std::vector<BetaParams> post = {{40, 10}, {38, 12}, {41, 9}};
    const auto a = rank_distribution(post, names(3), 5000, 10);
    const auto b = rank_distribution(post, names(3), 5000, 10);
    CHECK(a.entries == b.entries);
    CHECK(code_of([&] { rank_distribution({{1, 1}}, names(1), 10, 1); }) == ErrorCode::InvalidArgument);
}

TEST_CASE("probability that the leader is truly best") {
    const std::vector<Submission> subs = {{"a", 0.93, 1000}, {"b", 0.95, 1000}, {"c", 0.94, 1000}};
    const auto m = rank_distribution(subs, 20000, 11);
    const auto best = prob_best(subs, m);
    CHECK(best.index == 1);
    CHECK(best.probability == m.entries[1][0]);
    CHECK(best.standard_error == doctest::Approx(std::sqrt(best.probability * (1 - best.probability) / 20000.0)));
    CHECK(best.probability > 0.5);
    CHECK(best.probability < 1.0);
}

TEST_CASE("expected prizes") {
    SUBCASE("certain ranking pays out exactly") {
        const auto m = rank_distribution({{1e6, 1}, {5e5, 5e5}, {1, 1e6}, {2, 1e6}}, names(4), 5000, 12);
        const auto p = allocate_prizes(m, {10000, 2000, 1000});
        CHECK(p.expected_prize[0] == 10000);
        CHECK(p.expected_prize[1] == 2000);
        CHECK(p.expected_prize[2] + p.expected_prize[3] == doctest::Approx(1000));
    }
    SUBCASE("symmetric pair splits the pot") {
        const std::size_t draws = 20000;
        const auto m = rank_distribution({{30, 10}, {30, 10}}, names(2), draws, 13);
        const auto p = allocate_prizes(m, {10000, 2000});
        const double se = 8000.0 * 0.5 / std::sqrt(double(draws));
        for (double e : p.expected_prize) CHECK(std::abs(e - 6000.0) < 4.0 * se);
    }
    SUBCASE("expected payout is conserved") {
        const auto m = rank_distribution({{90, 10}, {91, 9}, {89, 11}, {92, 8}, {60, 40}}, names(5), 10000, 14);
        const auto p = allocate_prizes(m, {10000, 2000, 1000});
        CHECK(std::accumulate(p.expected_prize.begin(), p.expected_prize.end(), 0.0) == doctest::Approx(13000));
    }
    SUBCASE("too many prizes") {
        const auto m = rank_distribution({{9, 1}, {8, 2}}, names(2), 100, 1);
        CHECK(code_of([&] { allocate_prizes(m, {3, 2, 1}); }) == ErrorCode::InvalidArgument);
    }
}

TEST_CASE("leaderboard CSV") {
    const auto subs = parse_leaderboard_csv("name,accuracy,n\nalpha,0.9,10\n\"beta team\",95%,100\n", std::nullopt);
    REQUIRE(subs.size() == 2);
    CHECK(subs[0].name == "alpha");
    CHECK(subs[0].correct() == 9);
    CHECK(subs[1].name == "beta team");
    CHECK(subs[1].acc_point == doctest::Approx(0.95));
    CHECK(subs[1].decimals == 2);
    CHECK(subs[1].correct() == 95);

    const auto defaulted = parse_leaderboard_csv("Name,Accuracy\n# comment\nx,0.5\n", Count{8});
    CHECK(defaulted.at(0).n == 8);

    CHECK(code_of([] { parse_leaderboard_csv("name,accuracy\nx,0.5\n", std::nullopt); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_leaderboard_csv("team,score\n", Count{4}); }) == ErrorCode::ParseError);
    CHECK(code_of([] { parse_leaderboard_csv("", Count{4}); }) == ErrorCode::ParseError);
    try {
        parse_leaderboard_csv("name,accuracy,n\na,0.5,10\nb,abc,10\n", std::nullopt);
        FAIL("expected ParseError");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::ParseError);
        CHECK(std::string(e.what()).find("line 3") != std::string::npos);
    }
}
