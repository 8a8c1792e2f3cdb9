#pragma once

// Request/response layer shared by the command-line tool and the HTTP
// service. Each CLI subcommand maps to one request type and one endpoint.

#include <array>
#include <cstdint>
#include <optional>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "cmu/leaderboard.hpp"
#include "cmu/predictive.hpp"
#include "cmu/report.hpp"
#include "cmu/samplesize.hpp"

namespace cmu {

struct Capability {
    std::string_view subcommand;
    std::string_view route;  // empty for `serve`
};

inline constexpr std::array<Capability, 6> kCapabilities = {{
    {"analyze", "/api/analyze"},
    {"bm", "/api/bm"},
    {"predictive", "/api/predictive"},
    {"leaderboard", "/api/leaderboard"},
    {"samplesize", "/api/samplesize"},
    {"serve", ""},
}};

// Seed for requests that do not pin one; kept below 2^53 so JSON clients in
// any language can echo it back exactly.
std::uint64_t fresh_seed();

// -- analyze / bm -----------------------------------------------------------

struct AnalyzeRequest {
    ConfusionMatrix cm = ConfusionMatrix::validate(0, 0, 0, 1);
    AnalysisOptions options;
};

// Reads cm, prior, prior_prev/prior_tpr/prior_tnr, prev_fixed, prev_counts,
// prev_beta, samples, seed, credibility, model, metrics, histogram_bins.
AnalyzeRequest analyze_request_from_json(const nlohmann::json& body);

nlohmann::json analyze_response(const AnalysisResult& result);

struct BmResult {
    ConfusionMatrix cm = ConfusionMatrix::validate(0, 0, 0, 1);
    std::uint64_t seed = 0;
    std::size_t samples = 0;
    BmAssessment assessment;
    HistogramSeries histogram;
};

BmResult run_bm(const AnalyzeRequest& request);
nlohmann::json bm_response(const BmResult& result);

// -- predictive ---------------------------------------------------------------

struct PredictiveRequest {
    AnalyzeRequest base;  // cm, prior, model, seed
    Count n_synth = 0;    // 0 means "use the CM's n"
    std::size_t draws = 100000;
    MetricId metric = MetricId::ACC;
};

PredictiveRequest predictive_request_from_json(const nlohmann::json& body);

struct PredictiveResult {
    PredictiveRequest request;
    Count n_synth = 0;
    EmpiricalDistribution empirical;
    MetricSpreadAudit spread;
    MetricPosterior true_posterior;
    std::size_t true_samples_at_zero = 0;
    std::optional<std::array<VarianceAudit, 4>> variance;  // Dirichlet model only
};

PredictiveResult run_predictive(const PredictiveRequest& request);
nlohmann::json predictive_response(const PredictiveResult& result);

// -- leaderboard --------------------------------------------------------------

struct LeaderboardRequest {
    std::vector<Submission> submissions;
    std::size_t draws = 10000;
    std::uint64_t seed = 0;
    std::vector<double> prizes;
    RatePrior prior = RatePrior::laplace();
};

// Submissions come either as "csv" text or as a "submissions" array of
// {name, accuracy, n?}; "n" at top level is the default test-set size.
LeaderboardRequest leaderboard_request_from_json(const nlohmann::json& body);

struct LeaderboardResult {
    LeaderboardRequest request;
    std::vector<BetaParams> posteriors;
    RankProbabilityMatrix matrix;
    ProbBest best;
    std::optional<PrizeAllocation> prizes;
};

LeaderboardResult run_leaderboard(const LeaderboardRequest& request);
nlohmann::json leaderboard_response(const LeaderboardResult& result);

// -- samplesize ---------------------------------------------------------------

struct SampleSizeRequest {
    std::optional<double> target_mu;
    std::optional<Count> n;  // evaluate the closed-form bound at this N
    bool simulate = false;
    SampleSizePlan plan;
    std::vector<Count> grid = default_candidate_grid();
    std::size_t sims = 1000;
    std::uint64_t seed = 0;
};

SampleSizeRequest samplesize_request_from_json(const nlohmann::json& body);

struct SampleSizeResult {
    SampleSizeRequest request;
    std::optional<Count> n_for_target;
    std::optional<double> bound_at_n;
    std::optional<SampleSizePlan> simulated;
};

// Throws TargetUnreachable from the simulation when no grid point suffices.
SampleSizeResult run_samplesize(const SampleSizeRequest& request);
nlohmann::json samplesize_response(const SampleSizeResult& result);

}  // namespace cmu
