#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "cmu/confusion_matrix.hpp"
#include "cmu/metrics.hpp"
#include "cmu/posterior.hpp"

namespace cmu {

struct AnalysisOptions {
    PriorSpec prior{};
    PrevalencePolicy prevalence = PrevalencePolicy::inferred();
    ModelKind model = ModelKind::ThreeBeta;
    std::size_t samples = kDefaultSamples;
    std::uint64_t seed = 0;
    double credibility = kDefaultCredibility;
    std::vector<MetricId> metrics{kAllMetrics.begin(), kAllMetrics.end()};
    std::size_t histogram_bins = 200;
};

// Strings shown to people. Values are rounded to the decade of MU/10 and MU
// itself to two significant digits, both in percentage points.
struct Rendered {
    std::string point;
    std::string mean;
    std::string hpd;
    std::string mu;
};

struct MetricReport {
    MetricId metric = MetricId::ACC;
    std::optional<double> point_estimate;  // count-based, absent if undefined
    double mean = 0.0;
    double median = 0.0;
    double mode = 0.0;
    Interval hpd;
    double mu = 0.0;
    std::size_t invalid_samples = 0;
    bool multimodal = false;
    Rendered rendered;
};

struct BmSummary {
    double r_inf = 0.0;
    double r_dec = 0.0;
};

struct AnalysisReport {
    ConfusionMatrix cm = ConfusionMatrix::validate(0, 0, 0, 1);
    PriorSpec prior{};
    PrevalencePolicy prevalence = PrevalencePolicy::inferred();
    ModelKind model = ModelKind::ThreeBeta;
    std::size_t samples = kDefaultSamples;
    std::uint64_t seed = 0;
    double credibility = kDefaultCredibility;
    std::vector<MetricReport> metrics;
    BmSummary bm;
    ConvergenceReport convergence;

    const MetricReport* find(MetricId id) const noexcept;
};

// Plot data for one metric posterior; densities integrate to 1.
struct HistogramSeries {
    MetricId metric = MetricId::ACC;
    std::vector<double> bin_edges;
    std::vector<double> densities;
    Interval hpd;
};

HistogramSeries make_histogram(const MetricPosterior& posterior, std::size_t bins = 200);

struct AnalysisResult {
    AnalysisReport report;
    std::vector<HistogramSeries> histograms;
};

// Builds the posterior, samples the CPM, summarises each requested metric,
// assesses BM and runs split Gelman-Rubin on every metric stream.
AnalysisResult run_analysis(const ConfusionMatrix& cm, const AnalysisOptions& options);

// Decimal exponent (in percentage points) of the finest digit MU justifies.
int resolution_exponent(double mu);
std::string render_percent(double value, double mu);
std::string render_mu(double mu);

nlohmann::json to_json(const AnalysisReport& report);
AnalysisReport report_from_json(const nlohmann::json& value);
nlohmann::json to_json(const HistogramSeries& series);
nlohmann::json to_json(const PriorSpec& prior);
PriorSpec prior_from_json(const nlohmann::json& value);
nlohmann::json to_json(const PrevalencePolicy& policy);
PrevalencePolicy prevalence_from_json(const nlohmann::json& value);
nlohmann::json to_json(const ConvergenceReport& report);

std::string render_table(const AnalysisReport& report);

}  // namespace cmu
