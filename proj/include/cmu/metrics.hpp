#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "cmu/metric.hpp"
#include "cmu/posterior.hpp"

namespace cmu {

inline constexpr double kDefaultCredibility = 0.95;

struct Interval {
    double low = 0.0;
    double high = 0.0;
    double width() const noexcept { return high - low; }
    bool contains(double x) const noexcept { return low <= x && x <= high; }
};

// Shortest window of ceil(credibility * n) order statistics; ties resolve to
// the smallest lower endpoint. `sorted` must be ascending and non-empty.
Interval hpd_interval(std::span<const double> sorted, double credibility = kDefaultCredibility);

// Equal-tailed interval from linearly interpolated order statistics.
Interval equal_tailed_interval(std::span<const double> sorted, double credibility = kDefaultCredibility);

// Linear interpolation between order statistics (h = (n - 1) p).
double quantile_sorted(std::span<const double> sorted, double p);

struct PointSummaries {
    double mean = 0.0;
    double median = 0.0;
    double mode_estimate = 0.0;  // midpoint of the shortest 10%-mass window
};

PointSummaries point_summaries(std::span<const double> samples);

// True when the HPD window shows interior density valleys: the window is cut
// into 50 equal bins and a bin counts as a valley when it holds fewer than a
// tenth of the smaller of the peak counts on its left and right (both peaks
// must be at least 5% of the tallest bin). More than 2% valley bins flags.
bool multimodality_flag(std::span<const double> sorted, const Interval& window);

struct MetricPosterior {
    MetricId metric = MetricId::ACC;
    std::vector<double> samples;  // sorted ascending, invalid draws removed
    Interval hpd;
    double mu = 0.0;
    PointSummaries summary;
    double credibility = kDefaultCredibility;
    std::size_t invalid_samples = 0;
    bool multimodal = false;

    double hpd_low() const noexcept { return hpd.low; }
    double hpd_high() const noexcept { return hpd.high; }
};

// Posterior of a metric from an arbitrary stream; NaN entries are counted
// as invalid and dropped. Throws AllSamplesInvalid if nothing is left.
MetricPosterior summarize_stream(MetricId id, std::span<const double> stream,
                                 double credibility = kDefaultCredibility);

MetricPosterior metric_posterior(const CpmSampleSet& cpm, MetricId id,
                                 double credibility = kDefaultCredibility);

struct BmAssessment {
    double r_inf = 0.0;  // P(BM > 0)
    double r_dec = 0.0;  // P(BM < 0)
    MetricPosterior posterior;
};

BmAssessment bm_assessment(const CpmSampleSet& cpm, double credibility = kDefaultCredibility);

}  // namespace cmu
