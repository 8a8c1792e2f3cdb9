#include "cmu/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "cmu/error.hpp"

namespace cmu {

namespace {

std::size_t window_size(std::size_t n, double mass) {
    // Guard against 0.95 * 20000 landing a hair above an integer.
    const double target = mass * static_cast<double>(n);
    auto k = static_cast<std::size_t>(std::ceil(target - 1e-9));
    return std::clamp<std::size_t>(k, 1, n);
}

Interval shortest_window(std::span<const double> sorted, std::size_t k) {
    std::size_t best = 0;
    double best_width = sorted[k - 1] - sorted[0];
    for (std::size_t i = 1; i + k <= sorted.size(); ++i) {
        const double w = sorted[i + k - 1] - sorted[i];
        if (w < best_width) {
            best_width = w;
            best = i;
        }
    }
    return {sorted[best], sorted[best + k - 1]};
}

void require_credibility(double credibility) {
    if (!(credibility > 0.0 && credibility < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "credibility must lie in (0, 1)");
    }
}

}  // namespace

Interval hpd_interval(std::span<const double> sorted, double credibility) {
    require_credibility(credibility);
    if (sorted.empty()) throw Error(ErrorCode::TooFewSamples, "HPD interval of an empty sample");
    return shortest_window(sorted, window_size(sorted.size(), credibility));
}

double quantile_sorted(std::span<const double> sorted, double p) {
    if (sorted.empty()) throw Error(ErrorCode::TooFewSamples, "quantile of an empty sample");
    const double h = (static_cast<double>(sorted.size()) - 1.0) * std::clamp(p, 0.0, 1.0);
    const auto lo = static_cast<std::size_t>(std::floor(h));
    const std::size_t hi = std::min(lo + 1, sorted.size() - 1);
    return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[hi] - sorted[lo]);
}

Interval equal_tailed_interval(std::span<const double> sorted, double credibility) {
    require_credibility(credibility);
    const double tail = 0.5 * (1.0 - credibility);
    return {quantile_sorted(sorted, tail), quantile_sorted(sorted, 1.0 - tail)};
}

PointSummaries point_summaries(std::span<const double> samples) {
    if (samples.empty()) throw Error(ErrorCode::TooFewSamples, "point summaries of an empty sample");
    std::vector<double> sorted(samples.begin(), samples.end());
    std::sort(sorted.begin(), sorted.end());
    PointSummaries out;
    out.mean = std::accumulate(sorted.begin(), sorted.end(), 0.0) / static_cast<double>(sorted.size());
    out.median = quantile_sorted(sorted, 0.5);
    const Interval w = shortest_window(sorted, window_size(sorted.size(), 0.1));
    out.mode_estimate = 0.5 * (w.low + w.high);
    return out;
}

bool multimodality_flag(std::span<const double> sorted, const Interval& window) {
    constexpr std::size_t kBins = 50;
    const double width = window.width();
    if (!(width > 0.0)) return false;

    std::array<std::size_t, kBins> counts{};
    const auto first = std::lower_bound(sorted.begin(), sorted.end(), window.low);
    const auto last = std::upper_bound(sorted.begin(), sorted.end(), window.high);
    for (auto it = first; it != last; ++it) {
        auto b = static_cast<std::size_t>((*it - window.low) / width * kBins);
        counts[std::min(b, kBins - 1)]++;
    }
    const std::size_t tallest = *std::max_element(counts.begin(), counts.end());
    const double floor = 0.05 * static_cast<double>(tallest);

    std::array<std::size_t, kBins> left_max{}, right_max{};
    std::size_t run = 0;
    for (std::size_t i = 0; i < kBins; ++i) {
        left_max[i] = run;
        run = std::max(run, counts[i]);
    }
    run = 0;
    for (std::size_t i = kBins; i-- > 0;) {
        right_max[i] = run;
        run = std::max(run, counts[i]);
    }
    std::size_t valleys = 0;
    for (std::size_t i = 1; i + 1 < kBins; ++i) {
        const double shoulder = static_cast<double>(std::min(left_max[i], right_max[i]));
        if (shoulder >= floor && static_cast<double>(counts[i]) < 0.1 * shoulder) ++valleys;
    }
    return static_cast<double>(valleys) > 0.02 * kBins;
}

MetricPosterior summarize_stream(MetricId id, std::span<const double> stream, double credibility) {
    require_credibility(credibility);
    MetricPosterior post;
    post.metric = id;
    post.credibility = credibility;
    post.samples.reserve(stream.size());
    for (double x : stream) {
        if (std::isnan(x)) {
            ++post.invalid_samples;
        } else {
            post.samples.push_back(x);
        }
    }
    if (post.samples.empty()) {
        throw Error(ErrorCode::AllSamplesInvalid,
                    std::string(to_string(id)) + " is undefined for every posterior sample");
    }
    std::sort(post.samples.begin(), post.samples.end());
    post.hpd = hpd_interval(post.samples, credibility);
    post.mu = post.hpd.width();
    post.summary = point_summaries(post.samples);
    post.multimodal = multimodality_flag(post.samples, post.hpd);
    return post;
}

MetricPosterior metric_posterior(const CpmSampleSet& cpm, MetricId id, double credibility) {
    if (cpm.size() == 0) throw Error(ErrorCode::TooFewSamples, "empty CPM sample set");
    const std::vector<double> stream = cpm.metric_stream(id);
    return summarize_stream(id, stream, credibility);
}

BmAssessment bm_assessment(const CpmSampleSet& cpm, double credibility) {
    BmAssessment out;
    out.posterior = metric_posterior(cpm, MetricId::BM, credibility);
    const auto& s = out.posterior.samples;
    const auto zero_lo = std::lower_bound(s.begin(), s.end(), 0.0);
    const auto zero_hi = std::upper_bound(s.begin(), s.end(), 0.0);
    const double total = static_cast<double>(s.size());
    out.r_dec = static_cast<double>(zero_lo - s.begin()) / total;
    out.r_inf = static_cast<double>(s.end() - zero_hi) / total;
    return out;
}

}  // namespace cmu
