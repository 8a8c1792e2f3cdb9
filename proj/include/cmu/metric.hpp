#pragma once

#include <array>
#include <optional>
#include <span>
#include <string_view>

#include "cmu/confusion_matrix.hpp"

namespace cmu {

// Confusion probability matrix: the probabilities that generate each CM
// entry. Component order is fixed to (TP, FN, TN, FP).
struct Cpm {
    double tp = 0.25;
    double fn = 0.25;
    double tn = 0.25;
    double fp = 0.25;

    // Builds the CPM from prevalence and the two class-conditional rates.
    static Cpm from_rates(double prev, double tpr, double tnr) noexcept {
        return {tpr * prev, (1.0 - tpr) * prev, tnr * (1.0 - prev), (1.0 - tnr) * (1.0 - prev)};
    }
    // Empirical proportions of a confusion matrix.
    static Cpm from_counts(const ConfusionMatrix& cm) noexcept;
    static Cpm from_counts(const std::array<Count, 4>& cpm_order) noexcept;

    std::array<double, 4> components() const noexcept { return {tp, fn, tn, fp}; }
    double sum() const noexcept { return tp + fn + tn + fp; }
};

enum class MetricId { PREV, ACC, TPR, TNR, PPV, NPV, F1, MCC, BM, MK, BACC };

inline constexpr std::array<MetricId, 11> kAllMetrics = {
    MetricId::PREV, MetricId::ACC, MetricId::TPR, MetricId::TNR, MetricId::PPV, MetricId::NPV,
    MetricId::F1,   MetricId::MCC, MetricId::BM,  MetricId::MK,  MetricId::BACC};

std::string_view to_string(MetricId id) noexcept;
// Case-insensitive; throws InvalidArgument for unknown names.
MetricId parse_metric(std::string_view name);

// Lower bound of the metric's range (MCC, BM and MK live on [-1, 1]).
double metric_lower_bound(MetricId id) noexcept;

// Metric evaluation on a CPM.
//
// Throws SimplexViolation when a component is negative or the components do
// not sum to 1 within 1e-9. A zero denominator has no unique limit for any of
// the registered metrics, so such evaluations return NaN and callers count
// the sample as invalid.
using MetricFn = double (*)(const Cpm&);
MetricFn metric_fn(MetricId id) noexcept;

inline double evaluate(MetricId id, const Cpm& theta) { return metric_fn(id)(theta); }

// Classical count-based point estimate; nullopt when a denominator is zero.
std::optional<double> point_estimate(MetricId id, const ConfusionMatrix& cm);

inline constexpr double kSimplexTolerance = 1e-9;
void check_simplex(const Cpm& theta);

}  // namespace cmu
