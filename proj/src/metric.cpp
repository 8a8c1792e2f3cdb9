#include "cmu/metric.hpp"

#include <cctype>
#include <cmath>
#include <limits>
#include <sstream>
#include <string>

#include "cmu/error.hpp"

namespace cmu {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double ratio(double num, double den) noexcept { return den > 0.0 ? num / den : kNaN; }

double prev(const Cpm& t) { check_simplex(t); return t.tp + t.fn; }
double acc(const Cpm& t) { check_simplex(t); return t.tp + t.tn; }
double tpr(const Cpm& t) { check_simplex(t); return ratio(t.tp, t.tp + t.fn); }
double tnr(const Cpm& t) { check_simplex(t); return ratio(t.tn, t.tn + t.fp); }
double ppv(const Cpm& t) { check_simplex(t); return ratio(t.tp, t.tp + t.fp); }
double npv(const Cpm& t) { check_simplex(t); return ratio(t.tn, t.tn + t.fn); }
double f1(const Cpm& t) { check_simplex(t); return ratio(2.0 * t.tp, 2.0 * t.tp + t.fp + t.fn); }

double mcc(const Cpm& t) {
    check_simplex(t);
    const double den = (t.tp + t.fp) * (t.tp + t.fn) * (t.tn + t.fp) * (t.tn + t.fn);
    return ratio(t.tp * t.tn - t.fp * t.fn, std::sqrt(den));
}

double bm(const Cpm& t) { return tpr(t) + tnr(t) - 1.0; }
double mk(const Cpm& t) { return ppv(t) + npv(t) - 1.0; }
double bacc(const Cpm& t) { return 0.5 * (tpr(t) + tnr(t)); }

std::optional<double> count_ratio(Count num, Count den) {
    if (den == 0) return std::nullopt;
    return static_cast<double>(num) / static_cast<double>(den);
}

}  // namespace

Cpm Cpm::from_counts(const ConfusionMatrix& cm) noexcept { return from_counts(cm.cpm_order()); }

Cpm Cpm::from_counts(const std::array<Count, 4>& v) noexcept {
    const double n = static_cast<double>(v[0] + v[1] + v[2] + v[3]);
    return {v[0] / n, v[1] / n, v[2] / n, v[3] / n};
}

void check_simplex(const Cpm& t) {
    if (t.tp < 0.0 || t.fn < 0.0 || t.tn < 0.0 || t.fp < 0.0 || !(std::abs(t.sum() - 1.0) <= kSimplexTolerance)) {
        std::ostringstream msg;
        msg.precision(17);
        msg << "CPM (" << t.tp << ", " << t.fn << ", " << t.tn << ", " << t.fp << ") is not on the simplex";
        throw Error(ErrorCode::SimplexViolation, msg.str());
    }
}

MetricFn metric_fn(MetricId id) noexcept {
    switch (id) {
        case MetricId::PREV: return prev;
        case MetricId::ACC: return acc;
        case MetricId::TPR: return tpr;
        case MetricId::TNR: return tnr;
        case MetricId::PPV: return ppv;
        case MetricId::NPV: return npv;
        case MetricId::F1: return f1;
        case MetricId::MCC: return mcc;
        case MetricId::BM: return bm;
        case MetricId::MK: return mk;
        case MetricId::BACC: return bacc;
    }
    return acc;
}

std::optional<double> point_estimate(MetricId id, const ConfusionMatrix& cm) {
    const Count tp = cm.tp(), fn = cm.fn(), fp = cm.fp(), tn = cm.tn();
    switch (id) {
        case MetricId::PREV: return count_ratio(tp + fn, cm.n());
        case MetricId::ACC: return count_ratio(tp + tn, cm.n());
        case MetricId::TPR: return count_ratio(tp, tp + fn);
        case MetricId::TNR: return count_ratio(tn, tn + fp);
        case MetricId::PPV: return count_ratio(tp, tp + fp);
        case MetricId::NPV: return count_ratio(tn, tn + fn);
        case MetricId::F1: return count_ratio(2 * tp, 2 * tp + fp + fn);
        case MetricId::MCC: {
            const double den = static_cast<double>(tp + fp) * static_cast<double>(tp + fn) *
                               static_cast<double>(tn + fp) * static_cast<double>(tn + fn);
            if (den == 0.0) return std::nullopt;
            return (static_cast<double>(tp) * tn - static_cast<double>(fp) * fn) / std::sqrt(den);
        }
        case MetricId::BM: {
            auto sens = point_estimate(MetricId::TPR, cm);
            auto specificity = point_estimate(MetricId::TNR, cm);
            if (!sens || !specificity) return std::nullopt;
            return *sens + *specificity - 1.0;
        }
        case MetricId::MK: {
            auto p = point_estimate(MetricId::PPV, cm);
            auto n = point_estimate(MetricId::NPV, cm);
            if (!p || !n) return std::nullopt;
            return *p + *n - 1.0;
        }
        case MetricId::BACC: {
            auto sens = point_estimate(MetricId::TPR, cm);
            auto specificity = point_estimate(MetricId::TNR, cm);
            if (!sens || !specificity) return std::nullopt;
            return 0.5 * (*sens + *specificity);
        }
    }
    return std::nullopt;
}

std::string_view to_string(MetricId id) noexcept {
    switch (id) {
        case MetricId::PREV: return "PREV";
        case MetricId::ACC: return "ACC";
        case MetricId::TPR: return "TPR";
        case MetricId::TNR: return "TNR";
        case MetricId::PPV: return "PPV";
        case MetricId::NPV: return "NPV";
        case MetricId::F1: return "F1";
        case MetricId::MCC: return "MCC";
        case MetricId::BM: return "BM";
        case MetricId::MK: return "MK";
        case MetricId::BACC: return "BACC";
    }
    return "?";
}

MetricId parse_metric(std::string_view name) {
    std::string upper(name);
    for (auto& c : upper) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
    for (MetricId id : kAllMetrics) {
        if (to_string(id) == upper) return id;
    }
    throw Error(ErrorCode::InvalidArgument, "unknown metric '" + std::string(name) + "'");
}

double metric_lower_bound(MetricId id) noexcept {
    switch (id) {
        case MetricId::MCC:
        case MetricId::BM:
        case MetricId::MK: return -1.0;
        default: return 0.0;
    }
}

}  // namespace cmu
