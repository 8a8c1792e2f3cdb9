#include "cmu/report.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <sstream>

#include "cmu/cm_io.hpp"
#include "cmu/error.hpp"

namespace cmu {

using nlohmann::json;

namespace {

std::string printf_string(const char* fmt, int decimals, double value) {
    char buf[64];
    std::snprintf(buf, sizeof buf, fmt, decimals, value);
    return buf;
}

double round_to(double value, int exponent) {
    const double step = std::pow(10.0, exponent);
    return std::round(value / step) * step + 0.0;  // + 0.0 folds -0 into 0
}

std::string trim_zeros(std::string s) {
    if (s.find('.') == std::string::npos) return s;
    while (!s.empty() && s.back() == '0') s.pop_back();
    if (!s.empty() && s.back() == '.') s.pop_back();
    return s;
}

json number_or_null(std::optional<double> v) { return v ? json(*v) : json(nullptr); }

json rate_prior_json(const RatePrior& p) {
    return {{"kind", std::string(to_string(p.kind))}, {"alpha", p.params.alpha}, {"beta", p.params.beta}};
}

RatePrior rate_prior_from_json(const json& v) {
    if (v.is_string()) return RatePrior::parse(v.get<std::string>());
    if (!v.is_object() || !v.contains("kind")) {
        throw Error(ErrorCode::ParseError, "prior must be a name or {kind, alpha, beta}");
    }
    const auto kind = v.at("kind").get<std::string>();
    if (kind == "custom") return RatePrior::custom(v.at("alpha").get<double>(), v.at("beta").get<double>());
    return RatePrior::parse(kind);
}

}  // namespace

int resolution_exponent(double mu) {
    if (!(mu > 0.0)) return -2;
    return static_cast<int>(std::floor(std::log10(mu * 100.0))) - 1;
}

std::string render_percent(double value, double mu) {
    const double pp = value * 100.0;
    if (!(mu > 0.0)) return trim_zeros(printf_string("%.*f", 2, pp + 0.0)) + "%";
    const int e = resolution_exponent(mu);
    return printf_string("%.*f", std::max(0, -e), round_to(pp, e)) + "%";
}

std::string render_mu(double mu) {
    if (!(mu > 0.0)) return "0 pp";
    const int e = resolution_exponent(mu);
    return printf_string("%.*f", std::max(0, -e), round_to(mu * 100.0, e)) + " pp";
}

const MetricReport* AnalysisReport::find(MetricId id) const noexcept {
    for (const auto& m : metrics) {
        if (m.metric == id) return &m;
    }
    return nullptr;
}

HistogramSeries make_histogram(const MetricPosterior& posterior, std::size_t bins) {
    if (bins < 1) throw Error(ErrorCode::InvalidArgument, "histogram needs at least one bin");
    const auto& s = posterior.samples;
    HistogramSeries out;
    out.metric = posterior.metric;
    out.hpd = posterior.hpd;
    double lo = s.front();
    double hi = s.back();
    if (!(hi > lo)) {
        // Constant stream: a narrow spike around the value.
        lo -= 0.005;
        hi += 0.005;
    }
    const double width = (hi - lo) / static_cast<double>(bins);
    out.bin_edges.resize(bins + 1);
    for (std::size_t i = 0; i <= bins; ++i) out.bin_edges[i] = lo + width * static_cast<double>(i);
    out.bin_edges.back() = hi;
    std::vector<std::size_t> counts(bins, 0);
    for (double x : s) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        counts[std::min(b, bins - 1)]++;
    }
    out.densities.resize(bins);
    const double total = static_cast<double>(s.size());
    for (std::size_t i = 0; i < bins; ++i) {
        out.densities[i] = static_cast<double>(counts[i]) / (total * (out.bin_edges[i + 1] - out.bin_edges[i]));
    }
    return out;
}

AnalysisResult run_analysis(const ConfusionMatrix& cm, const AnalysisOptions& options) {
    if (options.samples < 4) throw Error(ErrorCode::TooFewSamples, "at least 4 posterior samples are required");
    const PosteriorModel model = build_posterior(cm, options.prior, options.prevalence, options.model);
    const CpmSampleSet cpm = sample_cpm(model, options.samples, options.seed);

    AnalysisResult result;
    AnalysisReport& report = result.report;
    report.cm = cm;
    report.prior = options.prior;
    report.prevalence = options.prevalence;
    report.model = options.model;
    report.samples = options.samples;
    report.seed = options.seed;
    report.credibility = options.credibility;

    std::vector<MetricId> ids;
    for (MetricId id : options.metrics) {
        if (std::find(ids.begin(), ids.end(), id) == ids.end()) ids.push_back(id);
    }
    const bool prev_fixed = options.prevalence.mode() == PrevalenceMode::Fixed;
    for (MetricId id : ids) {
        // A fixed prevalence is a constant, not the rounded sum of two components.
        const std::vector<double> stream = id == MetricId::PREV && prev_fixed
                                               ? std::vector<double>(cpm.size(), options.prevalence.fixed_value())
                                               : cpm.metric_stream(id);
        std::vector<double> valid;
        valid.reserve(stream.size());
        for (double x : stream) {
            if (!std::isnan(x)) valid.push_back(x);
        }
        const MetricPosterior post = summarize_stream(id, stream, options.credibility);
        if (valid.size() >= 4) report.convergence.merge(gelman_rubin(valid, 2, std::string(to_string(id))));

        MetricReport m;
        m.metric = id;
        m.point_estimate = point_estimate(id, cm);
        if (id == MetricId::PREV && prev_fixed) {
            m.point_estimate = options.prevalence.fixed_value();
        }
        m.mean = post.summary.mean;
        m.median = post.summary.median;
        m.mode = post.summary.mode_estimate;
        m.hpd = post.hpd;
        m.mu = post.mu;
        m.invalid_samples = post.invalid_samples;
        m.multimodal = post.multimodal;
        m.rendered.point = m.point_estimate ? render_percent(*m.point_estimate, m.mu) : "undefined";
        m.rendered.mean = render_percent(m.mean, m.mu);
        m.rendered.hpd = "[" + render_percent(m.hpd.low, m.mu) + ", " + render_percent(m.hpd.high, m.mu) + "]";
        m.rendered.mu = render_mu(m.mu);
        report.metrics.push_back(std::move(m));
        result.histograms.push_back(make_histogram(post, options.histogram_bins));
    }

    const BmAssessment bm = bm_assessment(cpm, options.credibility);
    report.bm = {bm.r_inf, bm.r_dec};
    return result;
}

json to_json(const PriorSpec& prior) {
    return {{"prev", rate_prior_json(prior.prev)}, {"tpr", rate_prior_json(prior.tpr)}, {"tnr", rate_prior_json(prior.tnr)}};
}

PriorSpec prior_from_json(const json& value) {
    if (value.is_string()) return PriorSpec::uniform(RatePrior::parse(value.get<std::string>()));
    PriorSpec p;
    p.prev = rate_prior_from_json(value.at("prev"));
    p.tpr = rate_prior_from_json(value.at("tpr"));
    p.tnr = rate_prior_from_json(value.at("tnr"));
    return p;
}

json to_json(const PrevalencePolicy& policy) {
    json out = {{"mode", std::string(to_string(policy.mode()))}};
    if (policy.mode() == PrevalenceMode::Fixed) out["value"] = policy.fixed_value();
    if (policy.mode() == PrevalenceMode::External) {
        out["alpha"] = policy.external_params().alpha;
        out["beta"] = policy.external_params().beta;
    }
    return out;
}

PrevalencePolicy prevalence_from_json(const json& value) {
    const auto mode = value.at("mode").get<std::string>();
    if (mode == "inferred") return PrevalencePolicy::inferred();
    if (mode == "fixed") return PrevalencePolicy::fixed(value.at("value").get<double>());
    if (mode == "external") {
        return PrevalencePolicy::external({value.at("alpha").get<double>(), value.at("beta").get<double>()});
    }
    throw Error(ErrorCode::ParseError, "unknown prevalence mode '" + mode + "'");
}

json to_json(const ConvergenceReport& report) {
    json rc = json::array();
    for (const auto& e : report.entries) {
        rc.push_back({{"quantity", e.quantity}, {"rc", std::isfinite(e.rc) ? json(e.rc) : json(nullptr)}});
    }
    return {{"passed", report.passed}, {"threshold", kConvergenceThreshold}, {"rc", rc}};
}

json to_json(const AnalysisReport& report) {
    json metrics = json::array();
    for (const auto& m : report.metrics) {
        metrics.push_back({
            {"metric", std::string(to_string(m.metric))},
            {"point_estimate", number_or_null(m.point_estimate)},
            {"mean", m.mean},
            {"median", m.median},
            {"mode", m.mode},
            {"hpd", {m.hpd.low, m.hpd.high}},
            {"mu", m.mu},
            {"invalid_samples", m.invalid_samples},
            {"multimodal", m.multimodal},
            {"rendered", {{"point", m.rendered.point}, {"mean", m.rendered.mean}, {"hpd", m.rendered.hpd}, {"mu", m.rendered.mu}}},
        });
    }
    return {
        {"cm", cm_to_json(report.cm)},
        {"model", std::string(to_string(report.model))},
        {"prior", to_json(report.prior)},
        {"prevalence", to_json(report.prevalence)},
        {"samples", report.samples},
        {"seed", report.seed},
        {"credibility", report.credibility},
        {"metrics", metrics},
        {"bm", {{"r_inf", report.bm.r_inf}, {"r_dec", report.bm.r_dec}}},
        {"convergence", to_json(report.convergence)},
    };
}

AnalysisReport report_from_json(const json& value) {
    try {
        AnalysisReport r;
        r.cm = cm_from_json(value.at("cm"));
        r.model = parse_model_kind(value.at("model").get<std::string>());
        r.prior = prior_from_json(value.at("prior"));
        r.prevalence = prevalence_from_json(value.at("prevalence"));
        r.samples = value.at("samples").get<std::size_t>();
        r.seed = value.at("seed").get<std::uint64_t>();
        r.credibility = value.at("credibility").get<double>();
        for (const auto& j : value.at("metrics")) {
            MetricReport m;
            m.metric = parse_metric(j.at("metric").get<std::string>());
            if (!j.at("point_estimate").is_null()) m.point_estimate = j.at("point_estimate").get<double>();
            m.mean = j.at("mean").get<double>();
            m.median = j.at("median").get<double>();
            m.mode = j.at("mode").get<double>();
            m.hpd = {j.at("hpd").at(0).get<double>(), j.at("hpd").at(1).get<double>()};
            m.mu = j.at("mu").get<double>();
            m.invalid_samples = j.at("invalid_samples").get<std::size_t>();
            m.multimodal = j.at("multimodal").get<bool>();
            const auto& rj = j.at("rendered");
            m.rendered = {rj.at("point").get<std::string>(), rj.at("mean").get<std::string>(),
                          rj.at("hpd").get<std::string>(), rj.at("mu").get<std::string>()};
            r.metrics.push_back(std::move(m));
        }
        r.bm = {value.at("bm").at("r_inf").get<double>(), value.at("bm").at("r_dec").get<double>()};
        const auto& cj = value.at("convergence");
        r.convergence.passed = cj.at("passed").get<bool>();
        for (const auto& e : cj.at("rc")) {
            const double rc = e.at("rc").is_null() ? std::numeric_limits<double>::infinity() : e.at("rc").get<double>();
            r.convergence.entries.push_back({e.at("quantity").get<std::string>(), rc});
        }
        return r;
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed report: ") + e.what());
    }
}

json to_json(const HistogramSeries& series) {
    return {{"metric", std::string(to_string(series.metric))},
            {"bin_edges", series.bin_edges},
            {"densities", series.densities},
            {"hpd", {series.hpd.low, series.hpd.high}}};
}

std::string render_table(const AnalysisReport& r) {
    std::ostringstream out;
    const auto& cm = r.cm;
    out << "Confusion matrix: TP=" << cm.tp() << " FN=" << cm.fn() << " FP=" << cm.fp() << " TN=" << cm.tn()
        << " (N=" << cm.n() << ")\n";
    out << "Model: " << to_string(r.model) << "; prior PREV=" << r.prior.prev.to_string()
        << " TPR=" << r.prior.tpr.to_string() << " TNR=" << r.prior.tnr.to_string() << "; prevalence "
        << to_string(r.prevalence.mode());
    if (r.prevalence.mode() == PrevalenceMode::Fixed) out << " at " << r.prevalence.fixed_value();
    if (r.prevalence.mode() == PrevalenceMode::External) {
        out << " Beta(" << r.prevalence.external_params().alpha << ", " << r.prevalence.external_params().beta << ")";
    }
    out << "\n" << r.samples << " samples, seed " << r.seed << ", "
        << trim_zeros(printf_string("%.*f", 2, r.credibility * 100.0)) << "% HPD\n\n";

    char line[160];
    std::snprintf(line, sizeof line, "%-7s %-10s %-10s %-18s %s\n", "Metric", "Point", "Mean", "HPD", "MU");
    out << line;
    for (const auto& m : r.metrics) {
        std::string name(to_string(m.metric));
        if (m.metric == MetricId::PREV && r.prevalence.mode() == PrevalenceMode::Fixed) name += "*";
        std::string flags;
        if (m.multimodal) flags += "  (multimodal?)";
        if (m.invalid_samples > 0) flags += "  (" + std::to_string(m.invalid_samples) + " undefined samples)";
        std::snprintf(line, sizeof line, "%-7s %-10s %-10s %-18s %s%s\n", name.c_str(), m.rendered.point.c_str(),
                      m.rendered.mean.c_str(), m.rendered.hpd.c_str(), m.rendered.mu.c_str(), flags.c_str());
        out << line;
    }
    if (r.prevalence.mode() == PrevalenceMode::Fixed) out << "* prevalence fixed\n";
    std::snprintf(line, sizeof line, "\nBM: P(informative) = %.1f%%, P(deceptive) = %.1f%%\n", r.bm.r_inf * 100.0,
                  r.bm.r_dec * 100.0);
    out << line;
    std::snprintf(line, sizeof line, "Convergence: %s (max R_c = %.4f, threshold %.2f)\n",
                  r.convergence.passed ? "passed" : "FAILED", r.convergence.max_rc(), kConvergenceThreshold);
    out << line;
    return out.str();
}

}  // namespace cmu
