#include "cmu/posterior.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>
#include <sstream>

#include "cmu/error.hpp"

namespace cmu {

namespace {

void require_proper(const BetaParams& p, std::string_view rate, std::string_view margin) {
    if (p.proper()) return;
    std::ostringstream msg;
    msg << "posterior for " << rate << " is improper: Beta(" << p.alpha << ", " << p.beta
        << ") after observing the " << margin << " margin; choose Laplace or Jeffreys";
    throw Error(ErrorCode::ImproperPosterior, msg.str());
}

PosteriorModel build(Count tp, Count fn, Count fp, Count tn, const PriorSpec& prior,
                     const PrevalencePolicy& prevalence, ModelKind kind) {
    PosteriorModel model;
    model.kind = kind;
    model.prevalence = prevalence;

    if (kind == ModelKind::DirichletCaelen) {
        if (prevalence.mode() != PrevalenceMode::Inferred) {
            throw Error(ErrorCode::InvalidArgument,
                        "the Dirichlet model infers prevalence jointly; fixed or external prevalence "
                        "requires the three-beta model");
        }
        const RatePrior& p = prior.tpr;
        if (!(prior.prev == p && prior.tnr == p) || p.params.alpha != p.params.beta) {
            throw Error(ErrorCode::InvalidArgument,
                        "the Dirichlet model takes one symmetric prior shared by all rates");
        }
        const double c = p.params.alpha;
        model.dirichlet_alpha = {tp + c, fn + c, tn + c, fp + c};
        for (double a : model.dirichlet_alpha) {
            if (!(a > 0.0)) {
                throw Error(ErrorCode::ImproperPosterior,
                            "Dirichlet posterior is improper: a CPM component has zero concentration; "
                            "choose Laplace or Jeffreys");
            }
        }
        // Marginal Betas of the Dirichlet, kept for reporting.
        model.prev = {model.dirichlet_alpha[0] + model.dirichlet_alpha[1],
                      model.dirichlet_alpha[2] + model.dirichlet_alpha[3]};
        model.tpr = {model.dirichlet_alpha[0], model.dirichlet_alpha[1]};
        model.tnr = {model.dirichlet_alpha[2], model.dirichlet_alpha[3]};
        return model;
    }

    model.tpr = prior.tpr.update(tp, fn);
    model.tnr = prior.tnr.update(tn, fp);
    require_proper(model.tpr, "TPR", "positive (TP, FN)");
    require_proper(model.tnr, "TNR", "negative (TN, FP)");
    switch (prevalence.mode()) {
        case PrevalenceMode::Inferred:
            model.prev = prior.prev.update(tp + fn, fp + tn);
            require_proper(model.prev, "PREV", "class (P, N)");
            break;
        case PrevalenceMode::Fixed:
            model.prev = {prevalence.fixed_value(), 1.0 - prevalence.fixed_value()};
            break;
        case PrevalenceMode::External:
            model.prev = prevalence.external_params();
            break;
    }
    return model;
}

}  // namespace

std::string_view to_string(ModelKind kind) noexcept {
    return kind == ModelKind::ThreeBeta ? "three-beta" : "dirichlet";
}

ModelKind parse_model_kind(std::string_view text) {
    if (text == "three-beta") return ModelKind::ThreeBeta;
    if (text == "dirichlet") return ModelKind::DirichletCaelen;
    throw Error(ErrorCode::InvalidArgument,
                "unknown model '" + std::string(text) + "' (expected three-beta or dirichlet)");
}

PosteriorModel build_posterior(const ConfusionMatrix& cm, const PriorSpec& prior,
                               const PrevalencePolicy& prevalence, ModelKind kind) {
    return build(cm.tp(), cm.fn(), cm.fp(), cm.tn(), prior, prevalence, kind);
}

PosteriorModel prior_model(const PriorSpec& prior, const PrevalencePolicy& prevalence, ModelKind kind) {
    return build(0, 0, 0, 0, prior, prevalence, kind);
}

std::vector<double> CpmSampleSet::metric_stream(MetricId id) const {
    const MetricFn fn = metric_fn(id);
    std::vector<double> out;
    out.reserve(rows_.size());
    for (const Cpm& row : rows_) out.push_back(fn(row));
    return out;
}

Cpm draw_cpm(const PosteriorModel& model, Rng& rng) {
    if (model.kind == ModelKind::DirichletCaelen) {
        const auto t = sample_dirichlet(rng, model.dirichlet_alpha);
        return {t[0], t[1], t[2], t[3]};
    }
    const double prev = model.prevalence_fixed() ? model.prevalence.fixed_value()
                                                 : sample_beta(rng, model.prev.alpha, model.prev.beta);
    const double tpr = sample_beta(rng, model.tpr.alpha, model.tpr.beta);
    const double tnr = sample_beta(rng, model.tnr.alpha, model.tnr.beta);
    return Cpm::from_rates(prev, tpr, tnr);
}

CpmSampleSet sample_cpm(const PosteriorModel& model, std::size_t count, std::uint64_t seed) {
    Rng rng(seed);
    std::vector<Cpm> rows;
    rows.reserve(count);
    for (std::size_t i = 0; i < count; ++i) rows.push_back(draw_cpm(model, rng));
    return CpmSampleSet(std::move(rows), seed);
}

void ConvergenceReport::merge(const ConvergenceReport& other) {
    entries.insert(entries.end(), other.entries.begin(), other.entries.end());
    passed = passed && other.passed;
}

double ConvergenceReport::max_rc() const noexcept {
    double m = 1.0;
    for (const auto& e : entries) m = std::max(m, e.rc);
    return m;
}

double split_rhat(std::span<const double> draws, std::size_t n_chains) {
    if (n_chains < 2 || draws.size() / n_chains < 2) {
        throw Error(ErrorCode::TooFewSamples, "Gelman-Rubin needs at least 2 chains of 2 draws each");
    }
    const std::size_t len = draws.size() / n_chains;
    const double n = static_cast<double>(len);
    const double m = static_cast<double>(n_chains);

    std::vector<double> means(n_chains);
    double within = 0.0;
    for (std::size_t c = 0; c < n_chains; ++c) {
        const auto chain = draws.subspan(c * len, len);
        const bool constant = std::all_of(chain.begin(), chain.end(), [&](double x) { return x == chain[0]; });
        const double mean = constant ? chain[0] : std::accumulate(chain.begin(), chain.end(), 0.0) / n;
        double ss = 0.0;
        if (!constant) {
            for (double x : chain) ss += (x - mean) * (x - mean);
        }
        means[c] = mean;
        within += ss / (n - 1.0);
    }
    within /= m;

    const double grand = std::accumulate(means.begin(), means.end(), 0.0) / m;
    double between_over_n = 0.0;
    for (double mu : means) between_over_n += (mu - grand) * (mu - grand);
    between_over_n /= (m - 1.0);

    if (within <= 0.0) {
        return between_over_n <= 0.0 ? 1.0 : std::numeric_limits<double>::infinity();
    }
    const double pooled = within * (n - 1.0) / n + between_over_n;
    const double v_hat = pooled + between_over_n / m;
    return std::sqrt(v_hat / within);
}

ConvergenceReport gelman_rubin(std::span<const double> draws, std::size_t n_chains, std::string quantity) {
    const double rc = std::max(1.0, split_rhat(draws, n_chains));
    ConvergenceReport report;
    report.entries.push_back({std::move(quantity), rc});
    report.passed = rc < kConvergenceThreshold;
    return report;
}

}  // namespace cmu
