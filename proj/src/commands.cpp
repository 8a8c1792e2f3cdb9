#include "cmu/commands.hpp"

#include <algorithm>
#include <random>
#include <sstream>

#include "cmu/cm_io.hpp"
#include "cmu/error.hpp"

namespace cmu {

using nlohmann::json;

namespace {

constexpr std::uint64_t kSeedMask = (std::uint64_t{1} << 53) - 1;

// Runs a JSON-reading block and turns type/shape errors into ParseError.
template <typename Fn>
auto reading(Fn&& fn) {
    try {
        return fn();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::ParseError, std::string("malformed request: ") + e.what());
    }
}

std::uint64_t seed_from(const json& body) {
    if (!body.contains("seed") || body.at("seed").is_null()) return fresh_seed();
    return body.at("seed").get<std::uint64_t>();
}

json interval_json(const Interval& i) { return json::array({i.low, i.high}); }

json beta_json(const BetaParams& p) { return {{"alpha", p.alpha}, {"beta", p.beta}}; }

json posterior_summary(const MetricPosterior& p) {
    return {{"metric", std::string(to_string(p.metric))},
            {"mean", p.summary.mean},
            {"median", p.summary.median},
            {"mode", p.summary.mode_estimate},
            {"hpd", interval_json(p.hpd)},
            {"mu", p.mu},
            {"invalid_samples", p.invalid_samples},
            {"rendered", {{"hpd", "[" + render_percent(p.hpd.low, p.mu) + ", " + render_percent(p.hpd.high, p.mu) + "]"},
                          {"mu", render_mu(p.mu)}}}};
}

}  // namespace

std::uint64_t fresh_seed() {
    std::random_device rd;
    const std::uint64_t hi = rd();
    return ((hi << 32) ^ rd()) & kSeedMask;
}

AnalyzeRequest analyze_request_from_json(const json& body) {
    return reading([&] {
        if (!body.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
        if (!body.contains("cm")) throw Error(ErrorCode::ParseError, "missing field 'cm'");
        AnalyzeRequest req;
        req.cm = cm_from_json(body.at("cm"));
        auto& o = req.options;
        if (body.contains("prior")) o.prior = prior_from_json(body.at("prior"));
        if (body.contains("prior_prev")) o.prior.prev = RatePrior::parse(body.at("prior_prev").get<std::string>());
        if (body.contains("prior_tpr")) o.prior.tpr = RatePrior::parse(body.at("prior_tpr").get<std::string>());
        if (body.contains("prior_tnr")) o.prior.tnr = RatePrior::parse(body.at("prior_tnr").get<std::string>());

        const int policies = static_cast<int>(body.contains("prev_fixed")) + static_cast<int>(body.contains("prev_counts")) +
                             static_cast<int>(body.contains("prev_beta"));
        if (policies > 1) {
            throw Error(ErrorCode::InvalidArgument, "prev_fixed, prev_counts and prev_beta are mutually exclusive");
        }
        if (body.contains("prev_fixed")) o.prevalence = PrevalencePolicy::fixed(body.at("prev_fixed").get<double>());
        if (body.contains("prev_counts")) {
            const auto& c = body.at("prev_counts");
            const double pos = c.at(0).get<double>();
            const double neg = c.at(1).get<double>();
            if (pos < 0 || neg < 0) throw Error(ErrorCode::NegativeCount, "prevalence counts must be non-negative");
            o.prevalence = PrevalencePolicy::external(
                {pos + o.prior.prev.params.alpha, neg + o.prior.prev.params.beta});
        }
        if (body.contains("prev_beta")) {
            const auto& c = body.at("prev_beta");
            o.prevalence = PrevalencePolicy::external({c.at(0).get<double>(), c.at(1).get<double>()});
        }
        if (body.contains("samples")) o.samples = body.at("samples").get<std::size_t>();
        o.seed = seed_from(body);
        if (body.contains("credibility")) o.credibility = body.at("credibility").get<double>();
        if (!(o.credibility > 0.0 && o.credibility < 1.0)) {
            throw Error(ErrorCode::InvalidArgument, "credibility must lie in (0, 1)");
        }
        if (body.contains("model")) o.model = parse_model_kind(body.at("model").get<std::string>());
        if (body.contains("metrics")) {
            o.metrics.clear();
            for (const auto& m : body.at("metrics")) o.metrics.push_back(parse_metric(m.get<std::string>()));
            if (o.metrics.empty()) throw Error(ErrorCode::InvalidArgument, "no metrics requested");
        }
        if (body.contains("histogram_bins")) o.histogram_bins = body.at("histogram_bins").get<std::size_t>();
        return req;
    });
}

json analyze_response(const AnalysisResult& result) {
    json histograms = json::array();
    for (const auto& h : result.histograms) histograms.push_back(to_json(h));
    return {{"report", to_json(result.report)}, {"histograms", histograms}};
}

BmResult run_bm(const AnalyzeRequest& request) {
    const auto& o = request.options;
    const PosteriorModel model = build_posterior(request.cm, o.prior, o.prevalence, o.model);
    const CpmSampleSet cpm = sample_cpm(model, o.samples, o.seed);
    BmResult out;
    out.cm = request.cm;
    out.seed = o.seed;
    out.samples = o.samples;
    out.assessment = bm_assessment(cpm, o.credibility);
    out.histogram = make_histogram(out.assessment.posterior, o.histogram_bins);
    return out;
}

json bm_response(const BmResult& r) {
    return {{"cm", cm_to_json(r.cm)},
            {"seed", r.seed},
            {"samples", r.samples},
            {"r_inf", r.assessment.r_inf},
            {"r_dec", r.assessment.r_dec},
            {"posterior", posterior_summary(r.assessment.posterior)},
            {"histogram", to_json(r.histogram)}};
}

PredictiveRequest predictive_request_from_json(const json& body) {
    return reading([&] {
        PredictiveRequest req;
        req.base = analyze_request_from_json(body);
        if (body.contains("n_synth")) req.n_synth = body.at("n_synth").get<Count>();
        if (body.contains("draws")) req.draws = body.at("draws").get<std::size_t>();
        if (body.contains("metric")) req.metric = parse_metric(body.at("metric").get<std::string>());
        if (body.contains("n_synth") && req.n_synth < 1) {
            throw Error(ErrorCode::InvalidArgument, "synthetic sample size must be >= 1");
        }
        if (req.draws < 2) throw Error(ErrorCode::InvalidArgument, "at least 2 draws are required");
        return req;
    });
}

PredictiveResult run_predictive(const PredictiveRequest& request) {
    const auto& o = request.base.options;
    const PosteriorModel model = build_posterior(request.base.cm, o.prior, o.prevalence, o.model);
    PredictiveResult out;
    out.request = request;
    out.n_synth = request.n_synth > 0 ? request.n_synth : request.base.cm.n();

    const SyntheticCmSet set = synthesize_cms(model, out.n_synth, request.draws, o.seed);
    out.empirical = empirical_metric_distribution(set, request.metric);
    out.spread = metric_spread_audit(set, request.metric);

    const CpmSampleSet cpm = sample_cpm(model, o.samples, derive_seed(o.seed, 0xC0FFEE));
    out.true_posterior = metric_posterior(cpm, request.metric, o.credibility);
    const auto& s = out.true_posterior.samples;
    out.true_samples_at_zero = static_cast<std::size_t>(
        std::upper_bound(s.begin(), s.end(), 0.0) - std::lower_bound(s.begin(), s.end(), 0.0));
    if (model.kind == ModelKind::DirichletCaelen) {
        out.variance = variance_audit(model, out.n_synth, request.draws, derive_seed(o.seed, 0xA0D17));
    }
    return out;
}

json predictive_response(const PredictiveResult& r) {
    json support = json::array();
    for (const auto& [value, count] : r.empirical.counts) {
        support.push_back({{"value", value}, {"probability", static_cast<double>(count) / static_cast<double>(r.empirical.total)}});
    }
    const bool any_defined = r.empirical.defined() > 1;
    json out = {
        {"cm", cm_to_json(r.request.base.cm)},
        {"model", std::string(to_string(r.request.base.options.model))},
        {"seed", r.request.base.options.seed},
        {"metric", std::string(to_string(r.request.metric))},
        {"n_synth", r.n_synth},
        {"draws", r.request.draws},
        {"empirical",
         {{"support", support},
          {"undefined", r.empirical.undefined},
          {"mean", any_defined ? json(r.empirical.mean()) : json(nullptr)},
          {"variance", any_defined ? json(r.empirical.variance()) : json(nullptr)}}},
        {"true_posterior", posterior_summary(r.true_posterior)},
        {"true_samples_at_zero", r.true_samples_at_zero},
        {"spread",
         {{"empirical_std", r.spread.empirical_std},
          {"true_std", r.spread.true_std},
          {"observed_variance_ratio", r.spread.observed_ratio},
          {"undefined", r.spread.undefined}}},
    };
    if (r.variance) {
        static constexpr std::array<const char*, 4> names = {"TP", "FN", "TN", "FP"};
        json audit = json::array();
        for (const auto& a : *r.variance) {
            audit.push_back({{"component", names[a.component]},
                             {"empirical_mean", a.empirical_mean},
                             {"true_mean", a.true_mean},
                             {"empirical_var", a.empirical_var},
                             {"true_var", a.true_var},
                             {"analytic_var", a.analytic_var},
                             {"predicted_ratio", a.predicted_ratio},
                             {"observed_ratio", a.observed_ratio}});
        }
        out["variance_audit"] = audit;
    }
    return out;
}

LeaderboardRequest leaderboard_request_from_json(const json& body) {
    return reading([&] {
        if (!body.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
        LeaderboardRequest req;
        std::optional<Count> default_n;
        if (body.contains("n")) default_n = body.at("n").get<Count>();
        if (body.contains("csv")) {
            req.submissions = parse_leaderboard_csv(body.at("csv").get<std::string>(), default_n);
        } else if (body.contains("submissions")) {
            // Reuse the CSV reader so JSON and CSV inputs share precision handling.
            std::string csv = "name,accuracy,n\n";
            for (const auto& s : body.at("submissions")) {
                const auto& acc = s.at("accuracy");
                std::string acc_text = acc.is_string() ? acc.get<std::string>() : acc.dump();
                const Count n = s.contains("n") ? s.at("n").get<Count>()
                                                : default_n ? *default_n
                                                            : throw Error(ErrorCode::ParseError, "submission without n");
                std::string name = s.at("name").get<std::string>();
                if (name.find_first_of(",\"\n") != std::string::npos) {
                    throw Error(ErrorCode::ParseError, "submission names may not contain commas, quotes or newlines");
                }
                csv += name + "," + acc_text + "," + std::to_string(n) + "\n";
            }
            req.submissions = parse_leaderboard_csv(csv, std::nullopt);
        } else {
            throw Error(ErrorCode::ParseError, "leaderboard request needs 'csv' or 'submissions'");
        }
        if (body.contains("draws")) req.draws = body.at("draws").get<std::size_t>();
        req.seed = seed_from(body);
        if (body.contains("prizes")) req.prizes = body.at("prizes").get<std::vector<double>>();
        if (body.contains("prior")) req.prior = RatePrior::parse(body.at("prior").get<std::string>());
        return req;
    });
}

LeaderboardResult run_leaderboard(const LeaderboardRequest& request) {
    LeaderboardResult out;
    out.request = request;
    std::vector<std::string> names;
    for (const auto& s : request.submissions) {
        out.posteriors.push_back(acc_posterior(s, request.prior));
        names.push_back(s.name);
    }
    out.matrix = rank_distribution(out.posteriors, names, request.draws, request.seed);
    out.best = prob_best(request.submissions, out.matrix);
    if (!request.prizes.empty()) out.prizes = allocate_prizes(out.matrix, request.prizes);
    return out;
}

json leaderboard_response(const LeaderboardResult& r) {
    json subs = json::array();
    for (std::size_t i = 0; i < r.request.submissions.size(); ++i) {
        const auto& s = r.request.submissions[i];
        json entry = {{"name", s.name},
                      {"accuracy", s.acc_point},
                      {"n", s.n},
                      {"correct", s.correct()},
                      {"posterior", beta_json(r.posteriors[i])},
                      {"rank_probabilities", r.matrix.entries[i]}};
        if (r.prizes) entry["expected_prize"] = r.prizes->expected_prize[i];
        subs.push_back(std::move(entry));
    }
    json out = {{"seed", r.request.seed},
                {"draws", r.request.draws},
                {"submissions", subs},
                {"prob_best", {{"name", r.request.submissions[r.best.index].name},
                               {"probability", r.best.probability},
                               {"standard_error", r.best.standard_error}}}};
    if (r.prizes) {
        double total = 0.0;
        for (double e : r.prizes->expected_prize) total += e;
        out["prizes"] = r.prizes->prizes;
        out["expected_total"] = total;
    }
    return out;
}

SampleSizeRequest samplesize_request_from_json(const json& body) {
    return reading([&] {
        if (!body.is_object()) throw Error(ErrorCode::ParseError, "request body must be a JSON object");
        SampleSizeRequest req;
        if (body.contains("target_mu")) req.target_mu = body.at("target_mu").get<double>();
        if (body.contains("n")) req.n = body.at("n").get<Count>();
        if (body.contains("simulate")) req.simulate = body.at("simulate").get<bool>();
        auto& p = req.plan;
        if (req.target_mu) p.target_mu = *req.target_mu;
        if (body.contains("power")) p.power = body.at("power").get<double>();
        if (body.contains("omega")) p.omega = body.at("omega").get<double>();
        if (body.contains("k")) p.k = body.at("k").get<double>();
        if (body.contains("prior")) p.prior = RatePrior::parse(body.at("prior").get<std::string>());
        if (body.contains("credibility")) p.credibility = body.at("credibility").get<double>();
        if (body.contains("grid")) req.grid = body.at("grid").get<std::vector<Count>>();
        if (body.contains("sims")) req.sims = body.at("sims").get<std::size_t>();
        req.seed = seed_from(body);
        if (!req.target_mu && !req.n) {
            throw Error(ErrorCode::InvalidArgument, "sample-size request needs target_mu and/or n");
        }
        if (req.simulate && !req.target_mu) {
            throw Error(ErrorCode::InvalidArgument, "power simulation needs target_mu");
        }
        return req;
    });
}

SampleSizeResult run_samplesize(const SampleSizeRequest& request) {
    SampleSizeResult out;
    out.request = request;
    if (request.target_mu) out.n_for_target = n_for_mu(*request.target_mu);
    if (request.n) out.bound_at_n = mu_bound(*request.n);
    if (request.simulate) out.simulated = power_simulation(request.plan, request.grid, request.sims, request.seed);
    return out;
}

json samplesize_response(const SampleSizeResult& r) {
    json out = {{"seed", r.request.seed}};
    if (r.request.target_mu) {
        out["target_mu"] = *r.request.target_mu;
        out["n_for_mu"] = *r.n_for_target;
    }
    if (r.request.n) {
        out["n"] = *r.request.n;
        out["mu_bound"] = *r.bound_at_n;
    }
    if (r.simulated) {
        const auto& p = *r.simulated;
        json curve = json::array();
        for (const auto& pt : p.curve) curve.push_back({{"n", pt.n}, {"achieved_mu", pt.achieved_mu}});
        out["simulation"] = {{"power", p.power},
                             {"omega", p.omega},
                             {"k", p.k},
                             {"prior", p.prior.to_string()},
                             {"sims", r.request.sims},
                             {"curve", curve},
                             {"result_n", p.result_n ? json(*p.result_n) : json(nullptr)}};
    }
    return out;
}

}  // namespace cmu
