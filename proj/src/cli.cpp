#include "cmu/cli.hpp"

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

#include "CLI11.hpp"

#include "cmu/cm_io.hpp"
#include "cmu/commands.hpp"
#include "cmu/error.hpp"
#include "cmu/service.hpp"

namespace cmu {

using nlohmann::json;

namespace {

// Flags shared by analyze, bm and predictive; collected into a request body
// so the CLI and the service go through the same request reader.
struct ModelFlags {
    std::string cm;
    std::string prior = "laplace";
    std::string prior_prev, prior_tpr, prior_tnr;
    std::optional<double> prev_fixed;
    std::string prev_counts;
    std::optional<std::size_t> samples;
    std::optional<std::uint64_t> seed;
    double credibility = kDefaultCredibility;
    std::string model = "three-beta";
    std::string metrics;
    std::string format = "table";
    std::string histograms;
    std::size_t bins = 200;

    void add_to(CLI::App& cmd) {
        cmd.add_option("--cm", cm, "Confusion matrix file (JSON/CSV) or inline tp,fn,fp,tn")->required();
        cmd.add_option("--prior", prior, "laplace | jeffreys | haldane | custom:a,b");
        cmd.add_option("--prior-prev", prior_prev, "Prior override for PREV");
        cmd.add_option("--prior-tpr", prior_tpr, "Prior override for TPR");
        cmd.add_option("--prior-tnr", prior_tnr, "Prior override for TNR");
        auto* fixed = cmd.add_option("--prev-fixed", prev_fixed, "Fix prevalence to this value");
        cmd.add_option("--prev-counts", prev_counts, "Prevalence from external counts a,b")->excludes(fixed);
        cmd.add_option("--samples", samples, "Posterior samples (default 20000)");
        cmd.add_option("--seed", seed, "RNG seed (random when omitted; always reported)");
        cmd.add_option("--credibility", credibility, "HPD mass (default 0.95)");
        cmd.add_option("--model", model, "three-beta | dirichlet")->check(CLI::IsMember({"three-beta", "dirichlet"}));
        cmd.add_option("--format", format, "table | json")->check(CLI::IsMember({"table", "json"}));
    }

    json body() const {
        json b = {{"cm", cm_to_json(parse_cm(cm))}, {"prior", prior}, {"credibility", credibility}, {"model", model}};
        b["cm"].erase("n");
        if (!prior_prev.empty()) b["prior_prev"] = prior_prev;
        if (!prior_tpr.empty()) b["prior_tpr"] = prior_tpr;
        if (!prior_tnr.empty()) b["prior_tnr"] = prior_tnr;
        if (prev_fixed) b["prev_fixed"] = *prev_fixed;
        if (!prev_counts.empty()) {
            const auto comma = prev_counts.find(',');
            if (comma == std::string::npos) throw Error(ErrorCode::ParseError, "--prev-counts expects a,b");
            try {
                b["prev_counts"] = {std::stod(prev_counts.substr(0, comma)), std::stod(prev_counts.substr(comma + 1))};
            } catch (const std::logic_error&) {
                throw Error(ErrorCode::ParseError, "--prev-counts expects two numbers a,b");
            }
        }
        if (samples) b["samples"] = *samples;
        if (seed) b["seed"] = *seed;
        if (!metrics.empty()) {
            json list = json::array();
            std::stringstream ss(metrics);
            for (std::string item; std::getline(ss, item, ',');) list.push_back(item);
            b["metrics"] = list;
        }
        b["histogram_bins"] = bins;
        return b;
    }
};

std::vector<Count> parse_grid(const std::string& text) {
    std::vector<Count> grid;
    std::stringstream ss(text);
    for (std::string item; std::getline(ss, item, ',');) {
        try {
            grid.push_back(std::stoll(item));
        } catch (const std::logic_error&) {
            throw Error(ErrorCode::ParseError, "--grid expects comma-separated integers");
        }
    }
    return grid;
}

void write_histograms(const std::string& dir, const std::vector<HistogramSeries>& series, std::ostream& err) {
    std::filesystem::create_directories(dir);
    for (const auto& h : series) {
        const auto path = std::filesystem::path(dir) / (std::string(to_string(h.metric)) + ".json");
        std::ofstream out(path);
        if (!out) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
        out << to_json(h).dump() << "\n";
    }
    err << "wrote " << series.size() << " histogram series to " << dir << "\n";
}

std::string pct(double p, int decimals = 1) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.*f%%", decimals, p * 100.0);
    return buf;
}

void print_bm(const BmResult& r, std::ostream& out) {
    const auto& p = r.assessment.posterior;
    out << "Confusion matrix: TP=" << r.cm.tp() << " FN=" << r.cm.fn() << " FP=" << r.cm.fp() << " TN=" << r.cm.tn()
        << " (N=" << r.cm.n() << ")\n";
    out << r.samples << " samples, seed " << r.seed << "\n";
    out << "BM mean " << render_percent(p.summary.mean, p.mu) << ", HPD [" << render_percent(p.hpd.low, p.mu) << ", "
        << render_percent(p.hpd.high, p.mu) << "], MU " << render_mu(p.mu) << "\n";
    out << "R_inf = P(BM > 0) = " << pct(r.assessment.r_inf) << "\n";
    out << "R_dec = P(BM < 0) = " << pct(r.assessment.r_dec) << "\n";
}

void print_predictive(const PredictiveResult& r, std::ostream& out) {
    const std::string metric(to_string(r.request.metric));
    out << "Posterior-predictive " << metric << " at N=" << r.n_synth << " (" << r.request.draws << " draws, model "
        << to_string(r.request.base.options.model) << ", seed " << r.request.base.options.seed << ")\n";
    out << "value       probability\n";
    for (const auto& [value, count] : r.empirical.counts) {
        char line[64];
        std::snprintf(line, sizeof line, "%-11.6g %.4f\n", value,
                      static_cast<double>(count) / static_cast<double>(r.empirical.total));
        out << line;
    }
    if (r.empirical.undefined > 0) out << "undefined   " << r.empirical.undefined << " draws\n";
    const auto& t = r.true_posterior;
    out << "True posterior of " << metric << ": HPD [" << render_percent(t.hpd.low, t.mu) << ", "
        << render_percent(t.hpd.high, t.mu) << "], MU " << render_mu(t.mu) << ", samples at 0: " << r.true_samples_at_zero
        << "\n";
    char line[128];
    std::snprintf(line, sizeof line, "Spread: empirical sd %.4f vs true sd %.4f (variance ratio %.3f)\n",
                  r.spread.empirical_std, r.spread.true_std, r.spread.observed_ratio);
    out << line;
    if (r.variance) {
        static constexpr std::array<const char*, 4> names = {"TP", "FN", "TN", "FP"};
        out << "Variance audit (Var(V/N) / Var(theta)):\n";
        for (const auto& a : *r.variance) {
            std::snprintf(line, sizeof line, "  %-2s observed %.3f, predicted 1 + a0/N = %.3f\n", names[a.component],
                          a.observed_ratio, a.predicted_ratio);
            out << line;
        }
    }
}

void print_leaderboard(const LeaderboardResult& r, std::ostream& out) {
    const auto& m = r.matrix;
    out << m.draws << " synthetic leaderboards, seed " << r.request.seed << "\n";
    const std::size_t shown = std::min<std::size_t>(m.size(), 10);
    char line[256];
    std::snprintf(line, sizeof line, "%-24s %-9s", "submission", "accuracy");
    out << line;
    for (std::size_t p = 0; p < shown; ++p) {
        std::snprintf(line, sizeof line, " P(#%zu)  ", p + 1);
        out << line;
    }
    if (r.prizes) out << " E[prize]";
    out << "\n";
    for (std::size_t s = 0; s < m.size(); ++s) {
        std::snprintf(line, sizeof line, "%-24.24s %-9.5f", m.names[s].c_str(), r.request.submissions[s].acc_point);
        out << line;
        for (std::size_t p = 0; p < shown; ++p) {
            std::snprintf(line, sizeof line, " %-8.4f", m.entries[s][p]);
            out << line;
        }
        if (r.prizes) {
            std::snprintf(line, sizeof line, " %.2f", r.prizes->expected_prize[s]);
            out << line;
        }
        out << "\n";
    }
    std::snprintf(line, sizeof line, "P(%s is truly best) = %.4f +/- %.4f\n",
                  r.request.submissions[r.best.index].name.c_str(), r.best.probability, r.best.standard_error);
    out << line;
}

void print_samplesize(const SampleSizeResult& r, std::ostream& out) {
    if (r.n_for_target) {
        out << "MU <= " << *r.request.target_mu << " needs N >= " << *r.n_for_target << " (4/MU^2 rule)\n";
    }
    if (r.bound_at_n) out << "N = " << *r.request.n << ": MU <~ " << *r.bound_at_n << " (2/sqrt(N) rule)\n";
    if (r.simulated) {
        const auto& p = *r.simulated;
        out << "Power simulation: omega=" << p.omega << " k=" << p.k << " power=" << p.power << " sims/N=" << r.request.sims
            << " seed " << r.request.seed << "\n";
        out << "N           MU at power   2/sqrt(N)\n";
        for (const auto& pt : p.curve) {
            char line[96];
            std::snprintf(line, sizeof line, "%-11lld %-13.4f %.4f\n", static_cast<long long>(pt.n), pt.achieved_mu,
                          2.0 / std::sqrt(static_cast<double>(pt.n)));
            out << line;
        }
        if (p.result_n) out << "Smallest N reaching the target: " << *p.result_n << "\n";
    }
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Bayesian uncertainty of binary-classifier metrics"};
    app.require_subcommand(1);

    ModelFlags analyze_flags;
    auto* analyze = app.add_subcommand("analyze", "Metric posteriors, HPD intervals and MU for a confusion matrix");
    analyze_flags.add_to(*analyze);
    analyze->add_option("--metrics", analyze_flags.metrics, "Comma-separated metric list (default: all)");
    analyze->add_option("--histograms", analyze_flags.histograms, "Directory for histogram series files");
    analyze->add_option("--bins", analyze_flags.bins, "Histogram bins (default 200)");

    ModelFlags bm_flags;
    auto* bm = app.add_subcommand("bm", "Probability that a classifier is informative or deceptive");
    bm_flags.add_to(*bm);

    ModelFlags pred_flags;
    Count n_synth = 0;
    std::size_t draws = 100000;
    std::string pred_metric = "ACC";
    auto* predictive = app.add_subcommand("predictive", "Synthetic confusion matrices and empirical metric spread");
    pred_flags.add_to(*predictive);
    predictive->add_option("--n-synth", n_synth, "Size of each synthetic CM (default: N of the input)");
    predictive->add_option("--draws", draws, "Number of synthetic CMs (default 100000)");
    predictive->add_option("--metric", pred_metric, "Metric to evaluate (default ACC)");

    std::string lb_csv;
    std::optional<Count> lb_n;
    std::size_t lb_draws = 10000;
    std::optional<std::uint64_t> lb_seed;
    std::string lb_prizes;
    std::string lb_prior = "laplace";
    std::string lb_format = "table";
    auto* leaderboard = app.add_subcommand("leaderboard", "Probabilistic leaderboard from point accuracies");
    leaderboard->add_option("--csv", lb_csv, "Leaderboard CSV: name,accuracy[,n]")->required()->check(CLI::ExistingFile);
    leaderboard->add_option("--n", lb_n, "Test-set size when the CSV has no n column");
    leaderboard->add_option("--draws", lb_draws, "Synthetic leaderboards (default 10000)");
    leaderboard->add_option("--seed", lb_seed, "RNG seed");
    leaderboard->add_option("--prizes", lb_prizes, "Comma-separated prizes for the top positions");
    leaderboard->add_option("--prior", lb_prior, "Accuracy prior");
    leaderboard->add_option("--format", lb_format, "table | json")->check(CLI::IsMember({"table", "json"}));

    std::optional<double> ss_target;
    std::optional<Count> ss_n;
    bool ss_simulate = false;
    double ss_power = 0.95, ss_omega = 0.8, ss_k = 10.0;
    std::size_t ss_sims = 1000;
    std::string ss_grid, ss_prior = "laplace", ss_format = "table";
    std::optional<std::uint64_t> ss_seed;
    auto* samplesize = app.add_subcommand("samplesize", "Sample size needed for a target metric uncertainty");
    samplesize->add_option("--target-mu", ss_target, "Target MU as a fraction (0.05 = 5 percentage points)");
    samplesize->add_option("--n", ss_n, "Evaluate the 2/sqrt(N) bound at this N");
    samplesize->add_flag("--simulate", ss_simulate, "Run the power simulation over the candidate grid");
    samplesize->add_option("--power", ss_power, "Power (default 0.95)");
    samplesize->add_option("--omega", ss_omega, "Generating mode (default 0.8)");
    samplesize->add_option("--k", ss_k, "Generating concentration (default 10)");
    samplesize->add_option("--sims", ss_sims, "Simulations per N (default 1000)");
    samplesize->add_option("--grid", ss_grid, "Comma-separated candidate N (default: log grid 10..1e6)");
    samplesize->add_option("--prior", ss_prior, "Posterior prior for simulated data");
    samplesize->add_option("--seed", ss_seed, "RNG seed");
    samplesize->add_option("--format", ss_format, "table | json")->check(CLI::IsMember({"table", "json"}));

    std::string host = "127.0.0.1";
    int port = 8080;
    ServiceConfig service_config;
    auto* serve_cmd = app.add_subcommand("serve", "HTTP JSON API");
    serve_cmd->add_option("--host", host, "Bind address (default 127.0.0.1)");
    serve_cmd->add_option("--port", port, "Port (default 8080)");
    serve_cmd->add_option("--cors-origin", service_config.cors_origin, "Allowed cross-origin UI host");
    serve_cmd->add_option("--max-grid", service_config.max_grid_points, "Largest candidate grid accepted (default 40)");
    serve_cmd->add_option("--max-sims", service_config.max_sims, "Most simulations per N accepted (default 2000)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        return app.exit(e, out, err) == 0 ? 0 : 1;
    }

    try {
        if (analyze->parsed()) {
            const auto req = analyze_request_from_json(analyze_flags.body());
            const AnalysisResult result = run_analysis(req.cm, req.options);
            if (!analyze_flags.histograms.empty()) write_histograms(analyze_flags.histograms, result.histograms, err);
            if (analyze_flags.format == "json") {
                out << to_json(result.report).dump(2) << "\n";
            } else {
                out << render_table(result.report);
            }
        } else if (bm->parsed()) {
            const BmResult result = run_bm(analyze_request_from_json(bm_flags.body()));
            if (bm_flags.format == "json") {
                out << bm_response(result).dump(2) << "\n";
            } else {
                print_bm(result, out);
            }
        } else if (predictive->parsed()) {
            json body = pred_flags.body();
            if (n_synth != 0) body["n_synth"] = n_synth;
            body["draws"] = draws;
            body["metric"] = pred_metric;
            const PredictiveResult result = run_predictive(predictive_request_from_json(body));
            if (pred_flags.format == "json") {
                out << predictive_response(result).dump(2) << "\n";
            } else {
                print_predictive(result, out);
            }
        } else if (leaderboard->parsed()) {
            json body = {{"csv", read_file(lb_csv)}, {"draws", lb_draws}, {"prior", lb_prior}};
            if (lb_n) body["n"] = *lb_n;
            if (lb_seed) body["seed"] = *lb_seed;
            if (!lb_prizes.empty()) {
                json prizes = json::array();
                std::stringstream ss(lb_prizes);
                for (std::string item; std::getline(ss, item, ',');) {
                    try {
                        prizes.push_back(std::stod(item));
                    } catch (const std::logic_error&) {
                        throw Error(ErrorCode::ParseError, "--prizes expects comma-separated numbers");
                    }
                }
                body["prizes"] = prizes;
            }
            const LeaderboardResult result = run_leaderboard(leaderboard_request_from_json(body));
            if (lb_format == "json") {
                out << leaderboard_response(result).dump(2) << "\n";
            } else {
                print_leaderboard(result, out);
            }
        } else if (samplesize->parsed()) {
            json body = {{"simulate", ss_simulate}, {"power", ss_power}, {"omega", ss_omega},
                         {"k", ss_k},               {"sims", ss_sims},   {"prior", ss_prior}};
            if (ss_target) body["target_mu"] = *ss_target;
            if (ss_n) body["n"] = *ss_n;
            if (ss_seed) body["seed"] = *ss_seed;
            if (!ss_grid.empty()) body["grid"] = parse_grid(ss_grid);
            const SampleSizeResult result = run_samplesize(samplesize_request_from_json(body));
            if (ss_format == "json") {
                out << samplesize_response(result).dump(2) << "\n";
            } else {
                print_samplesize(result, out);
            }
        } else if (serve_cmd->parsed()) {
            return serve(host, port, service_config);
        }
    } catch (const Error& e) {
        err << "error: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 2;
    }
    return 0;
}

}  // namespace cmu
