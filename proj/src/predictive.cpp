#include "cmu/predictive.hpp"

#include <cmath>

#include "cmu/error.hpp"
#include "cmu/random.hpp"

namespace cmu {

namespace {

constexpr std::size_t kShardSize = 8192;

struct Moments {
    double n = 0.0;
    double mean = 0.0;
    double m2 = 0.0;

    void add(double x) noexcept {
        n += 1.0;
        const double d = x - mean;
        mean += d / n;
        m2 += d * (x - mean);
    }
    double variance() const noexcept { return n > 1.0 ? m2 / (n - 1.0) : 0.0; }
};

std::optional<double> count_metric(MetricId id, const std::array<Count, 4>& v) {
    // v is in CPM order (TP, FN, TN, FP).
    return point_estimate(id, ConfusionMatrix::validate(v[0], v[1], v[3], v[2]));
}

}  // namespace

SyntheticCmSet synthesize_cms(const PosteriorModel& model, Count n_synth, std::size_t draws,
                              std::uint64_t seed) {
    if (n_synth < 1) throw Error(ErrorCode::InvalidArgument, "synthetic sample size must be >= 1");

    SyntheticCmSet set;
    set.n_synth = n_synth;
    set.source = model;
    set.seed = seed;
    set.draws.resize(draws);
    set.thetas.resize(draws);

    const std::size_t shards = (draws + kShardSize - 1) / kShardSize;
    for_each_shard(shards, [&](std::size_t shard) {
        Rng rng(derive_seed(seed, shard));
        const std::size_t begin = shard * kShardSize;
        const std::size_t end = std::min(draws, begin + kShardSize);
        for (std::size_t i = begin; i < end; ++i) {
            const Cpm theta = draw_cpm(model, rng);
            set.thetas[i] = theta;
            set.draws[i] = sample_multinomial(rng, n_synth, theta.components());
        }
    });
    return set;
}

double EmpiricalDistribution::probability(double value) const {
    const auto it = counts.find(value);
    if (it == counts.end() || total == 0) return 0.0;
    return static_cast<double>(it->second) / static_cast<double>(total);
}

double EmpiricalDistribution::mean() const {
    double sum = 0.0;
    for (const auto& [value, n] : counts) sum += value * static_cast<double>(n);
    return sum / static_cast<double>(defined());
}

double EmpiricalDistribution::variance() const {
    const double m = mean();
    double ss = 0.0;
    for (const auto& [value, n] : counts) ss += (value - m) * (value - m) * static_cast<double>(n);
    return ss / (static_cast<double>(defined()) - 1.0);
}

EmpiricalDistribution empirical_metric_distribution(const SyntheticCmSet& set, MetricId id) {
    EmpiricalDistribution dist;
    dist.metric = id;
    dist.total = set.draws.size();
    for (const auto& v : set.draws) {
        if (const auto value = count_metric(id, v)) {
            dist.counts[*value]++;
        } else {
            dist.undefined++;
        }
    }
    return dist;
}

std::array<VarianceAudit, 4> variance_audit(const PosteriorModel& model, Count n_synth,
                                            std::size_t draws, std::uint64_t seed) {
    if (model.kind != ModelKind::DirichletCaelen) {
        throw Error(ErrorCode::InvalidArgument, "variance audit requires the Dirichlet model");
    }
    if (draws < 2) throw Error(ErrorCode::TooFewSamples, "variance audit needs at least 2 draws");
    const SyntheticCmSet set = synthesize_cms(model, n_synth, draws, seed);

    std::array<Moments, 4> synth{}, theta{};
    const double n = static_cast<double>(n_synth);
    for (std::size_t i = 0; i < set.draws.size(); ++i) {
        const auto t = set.thetas[i].components();
        for (int k = 0; k < 4; ++k) {
            synth[k].add(static_cast<double>(set.draws[i][k]) / n);
            theta[k].add(t[k]);
        }
    }

    const double a0 = model.alpha0();
    std::array<VarianceAudit, 4> out{};
    for (int k = 0; k < 4; ++k) {
        const double ak = model.dirichlet_alpha[k];
        auto& a = out[k];
        a.component = k;
        a.empirical_mean = synth[k].mean;
        a.true_mean = theta[k].mean;
        a.mean_standard_error = std::sqrt(synth[k].variance() / static_cast<double>(draws));
        a.empirical_var = synth[k].variance();
        a.true_var = theta[k].variance();
        a.analytic_var = (ak / a0) * (1.0 - ak / a0) / (1.0 + a0);
        a.predicted_ratio = 1.0 + a0 / n;
        a.observed_ratio = a.empirical_var / a.true_var;
    }
    return out;
}

MetricSpreadAudit metric_spread_audit(const SyntheticCmSet& set, MetricId id) {
    Moments synth, truth;
    MetricSpreadAudit out;
    out.metric = id;
    const MetricFn fn = metric_fn(id);
    for (std::size_t i = 0; i < set.draws.size(); ++i) {
        const auto value = count_metric(id, set.draws[i]);
        const double t = fn(set.thetas[i]);
        if (!value || std::isnan(t)) {
            out.undefined++;
            continue;
        }
        synth.add(*value);
        truth.add(t);
    }
    out.empirical_std = std::sqrt(synth.variance());
    out.true_std = std::sqrt(truth.variance());
    out.observed_ratio = synth.variance() / truth.variance();
    return out;
}

}  // namespace cmu
