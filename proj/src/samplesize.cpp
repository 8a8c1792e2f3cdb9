#include "cmu/samplesize.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <unordered_map>

#include <boost/math/distributions/beta.hpp>
#include <boost/math/tools/minima.hpp>

#include "cmu/error.hpp"
#include "cmu/random.hpp"

namespace cmu {

namespace {

constexpr Count kMinBoundN = 20;
constexpr std::size_t kMinSims = 200;

}  // namespace

double mu_bound(Count n) {
    if (n <= kMinBoundN) {
        throw Error(ErrorCode::OutOfRegime, "the 2/sqrt(N) bound is only reliable for N > 20");
    }
    return 2.0 / std::sqrt(static_cast<double>(n));
}

Count n_for_mu(double target_mu) {
    if (!(target_mu > 0.0 && target_mu < 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "target MU must lie in (0, 1)");
    }
    const double x = 4.0 / (target_mu * target_mu);
    const double r = std::round(x);
    // 4 / 0.2^2 evaluates a few ulps away from 100.
    if (std::abs(x - r) <= 1e-9 * x) return static_cast<Count>(r);
    return static_cast<Count>(std::ceil(x));
}

BetaParams beta_from_mode(double omega, double k) {
    if (!(omega > 0.0 && omega < 1.0)) throw Error(ErrorCode::InvalidArgument, "mode must lie in (0, 1)");
    if (!(k > 2.0)) throw Error(ErrorCode::InvalidArgument, "concentration must exceed 2");
    return {omega * (k - 2.0) + 1.0, (1.0 - omega) * (k - 2.0) + 1.0};
}

double beta_mode(const BetaParams& p) { return (p.alpha - 1.0) / (p.alpha + p.beta - 2.0); }

Interval beta_hpd(const BetaParams& p, double mass) {
    if (!p.proper()) throw Error(ErrorCode::ImproperPosterior, "HPD of an improper Beta");
    if (!(mass > 0.0 && mass < 1.0)) throw Error(ErrorCode::InvalidArgument, "mass must lie in (0, 1)");
    const boost::math::beta_distribution<double> dist(p.alpha, p.beta);
    const auto width = [&](double lower_tail) {
        return boost::math::quantile(dist, lower_tail + mass) - boost::math::quantile(dist, lower_tail);
    };
    const double hi_tail = 1.0 - mass;
    auto [tail, w] = boost::math::tools::brent_find_minima(width, 0.0, hi_tail, 40);
    // Monotone densities put the optimum on a boundary, which Brent only approaches.
    for (double edge : {0.0, hi_tail}) {
        const double we = width(edge);
        if (we < w) {
            w = we;
            tail = edge;
        }
    }
    return {boost::math::quantile(dist, tail), boost::math::quantile(dist, tail + mass)};
}

std::vector<Count> default_candidate_grid() {
    std::vector<Count> grid;
    for (int i = 0; i <= 50; ++i) {
        const auto n = static_cast<Count>(std::llround(std::pow(10.0, 1.0 + i / 10.0)));
        if (grid.empty() || grid.back() != n) grid.push_back(n);
    }
    return grid;
}

void SampleSizePlan::validate() const {
    if (!(target_mu > 0.0 && target_mu < 0.95)) throw Error(ErrorCode::InvalidArgument, "target MU must lie in (0, 0.95)");
    if (!(power > 0.0 && power < 1.0)) throw Error(ErrorCode::InvalidArgument, "power must lie in (0, 1)");
    if (!(credibility > 0.0 && credibility < 1.0)) throw Error(ErrorCode::InvalidArgument, "credibility must lie in (0, 1)");
    beta_from_mode(omega, k);
}

double achieved_mu_at(const SampleSizePlan& plan, Count n, std::size_t sims, std::uint64_t seed) {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "candidate N must be >= 1");
    if (sims < 1) throw Error(ErrorCode::InvalidArgument, "at least one simulation is required");
    const BetaParams generating = beta_from_mode(plan.omega, plan.k);
    Rng rng(seed);
    std::unordered_map<Count, double> width_for_successes;
    std::vector<double> widths;
    widths.reserve(sims);
    for (std::size_t s = 0; s < sims; ++s) {
        const double rate = sample_beta(rng, generating.alpha, generating.beta);
        const Count z = std::binomial_distribution<Count>(n, rate)(rng);
        auto it = width_for_successes.find(z);
        if (it == width_for_successes.end()) {
            const BetaParams post = plan.prior.update(z, n - z);
            if (!post.proper()) {
                throw Error(ErrorCode::ImproperPosterior,
                            "simulated data leave the posterior improper under this prior; choose Laplace or Jeffreys");
            }
            it = width_for_successes.emplace(z, beta_hpd(post, plan.credibility).width()).first;
        }
        widths.push_back(it->second);
    }
    std::sort(widths.begin(), widths.end());
    return quantile_sorted(widths, plan.power);
}

SampleSizePlan simulate_power_curve(SampleSizePlan plan, const std::vector<Count>& candidate_ns,
                                    std::size_t sims_per_n, std::uint64_t seed) {
    plan.validate();
    if (candidate_ns.empty()) throw Error(ErrorCode::InvalidArgument, "no candidate sample sizes");
    if (!std::is_sorted(candidate_ns.begin(), candidate_ns.end())) {
        throw Error(ErrorCode::InvalidArgument, "candidate sample sizes must be sorted ascending");
    }
    if (sims_per_n < kMinSims) {
        throw Error(ErrorCode::InvalidArgument, "at least 200 simulations per N are required");
    }
    plan.curve.assign(candidate_ns.size(), {});
    plan.result_n.reset();
    // Each point owns its own sub-seed, so shards only write their own slot.
    std::vector<std::exception_ptr> failures(candidate_ns.size());
    for_each_shard(candidate_ns.size(), [&](std::size_t i) {
        try {
            const Count n = candidate_ns[i];
            plan.curve[i] = {n, achieved_mu_at(plan, n, sims_per_n, derive_seed(seed, static_cast<std::uint64_t>(n)))};
        } catch (...) {
            failures[i] = std::current_exception();
        }
    });
    for (const auto& f : failures) {
        if (f) std::rethrow_exception(f);
    }
    for (const auto& point : plan.curve) {
        if (point.achieved_mu <= plan.target_mu) {
            plan.result_n = point.n;
            break;
        }
    }
    return plan;
}

SampleSizePlan power_simulation(SampleSizePlan plan, const std::vector<Count>& candidate_ns,
                                std::size_t sims_per_n, std::uint64_t seed) {
    plan = simulate_power_curve(std::move(plan), candidate_ns, sims_per_n, seed);
    if (!plan.result_n) {
        const auto& last = plan.curve.back();
        std::ostringstream msg;
        msg << "no candidate N reaches MU <= " << plan.target_mu << " at power " << plan.power
            << "; largest tested N = " << last.n << " achieves MU = " << last.achieved_mu;
        throw Error(ErrorCode::TargetUnreachable, msg.str());
    }
    return plan;
}

}  // namespace cmu
