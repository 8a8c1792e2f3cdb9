#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "cmu/confusion_matrix.hpp"
#include "cmu/metrics.hpp"

namespace cmu {

// Upper bound on the 95% HPD length of a Beta-distributed metric after n
// observations: 4 sigma of the widest (a = b = 1/2) Beta, i.e. 2/sqrt(n).
// Throws OutOfRegime for n <= 20 where the normal approximation breaks down.
double mu_bound(Count n);

// Smallest n with mu_bound(n) <= target_mu, i.e. ceil(4 / target_mu^2).
Count n_for_mu(double target_mu);

// Beta shape from a generating mode omega and concentration k > 2.
BetaParams beta_from_mode(double omega, double k);
double beta_mode(const BetaParams& p);

// Exact HPD interval of a Beta distribution: the shortest interval holding
// `mass`, found by minimising Q(p + mass) - Q(p) over the lower tail p.
Interval beta_hpd(const BetaParams& p, double mass = kDefaultCredibility);

// Default candidate grid: 10 log-spaced points per decade from 10 to 10^6.
std::vector<Count> default_candidate_grid();

struct SampleSizePlan {
    double target_mu = 0.1;
    double power = 0.95;
    double omega = 0.8;
    double k = 10.0;
    RatePrior prior = RatePrior::laplace();
    double credibility = kDefaultCredibility;

    struct Point {
        Count n = 0;
        double achieved_mu = 0.0;  // power-quantile of simulated HPD widths
    };
    std::vector<Point> curve;
    std::optional<Count> result_n;

    // Throws InvalidArgument when a field is out of range.
    void validate() const;
};

// Simulation of MU at power for every candidate N: draw a rate from the
// generating Beta, successes z ~ Binomial(N, rate), take the 95% HPD width of
// Beta(z + prior.alpha, N - z + prior.beta). Candidate N uses the sub-seed
// derive_seed(seed, N) so curve points do not depend on the grid.
// Fills curve and leaves result_n empty when no N reaches the target.
SampleSizePlan simulate_power_curve(SampleSizePlan plan, const std::vector<Count>& candidate_ns,
                                    std::size_t sims_per_n, std::uint64_t seed);

// As simulate_power_curve but throws TargetUnreachable (naming the largest
// N tested and its achieved MU) when no candidate suffices.
SampleSizePlan power_simulation(SampleSizePlan plan, const std::vector<Count>& candidate_ns,
                                std::size_t sims_per_n, std::uint64_t seed);

// Achieved MU at one N; exposed for tests and re-sampling.
double achieved_mu_at(const SampleSizePlan& plan, Count n, std::size_t sims, std::uint64_t seed);

}  // namespace cmu
