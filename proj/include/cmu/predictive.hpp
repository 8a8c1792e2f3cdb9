#pragma once

#include <array>
#include <cstdint>
#include <map>
#include <vector>

#include "cmu/metric.hpp"
#include "cmu/posterior.hpp"

namespace cmu {

// Posterior-predictive confusion matrices: each draw samples a CPM and then
// one multinomial CM of size n_synth from it. Counts are in CPM order.
struct SyntheticCmSet {
    std::vector<std::array<Count, 4>> draws;
    std::vector<Cpm> thetas;  // the CPM each draw was generated from
    Count n_synth = 0;
    PosteriorModel source;
    std::uint64_t seed = 0;
};

// Throws InvalidArgument for n_synth < 1.
SyntheticCmSet synthesize_cms(const PosteriorModel& model, Count n_synth, std::size_t draws,
                              std::uint64_t seed);

// Discrete distribution of a count-based metric across synthetic CMs.
// Draws where the metric's denominator vanishes go to `undefined`.
struct EmpiricalDistribution {
    MetricId metric = MetricId::ACC;
    std::map<double, std::size_t> counts;  // value -> number of draws
    std::size_t undefined = 0;
    std::size_t total = 0;

    double probability(double value) const;
    double mean() const;
    double variance() const;
    std::size_t defined() const noexcept { return total - undefined; }
};

EmpiricalDistribution empirical_metric_distribution(const SyntheticCmSet& set, MetricId id);

// Compares the spread of synthetic proportions V_i/n with the spread of the
// generating CPM component theta_i. For a Dirichlet posterior
// Var(V_i/n) = (1 + alpha0/n) Var(theta_i).
struct VarianceAudit {
    int component = 0;  // CPM order index
    double empirical_mean = 0.0;     // mean of V_i/n
    double true_mean = 0.0;          // mean of theta_i
    double mean_standard_error = 0.0;
    double empirical_var = 0.0;      // Var(V_i/n)
    double true_var = 0.0;           // Var(theta_i), from the same draws
    double analytic_var = 0.0;       // closed-form Dirichlet marginal variance
    double predicted_ratio = 0.0;
    double observed_ratio = 0.0;
};

// Throws InvalidArgument unless the model is DirichletCaelen.
std::array<VarianceAudit, 4> variance_audit(const PosteriorModel& model, Count n_synth,
                                            std::size_t draws, std::uint64_t seed);

// Spread of a (possibly nonlinear) metric on synthetic CMs versus on the
// CPMs they came from. No closed-form prediction is attached.
struct MetricSpreadAudit {
    MetricId metric = MetricId::ACC;
    double empirical_std = 0.0;
    double true_std = 0.0;
    double observed_ratio = 0.0;  // variance ratio
    std::size_t undefined = 0;
};

MetricSpreadAudit metric_spread_audit(const SyntheticCmSet& set, MetricId id);

}  // namespace cmu
