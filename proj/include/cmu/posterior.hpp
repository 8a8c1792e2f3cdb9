#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "cmu/confusion_matrix.hpp"
#include "cmu/metric.hpp"
#include "cmu/random.hpp"

namespace cmu {

enum class ModelKind { ThreeBeta, DirichletCaelen };

std::string_view to_string(ModelKind kind) noexcept;
// Accepts "three-beta" or "dirichlet".
ModelKind parse_model_kind(std::string_view text);

// Posterior over the CPM.
//
// ThreeBeta keeps independent Beta posteriors for PREV, TPR and TNR and maps
// them onto the simplex. DirichletCaelen keeps a single Dirichlet over the
// four CPM components. A fixed prevalence is a constant, not a Beta.
struct PosteriorModel {
    ModelKind kind = ModelKind::ThreeBeta;
    BetaParams prev{};
    BetaParams tpr{};
    BetaParams tnr{};
    std::array<double, 4> dirichlet_alpha{};  // CPM order
    PrevalencePolicy prevalence = PrevalencePolicy::inferred();

    double alpha0() const noexcept {
        return dirichlet_alpha[0] + dirichlet_alpha[1] + dirichlet_alpha[2] + dirichlet_alpha[3];
    }
    bool prevalence_fixed() const noexcept { return prevalence.mode() == PrevalenceMode::Fixed; }
};

// Throws ImproperPosterior when a prior leaves a posterior parameter at zero
// (Haldane with an empty margin), and InvalidArgument when the Dirichlet
// model is combined with a non-inferred prevalence or asymmetric priors.
PosteriorModel build_posterior(const ConfusionMatrix& cm, const PriorSpec& prior,
                               const PrevalencePolicy& prevalence = PrevalencePolicy::inferred(),
                               ModelKind kind = ModelKind::ThreeBeta);

// Posterior with no observed data, i.e. the prior itself pushed onto the CPM.
PosteriorModel prior_model(const PriorSpec& prior,
                           const PrevalencePolicy& prevalence = PrevalencePolicy::inferred(),
                           ModelKind kind = ModelKind::ThreeBeta);

inline constexpr std::size_t kDefaultSamples = 20000;

class CpmSampleSet {
public:
    CpmSampleSet(std::vector<Cpm> rows, std::uint64_t seed) : rows_(std::move(rows)), seed_(seed) {}

    std::span<const Cpm> rows() const noexcept { return rows_; }
    std::size_t size() const noexcept { return rows_.size(); }
    std::uint64_t seed() const noexcept { return seed_; }
    const Cpm& operator[](std::size_t i) const noexcept { return rows_[i]; }

    // Values of one metric for every row; NaN marks an undefined evaluation.
    std::vector<double> metric_stream(MetricId id) const;

private:
    std::vector<Cpm> rows_;
    std::uint64_t seed_;
};

// One exact draw from the posterior.
Cpm draw_cpm(const PosteriorModel& model, Rng& rng);

// Exact conjugate draws; identical (model, count, seed) give identical rows.
CpmSampleSet sample_cpm(const PosteriorModel& model, std::size_t count = kDefaultSamples,
                        std::uint64_t seed = 0);

inline constexpr double kConvergenceThreshold = 1.01;

struct ConvergenceReport {
    struct Entry {
        std::string quantity;
        double rc = 1.0;
    };
    std::vector<Entry> entries;
    bool passed = true;

    void merge(const ConvergenceReport& other);
    double max_rc() const noexcept;
};

// Split potential scale reduction: the draws are cut into n_chains
// contiguous chains of equal length (a remainder is dropped from the end).
// Returns the raw statistic; it can dip slightly below 1 from noise. A zero
// within-chain variance gives 1 when the chains also agree, +inf otherwise.
// Throws TooFewSamples for fewer than 2 draws per chain.
double split_rhat(std::span<const double> draws, std::size_t n_chains = 2);

// Report for one stream, with rc clipped below at 1.
ConvergenceReport gelman_rubin(std::span<const double> draws, std::size_t n_chains = 2,
                               std::string quantity = "value");

}  // namespace cmu
