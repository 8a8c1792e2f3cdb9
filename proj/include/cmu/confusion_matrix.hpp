#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <string_view>

namespace cmu {

using Count = std::int64_t;

// Binary confusion matrix laid out as [TP FN; FP TN].
class ConfusionMatrix {
public:
    // Throws NegativeCount for any count < 0 and EmptyMatrix when all are 0.
    static ConfusionMatrix validate(Count tp, Count fn, Count fp, Count tn);

    Count tp() const noexcept { return tp_; }
    Count fn() const noexcept { return fn_; }
    Count fp() const noexcept { return fp_; }
    Count tn() const noexcept { return tn_; }
    Count n() const noexcept { return tp_ + fn_ + fp_ + tn_; }

    Count positives() const noexcept { return tp_ + fn_; }
    Count negatives() const noexcept { return fp_ + tn_; }

    // Counts in CPM order (TP, FN, TN, FP).
    std::array<Count, 4> cpm_order() const noexcept { return {tp_, fn_, tn_, fp_}; }

    friend bool operator==(const ConfusionMatrix&, const ConfusionMatrix&) = default;

private:
    ConfusionMatrix(Count tp, Count fn, Count fp, Count tn) noexcept
        : tp_(tp), fn_(fn), fp_(fp), tn_(tn) {}

    Count tp_;
    Count fn_;
    Count fp_;
    Count tn_;
};

struct BetaParams {
    double alpha = 1.0;
    double beta = 1.0;

    bool proper() const noexcept { return alpha > 0.0 && beta > 0.0; }
    double mean() const noexcept { return alpha / (alpha + beta); }
    double variance() const noexcept;

    friend bool operator==(const BetaParams&, const BetaParams&) = default;
};

enum class PriorKind { Laplace, Jeffreys, Haldane, Custom };

// Conjugate Beta prior on one rate (PREV, TPR or TNR).
struct RatePrior {
    PriorKind kind = PriorKind::Laplace;
    BetaParams params{1.0, 1.0};

    static RatePrior laplace() noexcept { return {PriorKind::Laplace, {1.0, 1.0}}; }
    static RatePrior jeffreys() noexcept { return {PriorKind::Jeffreys, {0.5, 0.5}}; }
    static RatePrior haldane() noexcept { return {PriorKind::Haldane, {0.0, 0.0}}; }
    // Requires alpha >= 0 and beta >= 0.
    static RatePrior custom(double alpha, double beta);

    // Accepts "laplace", "jeffreys", "haldane" or "custom:a,b".
    static RatePrior parse(std::string_view text);
    std::string to_string() const;

    // Posterior after observing `successes` and `failures`.
    BetaParams update(Count successes, Count failures) const noexcept {
        return {params.alpha + static_cast<double>(successes),
                params.beta + static_cast<double>(failures)};
    }

    friend bool operator==(const RatePrior&, const RatePrior&) = default;
};

struct PriorSpec {
    RatePrior prev = RatePrior::laplace();
    RatePrior tpr = RatePrior::laplace();
    RatePrior tnr = RatePrior::laplace();

    static PriorSpec uniform(const RatePrior& p) noexcept { return {p, p, p}; }

    friend bool operator==(const PriorSpec&, const PriorSpec&) = default;
};

enum class PrevalenceMode { Inferred, Fixed, External };

class PrevalencePolicy {
public:
    static PrevalencePolicy inferred() noexcept { return {}; }
    // value must lie in [0, 1].
    static PrevalencePolicy fixed(double value);
    static PrevalencePolicy external(BetaParams params);

    PrevalenceMode mode() const noexcept { return mode_; }
    double fixed_value() const noexcept { return fixed_; }
    const BetaParams& external_params() const noexcept { return external_; }

    friend bool operator==(const PrevalencePolicy&, const PrevalencePolicy&) = default;

private:
    PrevalenceMode mode_ = PrevalenceMode::Inferred;
    double fixed_ = 0.0;
    BetaParams external_{};
};

std::string_view to_string(PriorKind kind) noexcept;
std::string_view to_string(PrevalenceMode mode) noexcept;

}  // namespace cmu
