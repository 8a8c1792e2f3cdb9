#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cmu/confusion_matrix.hpp"

namespace cmu {

// A leaderboard entry: a published accuracy and the size of the test set it
// was measured on. `decimals` is the number of decimal places the accuracy
// was reported with as a fraction (0.935 -> 3, "93.5%" -> 3); when unknown it
// is inferred from the shortest round-trip representation of acc_point.
struct Submission {
    std::string name;
    double acc_point = 0.0;
    Count n = 0;
    std::optional<int> decimals;

    // Throws RoundingInconsistent when acc_point * n is not within the
    // reporting precision of an integer, InvalidArgument for bad ranges.
    Count correct() const;
    Count wrong() const { return n - correct(); }
};

// Beta(correct + prior.alpha, wrong + prior.beta).
BetaParams acc_posterior(const Submission& sub, const RatePrior& prior = RatePrior::laplace());

// entries[s][p]: probability that submission s lands at position p (0 = top).
struct RankProbabilityMatrix {
    std::vector<std::string> names;
    std::vector<std::vector<double>> entries;
    std::size_t draws = 0;
    std::uint64_t seed = 0;

    std::size_t size() const noexcept { return entries.size(); }
};

// Monte Carlo leaderboard: every draw samples one accuracy per posterior,
// ranks them in descending order (ties broken uniformly at random) and
// tallies positions. Throws InvalidArgument for fewer than two posteriors.
RankProbabilityMatrix rank_distribution(const std::vector<BetaParams>& posteriors,
                                        const std::vector<std::string>& names, std::size_t draws,
                                        std::uint64_t seed);

RankProbabilityMatrix rank_distribution(const std::vector<Submission>& subs, std::size_t draws,
                                        std::uint64_t seed, const RatePrior& prior = RatePrior::laplace());

// P(the submission with the highest point accuracy is truly best), with its
// Monte Carlo standard error.
struct ProbBest {
    std::size_t index = 0;
    double probability = 0.0;
    double standard_error = 0.0;
};

ProbBest prob_best(const std::vector<Submission>& subs, const RankProbabilityMatrix& matrix);

struct PrizeAllocation {
    std::vector<double> prizes;            // per position, top first
    std::vector<double> expected_prize;    // per submission
};

PrizeAllocation allocate_prizes(const RankProbabilityMatrix& matrix, const std::vector<double>& prizes);

// Leaderboard CSV: header `name,accuracy[,n]`. Accuracy is a fraction or a
// percentage with a trailing '%'. `default_n` supplies n when the column is
// absent. Throws ParseError with line context.
std::vector<Submission> parse_leaderboard_csv(std::string_view text, std::optional<Count> default_n);

}  // namespace cmu
