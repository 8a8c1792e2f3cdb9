#include "cmu/leaderboard.hpp"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <numeric>
#include <sstream>

#include "cmu/error.hpp"
#include "cmu/random.hpp"

namespace cmu {

namespace {

constexpr std::size_t kShardSize = 4096;

int fixed_decimals(double value) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, value, std::chars_format::fixed);
    const std::string_view text(buf, static_cast<std::size_t>(res.ptr - buf));
    const auto dot = text.find('.');
    return dot == std::string_view::npos ? 0 : static_cast<int>(text.size() - dot - 1);
}

std::string_view trim(std::string_view s) {
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
    while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
    return s;
}

std::string_view unquote(std::string_view s) {
    s = trim(s);
    if (s.size() >= 2 && s.front() == '"' && s.back() == '"') s = s.substr(1, s.size() - 2);
    return s;
}

std::vector<std::string_view> split(std::string_view line, char sep) {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        if (line[i] == '"') quoted = !quoted;
        if (line[i] == sep && !quoted) {
            out.push_back(line.substr(start, i - start));
            start = i + 1;
        }
    }
    out.push_back(line.substr(start));
    return out;
}

[[noreturn]] void parse_fail(std::size_t line, std::string_view what) {
    std::ostringstream msg;
    msg << "leaderboard CSV line " << line << ": " << what;
    throw Error(ErrorCode::ParseError, msg.str());
}

}  // namespace

Count Submission::correct() const {
    if (n < 1) throw Error(ErrorCode::InvalidArgument, "submission '" + name + "': n must be >= 1");
    if (!(acc_point >= 0.0 && acc_point <= 1.0)) {
        throw Error(ErrorCode::InvalidArgument, "submission '" + name + "': accuracy must lie in [0, 1]");
    }
    const int d = decimals.value_or(fixed_decimals(acc_point));
    const double exact = acc_point * static_cast<double>(n);
    const double nearest = std::round(exact);
    const double tolerance = 0.5 * std::pow(10.0, -d) * static_cast<double>(n) + 1e-9;
    if (std::abs(exact - nearest) > tolerance) {
        std::ostringstream msg;
        msg << "submission '" << name << "': accuracy " << acc_point << " times n = " << n << " gives "
            << exact << ", which is not an integer count at the reported precision; check n";
        throw Error(ErrorCode::RoundingInconsistent, msg.str());
    }
    return static_cast<Count>(nearest);
}

BetaParams acc_posterior(const Submission& sub, const RatePrior& prior) {
    const Count correct = sub.correct();
    const BetaParams post = prior.update(correct, sub.n - correct);
    if (!post.proper()) {
        throw Error(ErrorCode::ImproperPosterior,
                    "accuracy posterior for '" + sub.name + "' is improper; choose Laplace or Jeffreys");
    }
    return post;
}

RankProbabilityMatrix rank_distribution(const std::vector<BetaParams>& posteriors,
                                        const std::vector<std::string>& names, std::size_t draws,
                                        std::uint64_t seed) {
    const std::size_t m = posteriors.size();
    if (m < 2) throw Error(ErrorCode::InvalidArgument, "ranking needs at least two submissions");
    if (names.size() != m) throw Error(ErrorCode::InvalidArgument, "one name per posterior required");
    if (draws < 1) throw Error(ErrorCode::InvalidArgument, "ranking needs at least one draw");

    const std::size_t shards = (draws + kShardSize - 1) / kShardSize;
    std::vector<std::vector<std::uint64_t>> tallies(shards);
    for_each_shard(shards, [&](std::size_t shard) {
        Rng rng(derive_seed(seed, shard));
        auto& tally = tallies[shard];
        tally.assign(m * m, 0);
        std::vector<double> acc(m);
        std::vector<std::size_t> order(m);
        const std::size_t begin = shard * kShardSize;
        const std::size_t end = std::min(draws, begin + kShardSize);
        for (std::size_t d = begin; d < end; ++d) {
            for (std::size_t s = 0; s < m; ++s) acc[s] = sample_beta(rng, posteriors[s].alpha, posteriors[s].beta);
            std::iota(order.begin(), order.end(), 0);
            // A random permutation followed by a stable sort breaks ties uniformly.
            std::shuffle(order.begin(), order.end(), rng);
            std::stable_sort(order.begin(), order.end(),
                             [&](std::size_t a, std::size_t b) { return acc[a] > acc[b]; });
            for (std::size_t p = 0; p < m; ++p) tally[order[p] * m + p]++;
        }
    });

    std::vector<std::uint64_t> total(m * m, 0);
    for (const auto& t : tallies) {
        for (std::size_t i = 0; i < total.size(); ++i) total[i] += t[i];
    }
    RankProbabilityMatrix out;
    out.names = names;
    out.draws = draws;
    out.seed = seed;
    out.entries.assign(m, std::vector<double>(m, 0.0));
    for (std::size_t s = 0; s < m; ++s) {
        for (std::size_t p = 0; p < m; ++p) {
            out.entries[s][p] = static_cast<double>(total[s * m + p]) / static_cast<double>(draws);
        }
    }
    return out;
}

RankProbabilityMatrix rank_distribution(const std::vector<Submission>& subs, std::size_t draws,
                                        std::uint64_t seed, const RatePrior& prior) {
    std::vector<BetaParams> posteriors;
    std::vector<std::string> names;
    posteriors.reserve(subs.size());
    names.reserve(subs.size());
    for (const auto& sub : subs) {
        posteriors.push_back(acc_posterior(sub, prior));
        names.push_back(sub.name);
    }
    return rank_distribution(posteriors, names, draws, seed);
}

ProbBest prob_best(const std::vector<Submission>& subs, const RankProbabilityMatrix& matrix) {
    if (subs.empty() || subs.size() != matrix.size()) {
        throw Error(ErrorCode::InvalidArgument, "rank matrix does not match the submissions");
    }
    ProbBest out;
    for (std::size_t s = 1; s < subs.size(); ++s) {
        if (subs[s].acc_point > subs[out.index].acc_point) out.index = s;
    }
    out.probability = matrix.entries[out.index][0];
    out.standard_error =
        std::sqrt(out.probability * (1.0 - out.probability) / static_cast<double>(matrix.draws));
    return out;
}

PrizeAllocation allocate_prizes(const RankProbabilityMatrix& matrix, const std::vector<double>& prizes) {
    if (prizes.size() > matrix.size()) {
        throw Error(ErrorCode::InvalidArgument, "more prizes than leaderboard positions");
    }
    PrizeAllocation out;
    out.prizes = prizes;
    out.expected_prize.assign(matrix.size(), 0.0);
    for (std::size_t s = 0; s < matrix.size(); ++s) {
        for (std::size_t p = 0; p < prizes.size(); ++p) {
            out.expected_prize[s] += matrix.entries[s][p] * prizes[p];
        }
    }
    return out;
}

std::vector<Submission> parse_leaderboard_csv(std::string_view text, std::optional<Count> default_n) {
    std::vector<Submission> subs;
    std::size_t line_no = 0;
    bool has_n = false;
    bool header_seen = false;
    while (!text.empty()) {
        const auto nl = text.find('\n');
        std::string_view line = text.substr(0, nl);
        text = nl == std::string_view::npos ? std::string_view{} : text.substr(nl + 1);
        ++line_no;
        line = trim(line);
        if (line.empty() || line.front() == '#') continue;
        const auto fields = split(line, ',');

        if (!header_seen) {
            header_seen = true;
            std::vector<std::string> cols;
            for (auto f : fields) {
                std::string c(unquote(f));
                for (auto& ch : c) ch = static_cast<char>(std::tolower(static_cast<unsigned char>(ch)));
                cols.push_back(c);
            }
            if (cols.size() < 2 || cols.size() > 3 || cols[0] != "name" || cols[1] != "accuracy" ||
                (cols.size() == 3 && cols[2] != "n")) {
                parse_fail(line_no, "header must be name,accuracy[,n]");
            }
            has_n = cols.size() == 3;
            if (!has_n && !default_n) parse_fail(line_no, "no n column; supply n for every submission");
            continue;
        }
        if (fields.size() != (has_n ? 3u : 2u)) parse_fail(line_no, "wrong number of fields");

        Submission sub;
        sub.name = std::string(unquote(fields[0]));
        std::string_view acc = trim(fields[1]);
        const bool percent = !acc.empty() && acc.back() == '%';
        if (percent) acc = trim(acc.substr(0, acc.size() - 1));
        double value = 0.0;
        auto [ptr, ec] = std::from_chars(acc.data(), acc.data() + acc.size(), value);
        if (ec != std::errc{} || ptr != acc.data() + acc.size()) parse_fail(line_no, "accuracy is not a number");
        const auto dot = acc.find('.');
        int decimals = dot == std::string_view::npos ? 0 : static_cast<int>(acc.size() - dot - 1);
        if (percent) {
            value /= 100.0;
            decimals += 2;
        }
        if (!(value >= 0.0 && value <= 1.0)) parse_fail(line_no, "accuracy outside [0, 1]");
        sub.acc_point = value;
        sub.decimals = decimals;

        if (has_n) {
            const auto nf = trim(fields[2]);
            Count n = 0;
            auto [p2, ec2] = std::from_chars(nf.data(), nf.data() + nf.size(), n);
            if (ec2 != std::errc{} || p2 != nf.data() + nf.size() || n < 1) parse_fail(line_no, "n must be a positive integer");
            sub.n = n;
        } else {
            sub.n = *default_n;
        }
        subs.push_back(std::move(sub));
    }
    if (!header_seen) throw Error(ErrorCode::ParseError, "leaderboard CSV is empty");
    return subs;
}

}  // namespace cmu
