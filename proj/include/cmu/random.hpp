#pragma once

#include <algorithm>
#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <thread>
#include <vector>

namespace cmu {

using Rng = std::mt19937_64;

// SplitMix64 finalizer; derives independent sub-stream seeds (per shard,
// per candidate N) from a master seed.
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) noexcept {
    std::uint64_t z = master + 0x9E3779B97F4A7C15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
}

// Beta(alpha, beta) draw via two Gamma variates. Both parameters must be > 0.
inline double sample_beta(Rng& rng, double alpha, double beta) {
    std::gamma_distribution<double> ga(alpha, 1.0);
    std::gamma_distribution<double> gb(beta, 1.0);
    for (;;) {
        const double x = ga(rng);
        const double y = gb(rng);
        const double s = x + y;
        if (s > 0.0) return x / s;
    }
}

template <std::size_t K>
std::array<double, K> sample_dirichlet(Rng& rng, const std::array<double, K>& alpha) {
    std::array<double, K> out{};
    for (;;) {
        double total = 0.0;
        for (std::size_t i = 0; i < K; ++i) {
            out[i] = std::gamma_distribution<double>(alpha[i], 1.0)(rng);
            total += out[i];
        }
        if (total > 0.0) {
            for (auto& x : out) x /= total;
            return out;
        }
    }
}

// Multinomial draw by sequential conditional binomials.
template <std::size_t K>
std::array<std::int64_t, K> sample_multinomial(Rng& rng, std::int64_t n, const std::array<double, K>& p) {
    std::array<std::int64_t, K> out{};
    std::int64_t remaining = n;
    double mass = 1.0;
    for (std::size_t i = 0; i + 1 < K && remaining > 0; ++i) {
        const double q = mass > 0.0 ? std::clamp(p[i] / mass, 0.0, 1.0) : 0.0;
        out[i] = std::binomial_distribution<std::int64_t>(remaining, q)(rng);
        remaining -= out[i];
        mass -= p[i];
    }
    out[K - 1] += remaining;
    return out;
}

// Runs fn(shard_index) for every shard on a small pool of threads. Shards
// must write only to their own slot; results are merged by the caller in
// shard order so output does not depend on the thread count.
template <typename Fn>
void for_each_shard(std::size_t num_shards, Fn&& fn) {
    const std::size_t hw = std::max<std::size_t>(1, std::thread::hardware_concurrency());
    const std::size_t workers = std::min(hw, num_shards);
    if (workers <= 1) {
        for (std::size_t s = 0; s < num_shards; ++s) fn(s);
        return;
    }
    std::vector<std::jthread> pool;
    pool.reserve(workers);
    for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&, w] {
            for (std::size_t s = w; s < num_shards; s += workers) fn(s);
        });
    }
}

}  // namespace cmu
