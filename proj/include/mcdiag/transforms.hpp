#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <stdexcept>
#include <vector>

#include "mcdiag/chain_core.hpp"
#include "mcdiag/math/normal.hpp"

namespace mcdiag {

// Each input chain contributes its first floor(N/2) and last floor(N/2)
// draws as two split chains; for odd N the single middle draw is dropped.
inline Matrix split_chains(const Matrix& draws) {
    if (draws.iters < 4)
        throw std::invalid_argument("split_chains: need at least 4 draws per chain");
    const std::size_t half = draws.iters / 2;
    Matrix out(2 * draws.chains, half);
    for (std::size_t m = 0; m < draws.chains; ++m) {
        for (std::size_t n = 0; n < half; ++n) {
            out.at(2 * m, n) = draws.at(m, n);
            out.at(2 * m + 1, n) = draws.at(m, draws.iters - half + n);
        }
    }
    return out;
}

// Ranks in [1, S]; tied values share the arithmetic mean of the rank
// positions they span, so the rank sum is always S(S+1)/2.
inline std::vector<double> pooled_ranks(std::span<const double> values) {
    const std::size_t s = values.size();
    if (s == 0) throw std::invalid_argument("pooled_ranks: empty input");
    std::vector<std::size_t> order(s);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(s);
    std::size_t i = 0;
    while (i < s) {
        std::size_t j = i;
        while (j + 1 < s && values[order[j + 1]] == values[order[i]]) ++j;
        const double avg = 0.5 * static_cast<double>(i + j) + 1.0;
        for (std::size_t k = i; k <= j; ++k) ranks[order[k]] = avg;
        i = j + 1;
    }
    return ranks;
}

// Blom normal scores: z = Phi^-1((r - 3/8) / (S - 1/4)).
inline std::vector<double> normal_scores(std::span<const double> ranks, std::size_t s) {
    std::vector<double> z(ranks.size());
    const double denom = static_cast<double>(s) - 0.25;
    for (std::size_t i = 0; i < ranks.size(); ++i) {
        if (!(ranks[i] >= 1.0 && ranks[i] <= static_cast<double>(s)))
            throw std::invalid_argument("normal_scores: rank outside [1, S]");
        z[i] = normal_quantile((ranks[i] - 0.375) / denom);
    }
    return z;
}

// Pooled ranks over all chains, then Blom scores, reshaped to the chain
// layout. Invariant under strictly increasing transforms of the input.
inline Matrix rank_normalize(const Matrix& draws) {
    const auto ranks = pooled_ranks(draws.values);
    Matrix out(draws.chains, draws.iters);
    out.values = normal_scores(ranks, draws.total());
    return out;
}

// Linear-interpolation empirical quantile (positions 1 + (S-1)q over the
// order statistics); `sorted` must be ascending.
inline double empirical_quantile_sorted(std::span<const double> sorted, double q) {
    const std::size_t s = sorted.size();
    if (s == 0) throw std::invalid_argument("empirical_quantile: empty input");
    if (q <= 0.0) return sorted.front();
    if (q >= 1.0) return sorted.back();
    const double pos = static_cast<double>(s - 1) * q;
    const std::size_t lo = static_cast<std::size_t>(pos);
    const double frac = pos - static_cast<double>(lo);
    if (lo + 1 >= s) return sorted.back();
    return sorted[lo] + frac * (sorted[lo + 1] - sorted[lo]);
}

inline double empirical_quantile(std::span<const double> values, double q) {
    std::vector<double> sorted(values.begin(), values.end());
    std::sort(sorted.begin(), sorted.end());
    return empirical_quantile_sorted(sorted, q);
}

// Folded draws: absolute deviations from the pooled median.
inline Matrix fold(const Matrix& draws) {
    const double med = empirical_quantile(draws.values, 0.5);
    Matrix out(draws.chains, draws.iters);
    for (std::size_t i = 0; i < draws.values.size(); ++i)
        out.values[i] = std::fabs(draws.values[i] - med);
    return out;
}

inline Matrix indicator_leq(const Matrix& draws, double threshold) {
    Matrix out(draws.chains, draws.iters);
    for (std::size_t i = 0; i < draws.values.size(); ++i)
        out.values[i] = draws.values[i] <= threshold ? 1.0 : 0.0;
    return out;
}

// 1 iff Q(lo_q) < theta <= Q(hi_q), with pooled empirical quantile edges
// (strict lower bound, inclusive upper bound).
inline Matrix indicator_interval(const Matrix& draws, double lo_q, double hi_q) {
    if (!(lo_q >= 0.0 && lo_q < hi_q && hi_q <= 1.0))
        throw std::invalid_argument("indicator_interval: need 0 <= lo_q < hi_q <= 1");
    std::vector<double> sorted(draws.values);
    std::sort(sorted.begin(), sorted.end());
    const double lo = empirical_quantile_sorted(sorted, lo_q);
    const double hi = empirical_quantile_sorted(sorted, hi_q);
    Matrix out(draws.chains, draws.iters);
    for (std::size_t i = 0; i < draws.values.size(); ++i)
        out.values[i] = (draws.values[i] > lo && draws.values[i] <= hi) ? 1.0 : 0.0;
    return out;
}

}  // namespace mcdiag
