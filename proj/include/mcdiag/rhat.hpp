#pragma once

#include <algorithm>
#include <cmath>

#include "mcdiag/chain_core.hpp"
#include "mcdiag/transforms.hpp"

namespace mcdiag {

struct VarianceDecomposition {
    double between = 0.0;   // B, includes the factor N
    double within = 0.0;    // W, mean within-chain variance
    double var_plus = 0.0;  // ((N-1)/N) W + B/N
    std::size_t chains = 0;
    std::size_t iters = 0;
};

// B and W with divisors M-1 and N-1; expects chains that have already
// been split when computing split-Rhat.
inline VarianceDecomposition variance_decomposition(const Matrix& chains) {
    if (chains.chains < 2 || chains.iters < 2)
        throw std::invalid_argument("variance_decomposition: need M >= 2, N >= 2");
    const std::size_t m_count = chains.chains;
    const auto n = static_cast<double>(chains.iters);

    std::vector<double> means(m_count, 0.0);
    double grand = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
        double sum = 0.0;
        for (double v : chains.chain(m)) sum += v;
        means[m] = sum / n;
        grand += means[m];
    }
    grand /= static_cast<double>(m_count);

    double b = 0.0;
    for (double mu : means) b += (mu - grand) * (mu - grand);
    b *= n / static_cast<double>(m_count - 1);

    double w = 0.0;
    for (std::size_t m = 0; m < m_count; ++m) {
        double s2 = 0.0;
        for (double v : chains.chain(m)) s2 += (v - means[m]) * (v - means[m]);
        w += s2 / (n - 1.0);
    }
    w /= static_cast<double>(m_count);

    VarianceDecomposition out;
    out.between = b;
    out.within = w;
    out.var_plus = (n - 1.0) / n * w + b / n;
    out.chains = m_count;
    out.iters = chains.iters;
    return out;
}

inline double rhat_from_decomposition(const VarianceDecomposition& vd) {
    if (!(vd.within > 0.0)) return nan_value;
    return std::sqrt(vd.var_plus / vd.within);
}

// Split-Rhat on raw values: sqrt(var_plus / W) on the split chains.
inline double split_rhat(const Matrix& draws) {
    return rhat_from_decomposition(variance_decomposition(split_chains(draws)));
}

// Rank-normalize first (pooled over all chains), split second.
inline double rank_normalized_split_rhat(const Matrix& draws) {
    return split_rhat(rank_normalize(draws));
}

inline double folded_split_rhat(const Matrix& draws) {
    return rank_normalized_split_rhat(fold(draws));
}

// Headline statistic: max of rank-normalized and folded split-Rhat,
// NaN-propagating.
inline double rhat_max(const Matrix& draws) {
    const double r = rank_normalized_split_rhat(draws);
    const double f = folded_split_rhat(draws);
    if (std::isnan(r) || std::isnan(f)) return nan_value;
    return std::max(r, f);
}

// Whole-chain Rhat without splitting; comparison baseline only.
inline double unsplit_rhat(const Matrix& draws) {
    return rhat_from_decomposition(variance_decomposition(draws));
}

}  // namespace mcdiag
