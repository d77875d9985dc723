#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "mcdiag/chain_core.hpp"
#include "mcdiag/math/fft.hpp"
#include "mcdiag/rhat.hpp"
#include "mcdiag/transforms.hpp"

namespace mcdiag {

struct AutocorrSpectrum {
    std::vector<std::vector<double>> per_chain_rho;  // rho_{t,m}, biased divisor N
    std::vector<double> combined_rho;                // rho_t per Eq. (rhohat)
    std::vector<double> per_chain_var;               // s_m^2
    double within = 0.0;
    double var_plus = 0.0;
    bool degenerate = false;
};

struct EssResult {
    double ess = nan_value;
    double tau_hat = nan_value;
    std::size_t truncation_lag = 0;
    bool capped = false;
    FlagSet flags;
};

// Combined multi-chain autocorrelation; expects split chains.
// combined_rho[0] is exactly 1 for non-degenerate inputs.
inline AutocorrSpectrum combined_autocorrelation(const Matrix& split) {
    if (split.chains < 2 || split.iters < 2)
        throw std::invalid_argument("combined_autocorrelation: need M >= 2 split chains, N >= 2");
    const auto vd = variance_decomposition(split);
    const std::size_t m_count = split.chains;
    const std::size_t n = split.iters;
    const double bias_fix = static_cast<double>(n) / (static_cast<double>(n) - 1.0);

    AutocorrSpectrum spec;
    spec.within = vd.within;
    spec.var_plus = vd.var_plus;
    spec.per_chain_rho.resize(m_count);
    spec.per_chain_var.resize(m_count);
    if (!(vd.var_plus > 0.0)) {
        spec.degenerate = true;
        return spec;
    }

    std::vector<std::vector<double>> acov(m_count);
    for (std::size_t m = 0; m < m_count; ++m) {
        acov[m] = autocovariance_fft(split.chain(m));
        spec.per_chain_var[m] = acov[m][0] * bias_fix;
        spec.per_chain_rho[m].resize(n);
        for (std::size_t t = 0; t < n; ++t)
            spec.per_chain_rho[m][t] = acov[m][0] > 0.0 ? acov[m][t] / acov[m][0] : 0.0;
    }

    spec.combined_rho.resize(n);
    for (std::size_t t = 0; t < n; ++t) {
        double mean_term = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) mean_term += acov[m][t] * bias_fix;
        mean_term /= static_cast<double>(m_count);
        spec.combined_rho[t] = 1.0 - (vd.within - mean_term) / vd.var_plus;
    }
    spec.combined_rho[0] = 1.0;  // exact by definition, kill the fp residue
    return spec;
}

struct GeyerResult {
    double tau_hat = nan_value;
    std::size_t truncation_lag = 0;  // last odd lag retained (2k+1)
};

// Geyer initial positive / initial monotone truncation of the paired
// autocorrelation sums, with the odd/even averaging refinement: after
// selecting k, tau_even adds the (clipped at 0) autocorrelation at the
// next even lag and the reported tau is the mean of the two sums.
inline GeyerResult geyer_truncate(std::span<const double> combined_rho) {
    if (combined_rho.empty())
        throw std::invalid_argument("geyer_truncate: empty autocorrelation sequence");
    GeyerResult out;
    if (combined_rho.size() < 2) {
        out.tau_hat = -1.0 + 2.0 * combined_rho[0];
        out.truncation_lag = 0;
        return out;
    }

    const std::size_t max_pairs = combined_rho.size() / 2;
    std::vector<double> pairs;
    pairs.push_back(combined_rho[0] + combined_rho[1]);
    for (std::size_t tp = 1; tp < max_pairs; ++tp) {
        const double p = combined_rho[2 * tp] + combined_rho[2 * tp + 1];
        if (!(p > 0.0)) break;
        pairs.push_back(p);
    }

    // initial monotone: running minimum over retained pairs
    double running_min = pairs[0];
    double sum = pairs[0];
    for (std::size_t i = 1; i < pairs.size(); ++i) {
        running_min = std::min(running_min, pairs[i]);
        sum += running_min;
    }
    const std::size_t k = pairs.size() - 1;
    const double tau_odd = -1.0 + 2.0 * sum;
    double tau_even = tau_odd;
    if (2 * k + 2 < combined_rho.size())
        tau_even += std::max(0.0, combined_rho[2 * k + 2]);
    out.tau_hat = 0.5 * (tau_odd + tau_even);
    out.truncation_lag = 2 * k + 1;
    return out;
}

namespace detail {

// ESS of already-split chains: combined autocorrelation, Geyer
// truncation, S/tau, then the S log10(S) cap.
inline EssResult ess_core_split(const Matrix& split, bool cap) {
    EssResult res;
    const auto spec = combined_autocorrelation(split);
    if (spec.degenerate) {
        res.flags.insert(Flag::ConstantParameter);
        return res;
    }
    const auto g = geyer_truncate(spec.combined_rho);
    res.tau_hat = g.tau_hat;
    res.truncation_lag = g.truncation_lag;
    const auto s = static_cast<double>(split.total());
    res.ess = g.tau_hat > 0.0 ? s / g.tau_hat : std::numeric_limits<double>::infinity();
    if (cap) {
        const double bound = s * std::log10(s);
        if (res.ess > bound) {
            res.ess = bound;
            res.capped = true;
            res.flags.insert(Flag::EssCapped);
        }
    }
    return res;
}

inline bool indicator_constant(const Matrix& ind) {
    const double first = ind.values.front();
    return std::all_of(ind.values.begin(), ind.values.end(),
                       [first](double v) { return v == first; });
}

}  // namespace detail

// Classic ESS of the mean on raw values (chains split internally).
inline EssResult ess_mean(const Matrix& draws, bool cap = true) {
    return detail::ess_core_split(split_chains(draws), cap);
}

// Bulk-ESS: classic ESS machinery on the rank-normalized draws.
inline EssResult ess_bulk(const Matrix& draws, bool cap = true) {
    return detail::ess_core_split(split_chains(rank_normalize(draws)), cap);
}

// ESS of the q-quantile estimate: ESS of the indicator I(theta <= Q_q).
// Indicators are bijectively invariant already, so no rank normalization.
inline EssResult ess_quantile(const Matrix& draws, double q, bool cap = true) {
    if (!(q > 0.0 && q < 1.0))
        throw std::invalid_argument("ess_quantile: q must lie in (0,1)");
    std::vector<double> sorted(draws.values);
    std::sort(sorted.begin(), sorted.end());
    const double threshold = empirical_quantile_sorted(sorted, q);
    const Matrix ind = indicator_leq(draws, threshold);
    if (detail::indicator_constant(ind)) {
        EssResult res;
        res.flags.insert(Flag::DegenerateIndicator);
        return res;
    }
    EssResult res = detail::ess_core_split(split_chains(ind), cap);
    if (threshold == sorted.front() || threshold == sorted.back())
        res.flags.insert(Flag::DegenerateIndicator);
    return res;
}

// Tail-ESS: minimum over the two configured tail quantiles.
inline EssResult ess_tail(const Matrix& draws,
                          std::pair<double, double> tail_quantiles = {0.05, 0.95},
                          bool cap = true) {
    EssResult lo = ess_quantile(draws, tail_quantiles.first, cap);
    EssResult hi = ess_quantile(draws, tail_quantiles.second, cap);
    const bool take_lo = std::isnan(lo.ess) || (!std::isnan(hi.ess) && lo.ess <= hi.ess);
    EssResult res = take_lo ? lo : hi;
    const EssResult& other = take_lo ? hi : lo;
    res.flags.insert(other.flags.begin(), other.flags.end());
    return res;
}

inline EssResult ess_median(const Matrix& draws, bool cap = true) {
    return ess_quantile(draws, 0.5, cap);
}

inline EssResult ess_mad(const Matrix& draws, bool cap = true) {
    return ess_quantile(fold(draws), 0.5, cap);
}

// ESS of each of k equal-probability small-interval indicators.
inline std::vector<EssResult> ess_local(const Matrix& draws, std::size_t k, bool cap = true) {
    if (k < 2) throw std::invalid_argument("ess_local: need k >= 2");
    if (k > draws.total())
        throw std::invalid_argument("ess_local: more intervals than draws");
    std::vector<EssResult> out;
    out.reserve(k);
    for (std::size_t i = 0; i < k; ++i) {
        const double lo = static_cast<double>(i) / static_cast<double>(k);
        const double hi = static_cast<double>(i + 1) / static_cast<double>(k);
        const Matrix ind = indicator_interval(draws, lo, hi);
        if (detail::indicator_constant(ind)) {
            EssResult res;
            res.flags.insert(Flag::DegenerateIndicator);
            out.push_back(std::move(res));
        } else {
            out.push_back(detail::ess_core_split(split_chains(ind), cap));
        }
    }
    return out;
}

// Legacy batch-means-style estimator M N var_plus / B; high variance,
// reported for comparison only.
inline EssResult ess_bda2(const Matrix& draws, bool cap = true) {
    const Matrix split = split_chains(draws);
    const auto vd = variance_decomposition(split);
    EssResult res;
    const auto s = static_cast<double>(split.total());
    const double bound = s * std::log10(s);
    if (!(vd.var_plus > 0.0)) {
        res.flags.insert(Flag::ConstantParameter);
        return res;
    }
    res.ess = vd.between > 0.0 ? s * vd.var_plus / vd.between
                               : std::numeric_limits<double>::infinity();
    if (cap && res.ess > bound) {
        res.ess = bound;
        res.capped = true;
        res.flags.insert(Flag::EssCapped);
    }
    return res;
}

struct EssEvolutionPoint {
    std::size_t prefix = 0;  // total draws S in the prefix (all chains)
    double bulk = nan_value;
    double tail = nan_value;
};

// Bulk and tail ESS recomputed on initial subsequences of each chain.
inline std::vector<EssEvolutionPoint> ess_evolution(
    const Matrix& draws, std::span<const std::size_t> grid,
    std::pair<double, double> tail_quantiles = {0.05, 0.95}, bool cap = true) {
    std::vector<EssEvolutionPoint> out;
    out.reserve(grid.size());
    for (std::size_t len : grid) {
        if (len < 4 || len > draws.iters)
            throw std::invalid_argument("ess_evolution: prefix length out of range");
        Matrix prefix(draws.chains, len);
        for (std::size_t m = 0; m < draws.chains; ++m)
            for (std::size_t n = 0; n < len; ++n) prefix.at(m, n) = draws.at(m, n);
        EssEvolutionPoint pt;
        pt.prefix = prefix.total();
        pt.bulk = ess_bulk(prefix, cap).ess;
        pt.tail = ess_tail(prefix, tail_quantiles, cap).ess;
        out.push_back(pt);
    }
    return out;
}

}  // namespace mcdiag
