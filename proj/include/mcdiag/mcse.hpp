#pragma once

#include <algorithm>
#include <cmath>
#include <vector>

#include "mcdiag/chain_core.hpp"
#include "mcdiag/ess.hpp"
#include "mcdiag/math/beta.hpp"

namespace mcdiag {

// MCSE of the posterior mean: sqrt(var_plus / ESS) on the split chains.
inline double mcse_mean(const Matrix& draws, bool cap = true) {
    const auto vd = variance_decomposition(split_chains(draws));
    if (!(vd.var_plus > 0.0)) return nan_value;
    const EssResult ess = ess_mean(draws, cap);
    if (std::isnan(ess.ess) || !(ess.ess > 0.0)) return nan_value;
    return std::sqrt(vd.var_plus / ess.ess);
}

struct QuantileMcse {
    double alpha = nan_value;
    double point = nan_value;              // empirical alpha-quantile
    double interval_lo = nan_value;        // A-hat at requested coverage
    double interval_hi = nan_value;        // B-hat at requested coverage
    double interval_coverage = nan_value;
    double mcse = nan_value;               // (B16 - A84)/2 pair, see below
    double ess_used = nan_value;
    FlagSet flags;
};

namespace detail {

// Map a beta-quantile probability back through the sorted draws.
// Lower endpoint: theta^(s') with s' <= S a < s'+1 (1-based); upper:
// theta^(s'') with s''-1 < S b <= s''. Escaping indices clamp to the
// extreme order statistics and raise TAIL_UNSTABLE.
inline double order_stat_lower(const std::vector<double>& sorted, double a, FlagSet& flags) {
    const auto s = static_cast<double>(sorted.size());
    double idx = std::floor(s * a);  // 1-based s'
    if (idx < 1.0) {
        flags.insert(Flag::TailUnstable);
        idx = 1.0;
    }
    if (idx > s) idx = s;
    return sorted[static_cast<std::size_t>(idx) - 1];
}

inline double order_stat_upper(const std::vector<double>& sorted, double b, FlagSet& flags) {
    const auto s = static_cast<double>(sorted.size());
    double idx = std::ceil(s * b);  // 1-based s''
    if (idx > s) {
        flags.insert(Flag::TailUnstable);
        idx = s;
    }
    if (idx < 1.0) idx = 1.0;
    return sorted[static_cast<std::size_t>(idx) - 1];
}

}  // namespace detail

// Monte Carlo error interval and standard error for the alpha-quantile.
// Step 1: indicator ESS at the alpha threshold. Step 2: beta quantiles
// Beta(S_eff a + 1, S_eff (1-a) + 1) at the interval's coverage. Step 3:
// read the endpoints off the sorted pooled draws. The mcse field always
// uses the 16%/84% pair regardless of the requested interval coverage.
inline QuantileMcse mcse_quantile(const Matrix& draws, double alpha, double coverage = 0.90,
                                  std::pair<double, double> sd_quantiles = {0.16, 0.84},
                                  bool cap = true) {
    if (!(alpha > 0.0 && alpha < 1.0))
        throw std::invalid_argument("mcse_quantile: alpha must lie in (0,1)");
    if (!(coverage > 0.0 && coverage < 1.0))
        throw std::invalid_argument("mcse_quantile: coverage must lie in (0,1)");

    QuantileMcse out;
    out.alpha = alpha;
    out.interval_coverage = coverage;

    std::vector<double> sorted(draws.values);
    std::sort(sorted.begin(), sorted.end());
    out.point = empirical_quantile_sorted(sorted, alpha);

    const EssResult ess = ess_quantile(draws, alpha, cap);
    out.flags = ess.flags;
    out.ess_used = ess.ess;
    if (std::isnan(ess.ess)) return out;  // degenerate indicator: NaN propagates

    const double shape_a = ess.ess * alpha + 1.0;
    const double shape_b = ess.ess * (1.0 - alpha) + 1.0;

    const double lo_p = (1.0 - coverage) / 2.0;
    const double hi_p = 1.0 - lo_p;
    out.interval_lo =
        detail::order_stat_lower(sorted, beta_quantile(lo_p, shape_a, shape_b), out.flags);
    out.interval_hi =
        detail::order_stat_upper(sorted, beta_quantile(hi_p, shape_a, shape_b), out.flags);

    const double a16 =
        detail::order_stat_lower(sorted, beta_quantile(sd_quantiles.first, shape_a, shape_b), out.flags);
    const double b84 =
        detail::order_stat_upper(sorted, beta_quantile(sd_quantiles.second, shape_a, shape_b), out.flags);
    out.mcse = (b84 - a16) / 2.0;
    return out;
}

}  // namespace mcdiag
