#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>
#include <vector>

#include "mcdiag/chain_core.hpp"
#include "mcdiag/ess.hpp"
#include "mcdiag/mcse.hpp"
#include "mcdiag/rhat.hpp"
#include "mcdiag/transforms.hpp"
#include "mcdiag/version.hpp"

namespace mcdiag {

namespace detail {

inline bool is_constant(const Matrix& m) {
    const double first = m.values.front();
    return std::all_of(m.values.begin(), m.values.end(),
                       [first](double v) { return v == first; });
}

}  // namespace detail

// Pure reliability screen: per-parameter flags plus chain-count warning.
// N < 4 is a hard error (cannot split and form within-half variances).
inline std::vector<FlagSet> validate(const DrawsMatrix& draws, const DiagnosticConfig& config) {
    draws.check();
    config.check();
    if (draws.iterations() < 4)
        throw std::invalid_argument("validate: need at least 4 iterations per chain");

    std::vector<FlagSet> flags(draws.parameter_count());
    for (std::size_t p = 0; p < draws.parameter_count(); ++p) {
        const Matrix& m = draws.parameters[p];
        if (draws.chains() < 4) flags[p].insert(Flag::WarnFewChains);
        if (detail::is_constant(m)) {
            flags[p].insert(Flag::ConstantParameter);
            continue;
        }
        const EssResult bulk = ess_bulk(m, config.ess_cap_enabled);
        const auto split_count = static_cast<double>(2 * draws.chains());
        if (std::isnan(bulk.ess) || bulk.ess / split_count < config.min_ess_per_split_chain)
            flags[p].insert(Flag::InsufficientEssForRhat);
    }
    return flags;
}

// Full diagnostics bundle for one parameter.
inline ChainStat analyze_parameter(const Matrix& draws, const DiagnosticConfig& config) {
    ChainStat st;
    const bool cap = config.ess_cap_enabled;

    if (detail::is_constant(draws)) {
        st.reliability_flags.insert(Flag::ConstantParameter);
        return st;
    }

    st.rhat_classic = split_rhat(draws);
    st.rhat_rank = rank_normalized_split_rhat(draws);
    st.rhat_folded = folded_split_rhat(draws);
    if (!std::isnan(st.rhat_rank) && !std::isnan(st.rhat_folded))
        st.rhat_max = std::max(st.rhat_rank, st.rhat_folded);

    auto merge = [&st](const EssResult& r) {
        st.reliability_flags.insert(r.flags.begin(), r.flags.end());
        return r.ess;
    };
    st.ess_bulk = merge(ess_bulk(draws, cap));
    st.ess_tail = merge(ess_tail(draws, config.tail_quantiles, cap));
    st.ess_median = merge(ess_median(draws, cap));
    st.ess_mad = merge(ess_mad(draws, cap));
    st.ess_mean_classic = merge(ess_mean(draws, cap));
    st.ess_bda2 = merge(ess_bda2(draws, cap));

    st.mcse_mean = mcse_mean(draws, cap);
    const QuantileMcse med = mcse_quantile(draws, 0.5, 0.90, config.mcse_sd_quantiles, cap);
    st.mcse_median = med.mcse;
    st.reliability_flags.insert(med.flags.begin(), med.flags.end());

    std::vector<double> sorted(draws.values);
    std::sort(sorted.begin(), sorted.end());
    for (double q : {config.tail_quantiles.first, 0.25, 0.5, 0.75, config.tail_quantiles.second})
        st.quantile_estimates[q] = empirical_quantile_sorted(sorted, q);

    const auto split_count = static_cast<double>(2 * draws.chains);
    if (std::isnan(st.ess_bulk) || st.ess_bulk / split_count < config.min_ess_per_split_chain)
        st.reliability_flags.insert(Flag::InsufficientEssForRhat);
    return st;
}

// Per-parameter computations are pure, so they may run on several
// threads; output order stays the input parameter order.
inline DiagnosticsReport analyze(const DrawsMatrix& draws, const DiagnosticConfig& config = {},
                                 std::size_t threads = 1) {
    draws.check();
    config.check();
    if (draws.iterations() < 4)
        throw std::invalid_argument("analyze: need at least 4 iterations per chain");

    DiagnosticsReport report;
    report.parameter_names = draws.parameter_names;
    report.chains = draws.chains();
    report.iterations = draws.iterations();
    report.config = config;
    report.tool_version = version_string;
    report.stats.resize(draws.parameter_count());

    const std::size_t n_params = draws.parameter_count();
    auto work = [&](std::size_t begin, std::size_t step) {
        for (std::size_t p = begin; p < n_params; p += step) {
            ChainStat st = analyze_parameter(draws.parameters[p], config);
            if (draws.chains() < 4) st.reliability_flags.insert(Flag::WarnFewChains);
            report.stats[p] = std::move(st);
        }
    };
    if (threads <= 1 || n_params <= 1) {
        work(0, 1);
    } else {
        const std::size_t n_threads = std::min(threads, n_params);
        std::vector<std::thread> pool;
        pool.reserve(n_threads);
        for (std::size_t t = 0; t < n_threads; ++t) pool.emplace_back(work, t, n_threads);
        for (auto& th : pool) th.join();
    }
    return report;
}

}  // namespace mcdiag
