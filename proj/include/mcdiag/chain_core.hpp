#pragma once

#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <set>
#include <span>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace mcdiag {

inline constexpr double nan_value = std::numeric_limits<double>::quiet_NaN();

// Draws of a single scalar parameter, chain-major: values[m * iters + n].
// Immutable by convention once built; every diagnostic is a pure function
// of one of these.
struct Matrix {
    std::size_t chains = 0;
    std::size_t iters = 0;
    std::vector<double> values;

    Matrix() = default;
    Matrix(std::size_t m, std::size_t n) : chains(m), iters(n), values(m * n, 0.0) {}

    double& at(std::size_t m, std::size_t n) { return values[m * iters + n]; }
    double at(std::size_t m, std::size_t n) const { return values[m * iters + n]; }
    std::span<const double> chain(std::size_t m) const {
        return std::span<const double>(values).subspan(m * iters, iters);
    }
    std::size_t total() const { return chains * iters; }
};

// Post-warmup draws: M chains x N iterations x P parameters.
struct DrawsMatrix {
    std::vector<std::string> parameter_names;
    std::vector<Matrix> parameters;  // one Matrix per parameter, equal shapes

    std::size_t chains() const { return parameters.empty() ? 0 : parameters.front().chains; }
    std::size_t iterations() const { return parameters.empty() ? 0 : parameters.front().iters; }
    std::size_t parameter_count() const { return parameters.size(); }

    void check() const {
        if (parameters.empty() || parameter_names.size() != parameters.size())
            throw std::invalid_argument("DrawsMatrix: need one name per parameter");
        std::set<std::string> seen;
        for (const auto& n : parameter_names)
            if (!seen.insert(n).second)
                throw std::invalid_argument("DrawsMatrix: duplicate parameter name '" + n + "'");
        const std::size_t m = parameters.front().chains;
        const std::size_t n = parameters.front().iters;
        if (m < 1 || n < 1) throw std::invalid_argument("DrawsMatrix: empty chains");
        for (const auto& p : parameters)
            if (p.chains != m || p.iters != n)
                throw std::invalid_argument("DrawsMatrix: ragged parameter shapes");
    }
};

struct DiagnosticConfig {
    double rhat_threshold = 1.01;
    double ess_threshold = 400.0;
    double min_ess_per_split_chain = 50.0;
    std::pair<double, double> tail_quantiles = {0.05, 0.95};
    std::size_t small_interval_count = 20;
    std::pair<double, double> mcse_sd_quantiles = {0.16, 0.84};
    bool ess_cap_enabled = true;

    void check() const {
        if (!(rhat_threshold > 1.0))
            throw std::invalid_argument("DiagnosticConfig: rhat_threshold must exceed 1");
        if (!(tail_quantiles.first > 0.0 && tail_quantiles.first < tail_quantiles.second &&
              tail_quantiles.second < 1.0))
            throw std::invalid_argument("DiagnosticConfig: tail quantiles must satisfy 0 < lo < hi < 1");
        if (small_interval_count < 2)
            throw std::invalid_argument("DiagnosticConfig: small_interval_count must be >= 2");
    }
};

enum class Flag {
    ConstantParameter,
    WarnFewChains,
    InsufficientEssForRhat,
    DegenerateIndicator,
    TailUnstable,
    EssCapped,
    NonFinite,
};

inline const char* to_string(Flag f) {
    switch (f) {
        case Flag::ConstantParameter: return "CONSTANT_PARAMETER";
        case Flag::WarnFewChains: return "WARN_FEW_CHAINS";
        case Flag::InsufficientEssForRhat: return "INSUFFICIENT_ESS_FOR_RHAT";
        case Flag::DegenerateIndicator: return "DEGENERATE_INDICATOR";
        case Flag::TailUnstable: return "TAIL_UNSTABLE";
        case Flag::EssCapped: return "ESS_CAPPED";
        case Flag::NonFinite: return "NON_FINITE";
    }
    return "UNKNOWN";
}

using FlagSet = std::set<Flag>;

// Per-parameter scalar diagnostics bundle.
struct ChainStat {
    double rhat_classic = nan_value;
    double rhat_rank = nan_value;
    double rhat_folded = nan_value;
    double rhat_max = nan_value;
    double rhat_unsplit = nan_value;
    double ess_bulk = nan_value;
    double ess_tail = nan_value;
    double ess_median = nan_value;
    double ess_mad = nan_value;
    double ess_mean_classic = nan_value;
    double ess_bda2 = nan_value;
    double mcse_mean = nan_value;
    double mcse_median = nan_value;
    std::map<double, double> quantile_estimates;
    FlagSet reliability_flags;
};

struct DiagnosticsReport {
    std::vector<std::string> parameter_names;
    std::vector<ChainStat> stats;  // exactly one per parameter
    std::size_t chains = 0;
    std::size_t iterations = 0;
    DiagnosticConfig config;
    std::string timestamp;
    std::string tool_version;
};

}  // namespace mcdiag
