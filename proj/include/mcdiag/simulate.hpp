#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "mcdiag/chain_core.hpp"
#include "mcdiag/ess.hpp"
#include "mcdiag/math/normal.hpp"
#include "mcdiag/rhat.hpp"

namespace mcdiag {

// splitmix64-based counter generator. Substreams are derived by mixing
// (seed, replication, chain) through the same finalizer, so replications
// and chains are order-independent and bit-reproducible.
class Rng {
public:
    explicit Rng(std::uint64_t seed) : state_(seed) {}

    static std::uint64_t derive(std::uint64_t seed, std::uint64_t replication,
                                std::uint64_t chain) {
        std::uint64_t x = mix(seed ^ 0x9e3779b97f4a7c15ULL);
        x = mix(x ^ (replication * 0xbf58476d1ce4e5b9ULL));
        x = mix(x ^ (chain * 0x94d049bb133111ebULL));
        return x;
    }

    std::uint64_t next() {
        state_ += 0x9e3779b97f4a7c15ULL;
        return mix(state_);
    }

    // uniform in (0, 1), never exactly 0 or 1
    double uniform() {
        const double u = (static_cast<double>(next() >> 11) + 0.5) * 0x1.0p-53;
        return u;
    }

    double normal() { return normal_quantile(uniform()); }

private:
    static std::uint64_t mix(std::uint64_t z) {
        z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
        z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
        return z ^ (z >> 31);
    }
    std::uint64_t state_;
};

enum class Process { IidNormal, Ar1, CauchyRatio };
enum class ManipulationKind { None, Trend, Shift, Scale };

struct Manipulation {
    ManipulationKind kind = ManipulationKind::None;
    double value = 0.0;        // trend variance fraction / shift delta / scale factor
    std::size_t chain_index = 0;  // for Shift and Scale
};

struct ScenarioSpec {
    Process process = Process::IidNormal;
    double rho = 0.0;
    Manipulation manipulation;
    std::size_t chains = 4;
    std::size_t iterations = 1000;
    std::size_t replications = 200;
    std::uint64_t seed = 0;

    void check() const {
        if (!(std::fabs(rho) < 1.0)) throw std::invalid_argument("ScenarioSpec: need |rho| < 1");
        if (manipulation.kind == ManipulationKind::Scale && !(manipulation.value > 0.0))
            throw std::invalid_argument("ScenarioSpec: scale factor must be positive");
        if ((manipulation.kind == ManipulationKind::Shift ||
             manipulation.kind == ManipulationKind::Scale) &&
            manipulation.chain_index >= chains)
            throw std::invalid_argument("ScenarioSpec: chain index out of range");
        if (replications < 1 || chains < 1 || iterations < 4)
            throw std::invalid_argument("ScenarioSpec: degenerate sizes");
    }
};

// Stationary AR(1): x0 from N(0, 1/(1-rho^2)), x_n = rho x_{n-1} + eps_n.
inline std::vector<double> gen_ar1(double rho, std::size_t n, Rng& rng) {
    if (!(std::fabs(rho) < 1.0)) throw std::invalid_argument("gen_ar1: need |rho| < 1");
    std::vector<double> x(n);
    double prev = rng.normal() / std::sqrt(1.0 - rho * rho);
    for (std::size_t i = 0; i < n; ++i) {
        x[i] = (i == 0) ? prev : rho * prev + rng.normal();
        prev = x[i];
    }
    return x;
}

// Ratio of two independent stationary AR(1) chains; the marginal is
// standard Cauchy. An exactly-zero denominator draw is regenerated.
inline std::vector<double> gen_cauchy_ratio(double rho, std::size_t n, Rng& rng) {
    const auto u = gen_ar1(rho, n, rng);
    auto v = gen_ar1(rho, n, rng);
    std::vector<double> x(n);
    for (std::size_t i = 0; i < n; ++i) {
        while (v[i] == 0.0) v[i] = rng.normal();
        x[i] = u[i] / v[i];
    }
    return x;
}

// Trend coefficient c such that c^2 Var(1..N) is `fraction` of the total
// marginal variance c^2 Var(1..N) + 1 of a unit-variance chain.
inline double trend_coefficient(double fraction, std::size_t n) {
    if (!(fraction >= 0.0 && fraction < 1.0))
        throw std::invalid_argument("trend_coefficient: fraction must lie in [0,1)");
    const auto nd = static_cast<double>(n);
    const double var_s = (nd * nd - 1.0) / 12.0;
    return std::sqrt(fraction / (1.0 - fraction) / var_s);
}

inline void apply_manipulation(Matrix& chains, const Manipulation& manip) {
    switch (manip.kind) {
        case ManipulationKind::None:
            return;
        case ManipulationKind::Trend: {
            const double c = trend_coefficient(manip.value, chains.iters);
            for (std::size_t m = 0; m < chains.chains; ++m)
                for (std::size_t n = 0; n < chains.iters; ++n)
                    chains.at(m, n) += c * static_cast<double>(n + 1);
            return;
        }
        case ManipulationKind::Shift: {
            for (std::size_t n = 0; n < chains.iters; ++n)
                chains.at(manip.chain_index, n) += manip.value;
            return;
        }
        case ManipulationKind::Scale: {
            // deviations from the chain's own sample mean are scaled
            double mean = 0.0;
            for (std::size_t n = 0; n < chains.iters; ++n) mean += chains.at(manip.chain_index, n);
            mean /= static_cast<double>(chains.iters);
            for (std::size_t n = 0; n < chains.iters; ++n) {
                double& v = chains.at(manip.chain_index, n);
                v = mean + (v - mean) * manip.value;
            }
            return;
        }
    }
}

inline Matrix generate_chains(const ScenarioSpec& spec, std::size_t replication) {
    Matrix out(spec.chains, spec.iterations);
    for (std::size_t m = 0; m < spec.chains; ++m) {
        Rng rng(Rng::derive(spec.seed, replication, m));
        std::vector<double> chain;
        switch (spec.process) {
            case Process::IidNormal: chain = gen_ar1(0.0, spec.iterations, rng); break;
            case Process::Ar1: chain = gen_ar1(spec.rho, spec.iterations, rng); break;
            case Process::CauchyRatio: chain = gen_cauchy_ratio(spec.rho, spec.iterations, rng); break;
        }
        for (std::size_t n = 0; n < spec.iterations; ++n) out.at(m, n) = chain[n];
    }
    apply_manipulation(out, spec.manipulation);
    return out;
}

struct ReplicationRecord {
    std::size_t replication = 0;
    double rhat_classic = nan_value;
    double rhat_rank = nan_value;
    double rhat_folded = nan_value;
    double rhat_max = nan_value;
    double rhat_unsplit = nan_value;
    double ess_bulk = nan_value;
    double ess_tail = nan_value;
    double ess_mean = nan_value;
    FlagSet flags;
};

struct SweepResult {
    ScenarioSpec spec;
    std::vector<ReplicationRecord> records;
};

inline SweepResult run_sweep(const ScenarioSpec& spec) {
    spec.check();
    SweepResult out;
    out.spec = spec;
    out.records.reserve(spec.replications);
    for (std::size_t r = 0; r < spec.replications; ++r) {
        const Matrix draws = generate_chains(spec, r);
        ReplicationRecord rec;
        rec.replication = r;
        rec.rhat_classic = split_rhat(draws);
        rec.rhat_rank = rank_normalized_split_rhat(draws);
        rec.rhat_folded = folded_split_rhat(draws);
        if (!std::isnan(rec.rhat_rank) && !std::isnan(rec.rhat_folded))
            rec.rhat_max = std::max(rec.rhat_rank, rec.rhat_folded);
        if (spec.chains >= 2) rec.rhat_unsplit = unsplit_rhat(draws);
        EssResult bulk = ess_bulk(draws);
        EssResult tail = ess_tail(draws);
        EssResult mean = ess_mean(draws);
        rec.ess_bulk = bulk.ess;
        rec.ess_tail = tail.ess;
        rec.ess_mean = mean.ess;
        for (const auto* res : {&bulk, &tail, &mean})
            rec.flags.insert(res->flags.begin(), res->flags.end());
        out.records.push_back(std::move(rec));
    }
    return out;
}

// Median of a diagnostic over the replications of a sweep.
inline double sweep_median(const SweepResult& sweep, double ReplicationRecord::*field) {
    std::vector<double> vals;
    vals.reserve(sweep.records.size());
    for (const auto& r : sweep.records) vals.push_back(r.*field);
    std::sort(vals.begin(), vals.end());
    return empirical_quantile_sorted(vals, 0.5);
}

}  // namespace mcdiag
