// Acceptance gate: one test case per release criterion, each printing a
// single [PASS]/[FAIL] line. Tolerances are fixed here, not configurable.

#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <string>
#include <vector>

#include "mcdiag/mcdiag.hpp"

using namespace mcdiag;
namespace fs = std::filesystem;

namespace {

bool report(int criterion, const std::string& description, bool ok) {
    std::printf("[%s] criterion %02d: %s\n", ok ? "PASS" : "FAIL", criterion,
                description.c_str());
    std::fflush(stdout);
    return ok;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return empirical_quantile_sorted(v, 0.5);
}

Matrix iid_normal(std::size_t chains, std::size_t iters, std::uint64_t seed,
                  std::uint64_t replication = 0) {
    Matrix m(chains, iters);
    for (std::size_t c = 0; c < chains; ++c) {
        Rng rng(Rng::derive(seed, replication, c));
        for (std::size_t n = 0; n < iters; ++n) m.at(c, n) = rng.normal();
    }
    return m;
}

std::vector<double> naive_autocov(const std::vector<double>& chain) {
    const std::size_t n = chain.size();
    const double mean =
        std::accumulate(chain.begin(), chain.end(), 0.0) / static_cast<double>(n);
    std::vector<double> acov(n, 0.0);
    for (std::size_t t = 0; t < n; ++t) {
        double sum = 0.0;
        for (std::size_t i = 0; i + t < n; ++i) sum += (chain[i] - mean) * (chain[i + t] - mean);
        acov[t] = sum / static_cast<double>(n);
    }
    return acov;
}

}  // namespace

TEST_CASE("scale-defect scenario: classic misses, rhat_max detects", "[c01]") {
    ScenarioSpec spec;
    spec.process = Process::Ar1;
    spec.rho = 0.3;
    spec.chains = 4;
    spec.iterations = 1000;
    spec.replications = 200;
    spec.seed = 101;
    spec.manipulation = {ManipulationKind::Scale, 1.0 / std::sqrt(3.0), 0};
    const SweepResult sweep = run_sweep(spec);
    const double classic = sweep_median(sweep, &ReplicationRecord::rhat_classic);
    const double rmax = sweep_median(sweep, &ReplicationRecord::rhat_max);
    const bool ok = classic < 1.01 && rmax > 1.01;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "AR(1) chain at 1/3 variance: median classic=%.4f (<1.01), rhat_max=%.4f (>1.01)",
                  classic, rmax);
    CHECK(report(1, buf, ok));
}

TEST_CASE("shifted Cauchy scenario: classic near 1, rhat_max detects", "[c02]") {
    ScenarioSpec spec;
    spec.process = Process::CauchyRatio;
    spec.rho = 0.3;
    spec.chains = 4;
    spec.iterations = 1000;
    spec.replications = 200;
    spec.seed = 102;
    spec.manipulation = {ManipulationKind::Shift, 2.0, 0};
    const SweepResult sweep = run_sweep(spec);
    const double classic = sweep_median(sweep, &ReplicationRecord::rhat_classic);
    const double rmax = sweep_median(sweep, &ReplicationRecord::rhat_max);
    const bool ok = classic < 1.05 && rmax > 1.01;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "Cauchy chain shifted +2: median classic=%.4f (<1.05), rhat_max=%.4f (>1.01)",
                  classic, rmax);
    CHECK(report(2, buf, ok));
}

TEST_CASE("nominal scenarios: both rhat variants stay below 1.02", "[c03]") {
    std::size_t good = 0, total = 0;
    for (Process proc : {Process::Ar1, Process::CauchyRatio}) {
        ScenarioSpec spec;
        spec.process = proc;
        spec.rho = 0.3;
        spec.chains = 4;
        spec.iterations = 1000;
        spec.replications = 200;
        spec.seed = 103;
        const SweepResult sweep = run_sweep(spec);
        for (const auto& rec : sweep.records) {
            ++total;
            if (rec.rhat_classic < 1.02 && rec.rhat_max < 1.02) ++good;
        }
    }
    const double frac = static_cast<double>(good) / static_cast<double>(total);
    const bool ok = frac >= 0.95;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "no-defect AR(1)+Cauchy: %.1f%% of replications have both rhat < 1.02 (>=95%%)",
                  100.0 * frac);
    CHECK(report(3, buf, ok));
}

TEST_CASE("trend detection at the 2% variance fraction", "[c04]") {
    ScenarioSpec spec;
    spec.chains = 4;
    spec.iterations = 1000;
    spec.replications = 200;
    spec.seed = 104;
    spec.manipulation = {ManipulationKind::Trend, 0.02, 0};
    const SweepResult sweep = run_sweep(spec);
    const double rank = sweep_median(sweep, &ReplicationRecord::rhat_rank);
    const double unsplit = sweep_median(sweep, &ReplicationRecord::rhat_unsplit);
    const bool ok = rank > 1.01 && unsplit < 1.01;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "2%% trend: median split rank rhat=%.4f (>1.01), unsplit=%.4f (<1.01)", rank,
                  unsplit);
    CHECK(report(4, buf, ok));
}

TEST_CASE("shift detection at one third of a standard deviation", "[c05]") {
    ScenarioSpec spec;
    spec.chains = 4;
    spec.iterations = 1000;
    spec.replications = 200;
    spec.seed = 105;
    spec.manipulation = {ManipulationKind::Shift, 1.0 / 3.0, 0};
    const SweepResult sweep = run_sweep(spec);
    const double rank = sweep_median(sweep, &ReplicationRecord::rhat_rank);
    const bool ok = rank > 1.01;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "1/3 SD shift: median rank rhat=%.4f (>1.01)", rank);
    CHECK(report(5, buf, ok));
}

TEST_CASE("scale detection at three quarters of a standard deviation", "[c06]") {
    ScenarioSpec spec;
    spec.chains = 4;
    spec.iterations = 1000;
    spec.replications = 200;
    spec.seed = 106;
    spec.manipulation = {ManipulationKind::Scale, 0.75, 0};
    const SweepResult sweep = run_sweep(spec);
    const double folded = sweep_median(sweep, &ReplicationRecord::rhat_folded);
    const double rank = sweep_median(sweep, &ReplicationRecord::rhat_rank);
    const bool ok = folded > 1.01 && rank < 1.01;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "3/4 SD chain: median folded rhat=%.4f (>1.01), rank rhat=%.4f (<1.01)", folded,
                  rank);
    CHECK(report(6, buf, ok));
}

TEST_CASE("ESS calibration on iid and AR(1) draws", "[c07]") {
    std::vector<double> iid_ess, ar1_ess;
    for (std::uint64_t r = 0; r < 200; ++r)
        iid_ess.push_back(ess_mean(iid_normal(4, 1000, 107, r)).ess);
    ScenarioSpec spec;
    spec.process = Process::Ar1;
    spec.rho = 0.3;
    spec.chains = 4;
    spec.iterations = 1000;
    spec.replications = 200;
    spec.seed = 1070;
    const SweepResult sweep = run_sweep(spec);
    for (const auto& rec : sweep.records) ar1_ess.push_back(rec.ess_mean);

    const double iid_med = median_of(iid_ess);
    const double ar1_med = median_of(ar1_ess);
    const double ar1_expected = 4000.0 * 0.7 / 1.3;
    const bool ok = std::fabs(iid_med - 4000.0) <= 0.15 * 4000.0 &&
                    std::fabs(ar1_med - ar1_expected) <= 0.15 * ar1_expected;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "median ess_mean: iid=%.0f (4000 +-15%%), AR(1) rho=0.3: %.0f (%.0f +-15%%)",
                  iid_med, ar1_med, ar1_expected);
    CHECK(report(7, buf, ok));
}

TEST_CASE("FFT autocovariance equals the naive estimator", "[c08]") {
    bool ok = true;
    double worst = 0.0;
    std::size_t checked = 0;
    for (std::size_t n : {7u, 64u, 1000u, 4097u}) {
        for (std::uint64_t r = 0; r < 25; ++r) {
            Rng rng(Rng::derive(108, r, n));
            std::vector<double> chain(n);
            for (auto& v : chain) v = rng.normal();
            const auto fast = autocovariance_fft(chain);
            const auto slow = naive_autocov(chain);
            ++checked;
            for (std::size_t t = 0; t < n; ++t) {
                const double rel = std::fabs(fast[t] - slow[t]) / slow[0];
                worst = std::max(worst, rel);
                if (rel > 1e-10) ok = false;
            }
        }
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "FFT vs naive autocovariance on %zu chains: worst rel err %.2e (<=1e-10)",
                  checked, worst);
    CHECK(report(8, buf, ok));
}

TEST_CASE("rank diagnostics bit-identical under monotone transforms", "[c09]") {
    bool rank_ok = true, fold_ok = true, bulk_ok = true, tail_ok = true;
    for (std::uint64_t r = 0; r < 50; ++r) {
        const Matrix m = iid_normal(4, 200, 109, r);
        Matrix expd(4, 200), cubed(4, 200);
        for (std::size_t i = 0; i < m.values.size(); ++i) {
            expd.values[i] = std::exp(m.values[i]);
            cubed.values[i] = m.values[i] * m.values[i] * m.values[i];
        }
        for (const Matrix* t : {&expd, &cubed}) {
            rank_ok = rank_ok && rank_normalized_split_rhat(m) == rank_normalized_split_rhat(*t);
            fold_ok = fold_ok && folded_split_rhat(m) == folded_split_rhat(*t);
            bulk_ok = bulk_ok && ess_bulk(m).ess == ess_bulk(*t).ess;
            tail_ok = tail_ok && ess_tail(m).ess == ess_tail(*t).ess;
        }
    }
    const bool ok = rank_ok && fold_ok && bulk_ok && tail_ok;
    char buf[200];
    std::snprintf(buf, sizeof(buf),
                  "bit-identical under exp and cube on 50 inputs: rhat_rank=%s rhat_folded=%s "
                  "ess_bulk=%s ess_tail=%s",
                  rank_ok ? "yes" : "NO", fold_ok ? "yes" : "NO", bulk_ok ? "yes" : "NO",
                  tail_ok ? "yes" : "NO");
    CHECK(report(9, buf, ok));
}

TEST_CASE("ESS cap on antithetic chains", "[c10]") {
    bool ok = true;
    double max_ratio = 0.0;
    for (std::uint64_t r = 0; r < 100; ++r) {
        Matrix m(4, 1000);
        for (std::size_t c = 0; c < 4; ++c) {
            Rng rng(Rng::derive(110, r, c));
            const auto chain = gen_ar1(-0.9, 1000, rng);
            for (std::size_t n = 0; n < 1000; ++n) m.at(c, n) = chain[n];
        }
        const double ess = ess_mean(m).ess;
        const double bound = 4000.0 * std::log10(4000.0);
        max_ratio = std::max(max_ratio, ess / bound);
        if (ess > bound + 1e-9) ok = false;
    }
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "AR(1) rho=-0.9 chains: max ESS/(S log10 S) = %.3f over 100 replications (<=1)",
                  max_ratio);
    CHECK(report(10, buf, ok));
}

TEST_CASE("quantile MCSE interval coverage", "[c11]") {
    std::size_t covered = 0;
    const std::size_t reps = 1000;
    for (std::uint64_t r = 0; r < reps; ++r) {
        const Matrix m = iid_normal(4, 250, 111, r);
        const QuantileMcse q = mcse_quantile(m, 0.5, 0.90);
        if (q.interval_lo <= 0.0 && 0.0 <= q.interval_hi) ++covered;
    }
    const double frac = static_cast<double>(covered) / static_cast<double>(reps);
    const bool ok = std::fabs(frac - 0.90) <= 0.04;
    char buf[160];
    std::snprintf(buf, sizeof(buf),
                  "90%% interval for the normal median covers 0 in %.1f%% of %zu replications (90 +-4)",
                  100.0 * frac, reps);
    CHECK(report(11, buf, ok));
}

TEST_CASE("tail ESS below bulk ESS for Cauchy draws", "[c12]") {
    ScenarioSpec spec;
    spec.process = Process::CauchyRatio;
    spec.rho = 0.3;
    spec.chains = 4;
    spec.iterations = 1000;
    spec.replications = 100;
    spec.seed = 112;
    const SweepResult sweep = run_sweep(spec);
    const double tail = sweep_median(sweep, &ReplicationRecord::ess_tail);
    const double bulk = sweep_median(sweep, &ReplicationRecord::ess_bulk);
    const bool ok = tail < bulk;
    char buf[160];
    std::snprintf(buf, sizeof(buf), "Cauchy nominal: median ess_tail=%.0f < ess_bulk=%.0f", tail,
                  bulk);
    CHECK(report(12, buf, ok));
}

TEST_CASE("CLI diagnoses externally supplied draws", "[c13]") {
    const fs::path fixture = fs::path(MCDIAG_FIXTURE_DIR) / "funnel.csv";
    const fs::path report_path = fs::temp_directory_path() / "mcdiag_acceptance_c13.json";
    const std::string cmd = std::string(MCDIAG_CLI_PATH) + " diagnose --json --out " +
                            report_path.string() + " " + fixture.string() + " 2> /dev/null";
    const int raw = std::system(cmd.c_str());
    const int code = (raw == -1) ? -1 : WEXITSTATUS(raw);

    bool ok = (code == 0 || code == 3);  // gate may trip on the slow-mixing fixture
    std::string detail = "exit " + std::to_string(code);
    if (ok) {
        std::ifstream in(report_path);
        std::stringstream ss;
        ss << in.rdbuf();
        try {
            const auto j = nlohmann::json::parse(ss.str());
            ok = j["parameters"].size() == 2 && j["parameters"][0]["rhat_max"].is_number();
            detail += ", report has " + std::to_string(j["parameters"].size()) + " parameters";
        } catch (const std::exception&) {
            ok = false;
            detail += ", report is not valid JSON";
        }
    }
    CHECK(report(13, "CLI smoke test on the bundled funnel-like fixture (" + detail + ")", ok));
}
