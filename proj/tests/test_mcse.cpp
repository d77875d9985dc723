#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>

#include "mcdiag/mcse.hpp"
#include "mcdiag/simulate.hpp"

using namespace mcdiag;

namespace {

Matrix iid_normal(std::size_t chains, std::size_t iters, std::uint64_t seed) {
    Matrix m(chains, iters);
    for (std::size_t c = 0; c < chains; ++c) {
        Rng rng(Rng::derive(seed, 0, c));
        for (std::size_t n = 0; n < iters; ++n) m.at(c, n) = rng.normal();
    }
    return m;
}

Matrix iid_uniform(std::size_t chains, std::size_t iters, std::uint64_t seed) {
    Matrix m(chains, iters);
    for (std::size_t c = 0; c < chains; ++c) {
        Rng rng(Rng::derive(seed, 0, c));
        for (std::size_t n = 0; n < iters; ++n) m.at(c, n) = rng.uniform();
    }
    return m;
}

double median_of(std::vector<double> v) {
    std::sort(v.begin(), v.end());
    return empirical_quantile_sorted(v, 0.5);
}

}  // namespace

TEST_CASE("mcse_mean: iid normal calibration, sd/sqrt(S)") {
    std::vector<double> vals;
    for (std::uint64_t r = 0; r < 100; ++r) vals.push_back(mcse_mean(iid_normal(4, 1000, r)));
    CHECK(median_of(vals) == Catch::Approx(1.0 / std::sqrt(4000.0)).epsilon(0.15));
}

TEST_CASE("mcse_mean: AR(1) with rho = 0.9 inflates by about sqrt(19)") {
    // marginal variance 1/(1-rho^2), autocorrelation time (1+rho)/(1-rho)
    const double rho = 0.9;
    std::vector<double> vals;
    for (std::uint64_t r = 0; r < 60; ++r) {
        Matrix m(4, 2000);
        for (std::size_t c = 0; c < 4; ++c) {
            Rng rng(Rng::derive(99, r, c));
            const auto chain = gen_ar1(rho, 2000, rng);
            for (std::size_t n = 0; n < 2000; ++n) m.at(c, n) = chain[n];
        }
        vals.push_back(mcse_mean(m));
    }
    const double expected =
        std::sqrt((1.0 / (1.0 - rho * rho)) * ((1.0 + rho) / (1.0 - rho)) / 8000.0);
    CHECK(median_of(vals) == Catch::Approx(expected).epsilon(0.20));
}

TEST_CASE("mcse_mean: scales linearly with the data") {
    const Matrix m = iid_normal(4, 500, 12);
    Matrix scaled(4, 500);
    for (std::size_t i = 0; i < m.values.size(); ++i) scaled.values[i] = -3.0 * m.values[i];
    const double a = mcse_mean(m);
    const double b = mcse_mean(scaled);
    CHECK(b == Catch::Approx(3.0 * a).epsilon(1e-8));
}

TEST_CASE("mcse_mean: NaN on constant draws") {
    Matrix m(2, 10);
    std::fill(m.values.begin(), m.values.end(), 1.0);
    CHECK(std::isnan(mcse_mean(m)));
}

TEST_CASE("mcse_quantile: endpoints are order statistics bracketing the point estimate") {
    const Matrix m = iid_normal(4, 1000, 33);
    const auto q = mcse_quantile(m, 0.25);
    CHECK(std::count(m.values.begin(), m.values.end(), q.interval_lo) >= 1);
    CHECK(std::count(m.values.begin(), m.values.end(), q.interval_hi) >= 1);
    CHECK(q.interval_lo <= q.point);
    CHECK(q.point <= q.interval_hi);
    CHECK(q.mcse > 0.0);
    CHECK(q.alpha == 0.25);
    CHECK(q.interval_coverage == 0.90);
}

TEST_CASE("mcse_quantile: uniform draws land near the beta interval probabilities") {
    // for iid U(0,1) the sorted draws are close to their plotting
    // positions, so the endpoints approximate the beta quantiles directly
    const Matrix m = iid_uniform(4, 2500, 8);
    const auto q = mcse_quantile(m, 0.5);
    const double shape_a = q.ess_used * 0.5 + 1.0;
    const double shape_b = q.ess_used * 0.5 + 1.0;
    const double a = beta_quantile(0.05, shape_a, shape_b);
    const double b = beta_quantile(0.95, shape_a, shape_b);
    CHECK(q.interval_lo == Catch::Approx(a).margin(0.02));
    CHECK(q.interval_hi == Catch::Approx(b).margin(0.02));
    CHECK(q.point == Catch::Approx(0.5).margin(0.02));
}

TEST_CASE("mcse_quantile: mcse field uses the 16/84 beta pair") {
    const Matrix m = iid_normal(4, 500, 71);
    const auto q = mcse_quantile(m, 0.75);
    std::vector<double> sorted(m.values);
    std::sort(sorted.begin(), sorted.end());
    const double shape_a = q.ess_used * 0.75 + 1.0;
    const double shape_b = q.ess_used * 0.25 + 1.0;
    FlagSet scratch;
    const double a16 =
        detail::order_stat_lower(sorted, beta_quantile(0.16, shape_a, shape_b), scratch);
    const double b84 =
        detail::order_stat_upper(sorted, beta_quantile(0.84, shape_a, shape_b), scratch);
    CHECK(q.mcse == Catch::Approx((b84 - a16) / 2.0).margin(1e-12));
}

TEST_CASE("mcse_quantile: wider coverage gives a wider interval") {
    const Matrix m = iid_normal(4, 1000, 45);
    const auto narrow = mcse_quantile(m, 0.5, 0.50);
    const auto wide = mcse_quantile(m, 0.5, 0.99);
    CHECK(wide.interval_hi - wide.interval_lo >= narrow.interval_hi - narrow.interval_lo);
}

TEST_CASE("mcse_quantile: extreme alpha with few draws clamps and flags TAIL_UNSTABLE") {
    const Matrix m = iid_normal(4, 25, 5);
    const auto q = mcse_quantile(m, 0.01);
    CHECK(q.flags.count(Flag::TailUnstable) == 1);
    std::vector<double> sorted(m.values);
    std::sort(sorted.begin(), sorted.end());
    CHECK(q.interval_lo == sorted.front());
}

TEST_CASE("mcse_quantile: constant draws propagate NaN with a flag") {
    Matrix m(2, 12);
    std::fill(m.values.begin(), m.values.end(), 2.5);
    const auto q = mcse_quantile(m, 0.5);
    CHECK(std::isnan(q.mcse));
    CHECK(std::isnan(q.interval_lo));
    CHECK(std::isnan(q.interval_hi));
    CHECK(q.flags.count(Flag::DegenerateIndicator) == 1);
}

TEST_CASE("mcse_quantile: rejects out-of-range arguments") {
    const Matrix m = iid_normal(2, 10, 1);
    CHECK_THROWS_AS(mcse_quantile(m, 0.0), std::invalid_argument);
    CHECK_THROWS_AS(mcse_quantile(m, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(mcse_quantile(m, 0.5, 1.0), std::invalid_argument);
}
