#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <numbers>
#include <span>
#include <stdexcept>
#include <vector>

namespace mcdiag {

namespace detail {

// In-place iterative radix-2 Cooley-Tukey. Length must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    if (n == 0 || (n & (n - 1)) != 0)
        throw std::invalid_argument("fft_radix2: length must be a power of two");

    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * std::numbers::pi / static_cast<double>(len) * (inverse ? 1.0 : -1.0);
        const std::complex<double> wlen(std::cos(ang), std::sin(ang));
        for (std::size_t i = 0; i < n; i += len) {
            std::complex<double> w(1.0, 0.0);
            for (std::size_t k = 0; k < len / 2; ++k) {
                const std::complex<double> u = a[i + k];
                const std::complex<double> v = a[i + k + len / 2] * w;
                a[i + k] = u + v;
                a[i + k + len / 2] = u - v;
                w *= wlen;
            }
        }
    }
    if (inverse) {
        for (auto& x : a) x /= static_cast<double>(n);
    }
}

inline std::size_t next_pow2(std::size_t n) {
    std::size_t p = 1;
    while (p < n) p <<= 1;
    return p;
}

}  // namespace detail

// Biased autocovariance sequence gamma_t, t = 0..N-1, divisor N,
// computed via FFT with zero-padding to the next power of two >= 2N.
inline std::vector<double> autocovariance_fft(std::span<const double> chain) {
    const std::size_t n = chain.size();
    if (n < 2) throw std::invalid_argument("autocovariance_fft: need at least 2 draws");

    double mean = 0.0;
    for (double v : chain) mean += v;
    mean /= static_cast<double>(n);

    const std::size_t len = detail::next_pow2(2 * n);
    std::vector<std::complex<double>> buf(len, {0.0, 0.0});
    for (std::size_t i = 0; i < n; ++i) buf[i] = chain[i] - mean;

    detail::fft_radix2(buf, false);
    for (auto& x : buf) x = x * std::conj(x);
    detail::fft_radix2(buf, true);

    std::vector<double> acov(n);
    for (std::size_t t = 0; t < n; ++t) acov[t] = buf[t].real() / static_cast<double>(n);
    return acov;
}

}  // namespace mcdiag
