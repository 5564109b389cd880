#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <vector>

namespace mopt::detail {

/// In-place iterative radix-2 FFT; n must be a power of two. Butterflies use
/// explicit real arithmetic (the library complex multiply routes through a
/// NaN-guarded helper that dominates the runtime here).
inline void fft_pow2(std::vector<std::complex<double>>& a, bool inverse) {
    const std::size_t n = a.size();
    for (std::size_t i = 1, j = 0; i < n; ++i) {
        std::size_t bit = n >> 1;
        for (; j & bit; bit >>= 1) j ^= bit;
        j ^= bit;
        if (i < j) std::swap(a[i], a[j]);
    }
    const double pi = 3.14159265358979323846;
    for (std::size_t len = 2; len <= n; len <<= 1) {
        const double ang = 2.0 * pi / double(len) * (inverse ? 1.0 : -1.0);
        const double wlr = std::cos(ang), wli = std::sin(ang);
        for (std::size_t i = 0; i < n; i += len) {
            double wr = 1.0, wi = 0.0;
            for (std::size_t j = 0; j < len / 2; ++j) {
                const double ur = a[i + j].real(), ui = a[i + j].imag();
                const double xr = a[i + j + len / 2].real(), xi = a[i + j + len / 2].imag();
                const double vr = xr * wr - xi * wi;
                const double vi = xr * wi + xi * wr;
                a[i + j] = {ur + vr, ui + vi};
                a[i + j + len / 2] = {ur - vr, ui - vi};
                const double nwr = wr * wlr - wi * wli;
                wi = wr * wli + wi * wlr;
                wr = nwr;
            }
        }
    }
    if (inverse) {
        const double inv = 1.0 / double(n);
        for (auto& x : a) x = {x.real() * inv, x.imag() * inv};
    }
}

} // namespace mopt::detail
