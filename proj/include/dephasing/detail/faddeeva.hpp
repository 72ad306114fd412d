#pragma once

#include <array>
#include <cmath>
#include <complex>
#include <numbers>

#include "../core.hpp"

namespace dephasing::detail {

// Weideman's rational expansion of the Faddeeva function w(z), Im z >= 0.
// Coefficients come from a cosine sum evaluated once.
class WeidemanFaddeeva {
public:
    static constexpr int N = 64;

    WeidemanFaddeeva() {
        constexpr int M = 2 * N;
        L_ = std::sqrt(N / std::sqrt(2.0));
        std::array<double, M> g{};
        for (int k = 0; k < M; ++k) {
            const double t = L_ * std::tan(0.5 * k * std::numbers::pi / M);
            g[k] = std::exp(-t * t) * (L_ * L_ + t * t);
        }
        for (int n = 1; n <= N; ++n) {
            double s = g[0];
            for (int k = 1; k < M; ++k) s += 2.0 * g[k] * std::cos(std::numbers::pi * k * n / M);
            a_[n - 1] = s / (2.0 * M);
        }
    }

    cplx operator()(cplx z) const {
        const cplx iz(-z.imag(), z.real());
        const cplx den = L_ - iz;
        const cplx Z = (L_ + iz) / den;
        cplx p = a_[N - 1];
        for (int n = N - 2; n >= 0; --n) p = p * Z + a_[n];
        return 2.0 * p / (den * den) + 1.0 / (std::sqrt(std::numbers::pi) * den);
    }

private:
    double L_ = 0.0;
    std::array<double, N> a_{};
};

// Laplace continued fraction for w(z), accurate for large |z| with Im z >= 0.
inline cplx faddeeva_cf(cplx z, int depth = 60) {
    cplx r = z;
    for (int k = depth; k >= 1; --k) r = z - (0.5 * k) / r;
    return cplx(0.0, 1.0 / std::sqrt(std::numbers::pi)) / r;
}

// w(z) = exp(-z^2) erfc(-iz) in the closed upper half plane.
inline cplx faddeeva_w(cplx z) {
    if (!(z.imag() >= 0.0)) throw InvalidArgument("faddeeva_w needs Im z >= 0");
    static const WeidemanFaddeeva weideman;
    if (std::abs(z) > 12.0) return faddeeva_cf(z);
    return weideman(z);
}

// Scaled complementary error function exp(z^2) erfc(z), Re z >= 0.
inline cplx erfcx(cplx z) {
    if (!(z.real() >= 0.0)) throw InvalidArgument("erfcx needs Re z >= 0");
    return faddeeva_w(cplx(-z.imag(), z.real()));
}

}  // namespace dephasing::detail
