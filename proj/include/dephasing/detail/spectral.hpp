#pragma once

#include <Eigen/Dense>
#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <vector>

#include "../core.hpp"

namespace dephasing::detail {

// m(d) = A/(b - i d) + B/(b - i d)^2: the slow 1/d, 1/d^2 tails of a causal
// lineshape. Its Fourier pair is known in closed form, so it is removed
// before the discrete transform and added back analytically.
struct TailModel {
    cplx A{}, B{};
    double b = 1.0;
    bool real_part = false;  // model is Re m with real A, B

    cplx full(double d) const {
        const cplx s(b, -d);
        return A / s + B / (s * s);
    }
    cplx operator()(double d) const { return real_part ? cplx(full(d).real(), 0.0) : full(d); }
    // (1/pi) P int Re m(x)/(x - d) dx = -Im m(d) for real A, B.
    double principal_value(double d) const { return -full(d).imag(); }
    // int m(d) e^{-i d t} dd for t > 0 (right limit at t = 0).
    cplx inverse(double t) const {
        const double f = real_part ? std::numbers::pi : 2.0 * std::numbers::pi;
        return f * (A + B * t) * std::exp(-b * t);
    }
};

// Least squares on k points at each grid edge.
inline TailModel fit_tail(const std::vector<double>& d, const std::vector<cplx>& f, double b, bool real_part,
                          std::size_t k = 32) {
    const std::size_t n = d.size();
    k = std::min(k, n / 4);
    require(k >= 2, "grid too short for tail fitting");
    TailModel m;
    m.b = b;
    m.real_part = real_part;
    std::vector<std::size_t> idx;
    for (std::size_t i = 0; i < k; ++i) {
        idx.push_back(i);
        idx.push_back(n - 1 - i);
    }
    if (real_part) {
        Eigen::MatrixXd X(idx.size(), 2);
        Eigen::VectorXd y(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const cplx s(b, -d[idx[r]]);
            X(r, 0) = (1.0 / s).real();
            X(r, 1) = (1.0 / (s * s)).real();
            y[r] = f[idx[r]].real();
        }
        const Eigen::VectorXd c = X.colPivHouseholderQr().solve(y);
        m.A = c[0];
        m.B = c[1];
    } else {
        Eigen::MatrixXcd X(idx.size(), 2);
        Eigen::VectorXcd y(idx.size());
        for (std::size_t r = 0; r < idx.size(); ++r) {
            const cplx s(b, -d[idx[r]]);
            X(r, 0) = 1.0 / s;
            X(r, 1) = 1.0 / (s * s);
            y[r] = f[idx[r]];
        }
        const Eigen::VectorXcd c = X.colPivHouseholderQr().solve(y);
        m.A = c[0];
        m.B = c[1];
    }
    return m;
}

// Trapezoid weights on a uniform grid.
inline double trapezoid_weight(std::size_t i, std::size_t n) { return (i == 0 || i + 1 == n) ? 0.5 : 1.0; }

// int f(d) e^{-i d t} dd with the tail model removed and restored analytically.
inline cplx inverse_transform_direct(const std::vector<double>& d, const std::vector<cplx>& f, const TailModel& tail,
                                     double t) {
    const std::size_t n = d.size();
    const double h = (d.back() - d.front()) / double(n - 1);
    cplx acc = 0.0;
    for (std::size_t j = 0; j < n; ++j)
        acc += trapezoid_weight(j, n) * (f[j] - tail(d[j])) * std::polar(1.0, -d[j] * t);
    return acc * h + tail.inverse(t);
}

struct FftInverse {
    std::vector<double> times;
    std::vector<cplx> values;
};

// Same transform on the natural time grid t_k = 2 pi k / (n_pad h), t_k <= t_max.
inline FftInverse inverse_transform_fft(const std::vector<double>& d, const std::vector<cplx>& f,
                                        const TailModel& tail, double t_max, std::size_t pad_factor = 4) {
    const std::size_t n = d.size();
    const double h = (d.back() - d.front()) / double(n - 1);
    std::size_t n_pad = 1;
    while (n_pad < pad_factor * n) n_pad <<= 1;
    std::vector<cplx> x(n_pad, cplx(0.0));
    for (std::size_t j = 0; j < n; ++j) x[j] = trapezoid_weight(j, n) * (f[j] - tail(d[j]));
    Eigen::FFT<double> fft;
    std::vector<cplx> X;
    fft.fwd(X, x);
    const double dt = 2.0 * std::numbers::pi / (double(n_pad) * h);
    FftInverse out;
    for (std::size_t k = 0; k < n_pad / 2; ++k) {
        const double t = dt * double(k);
        if (t > t_max * (1.0 + 1e-12)) break;
        out.times.push_back(t);
        out.values.push_back(X[k] * std::polar(1.0, -d.front() * t) * h + tail.inverse(t));
    }
    return out;
}

}  // namespace dephasing::detail
