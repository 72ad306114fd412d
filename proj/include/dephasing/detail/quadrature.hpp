#pragma once

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

#include <cmath>
#include <array>
#include <complex>
#include <string>

#include "../core.hpp"

namespace dephasing::detail {

struct QuadResult {
    double value = 0.0;
    double error = 0.0;
    bool converged = true;
};

template <class F>
void simpson_step(const F& f, double a, double b, double fa, double fm, double fb, double whole, double tol,
                  int depth, QuadResult& acc) {
    const double m = 0.5 * (a + b);
    const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
    const double flm = f(lm), frm = f(rm);
    const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
    const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
    const double diff = left + right - whole;
    if (std::abs(diff) <= 15.0 * tol || depth <= 0) {
        if (depth <= 0 && std::abs(diff) > 15.0 * tol) acc.converged = false;
        acc.value += left + right + diff / 15.0;
        acc.error += std::abs(diff) / 15.0;
        return;
    }
    simpson_step(f, a, m, fa, flm, fm, left, 0.5 * tol, depth - 1, acc);
    simpson_step(f, m, b, fm, frm, fb, right, 0.5 * tol, depth - 1, acc);
}

// Adaptive Simpson with Richardson correction; abs_tol is on the integral.
template <class F>
QuadResult adaptive_simpson(const F& f, double a, double b, double abs_tol, int max_depth = 48) {
    QuadResult acc;
    if (a == b) return acc;
    // Seed with a few panels so a symmetric integrand cannot fool the first estimate.
    constexpr int panels = 8;
    const double h = (b - a) / panels;
    for (int k = 0; k < panels; ++k) {
        const double lo = a + k * h, hi = (k + 1 == panels) ? b : lo + h;
        const double fa = f(lo), fb = f(hi), fm = f(0.5 * (lo + hi));
        const double whole = (hi - lo) / 6.0 * (fa + 4.0 * fm + fb);
        simpson_step(f, lo, hi, fa, fm, fb, whole, abs_tol / panels, max_depth, acc);
    }
    return acc;
}

struct ComplexQuadResult {
    cplx value{};
    double error = 0.0;
};

// Complex integrand over [a, b]: split into panels of at most `panel` width,
// Gauss-Kronrod 15/31 on each. Each panel stops at rel_tol against its L1 norm or at
// its share of abs_tol, whichever is looser; without the absolute floor a panel whose
// integrand sits at the rounding level would recurse to max_depth.
template <class F>
ComplexQuadResult gk_integrate(const F& f, double a, double b, double panel, double rel_tol = 1e-12,
                               unsigned max_depth = 12, double abs_tol = 0.0) {
    using boost::math::quadrature::gauss_kronrod;
    ComplexQuadResult out;
    const int n = std::max(1, static_cast<int>(std::ceil((b - a) / panel)));
    const double h = (b - a) / n;
    for (int k = 0; k < n; ++k) {
        const double lo = a + k * h, hi = (k + 1 == n) ? b : lo + h;
        double err = 0.0, l1 = 0.0;
        cplx v = gauss_kronrod<double, 31>::integrate(f, lo, hi, 0, rel_tol, &err, &l1);
        const double tol = std::max(rel_tol, l1 > 0.0 ? abs_tol / n / l1 : 0.0);
        if (err > tol * l1 && max_depth > 0) v = gauss_kronrod<double, 31>::integrate(f, lo, hi, max_depth, tol, &err, &l1);
        out.value += v;
        out.error += err;
    }
    return out;
}

// Filon-type rule for int_{t0}^{t0+h} f(t) e^{-s t} dt when the panel holds many
// oscillations: f is expanded in Legendre polynomials from Gauss-Legendre samples and
// int_{-1}^{1} P_k(x) e^{lam x} dx = 2 i_k(lam) (modified spherical Bessel), with
// i_k from the forward recurrence, which is stable for k < |lam|.
inline constexpr int filon_order = 24;

struct FilonNodes {
    std::array<double, filon_order> x{}, w{};
    std::array<std::array<double, filon_order>, filon_order> P{};  // P[k][j] = P_k(x_j)
};

inline const FilonNodes& filon_nodes() {
    static const FilonNodes nodes = [] {
        using G = boost::math::quadrature::gauss<double, filon_order>;
        FilonNodes n;
        const auto& a = G::abscissa();
        const auto& w = G::weights();
        const int half = filon_order / 2;
        for (int j = 0; j < half; ++j) {
            n.x[j] = -a[half - 1 - j];
            n.w[j] = w[half - 1 - j];
            n.x[filon_order - 1 - j] = a[half - 1 - j];
            n.w[filon_order - 1 - j] = w[half - 1 - j];
        }
        for (int j = 0; j < filon_order; ++j) {
            n.P[0][j] = 1.0;
            n.P[1][j] = n.x[j];
            for (int k = 1; k + 1 < filon_order; ++k)
                n.P[k + 1][j] = ((2.0 * k + 1.0) * n.x[j] * n.P[k][j] - k * n.P[k - 1][j]) / (k + 1.0);
        }
        return n;
    }();
    return nodes;
}

// Needs |s| h / 2 >= filon_order. Error estimate from the last two Legendre coefficients.
template <class F>
ComplexQuadResult filon_panel(const F& f, cplx s, double t0, double h) {
    const auto& n = filon_nodes();
    std::array<double, filon_order> fv;
    for (int j = 0; j < filon_order; ++j) fv[j] = f(t0 + 0.5 * h * (1.0 + n.x[j]));
    const cplx lam = -0.5 * s * h;
    cplx ip = std::sinh(lam) / lam;
    cplx ic = (std::cosh(lam) - ip) / lam;
    cplx acc = 0.0;
    double last = 0.0;
    for (int k = 0; k < filon_order; ++k) {
        double c = 0.0;
        for (int j = 0; j < filon_order; ++j) c += n.w[j] * n.P[k][j] * fv[j];
        c *= 0.5 * (2.0 * k + 1.0);
        const cplx ik = (k == 0) ? ip : ic;
        acc += c * 2.0 * ik;
        if (k >= filon_order - 2) last += std::abs(c);
        if (k >= 1) {
            const cplx next = ip - (2.0 * k + 1.0) / lam * ic;
            ip = ic;
            ic = next;
        }
    }
    const cplx pre = 0.5 * h * std::exp(-s * (t0 + 0.5 * h));
    return {pre * acc, std::abs(pre) * 2.0 * std::exp(std::abs(lam.real())) * last};
}

}  // namespace dephasing::detail
