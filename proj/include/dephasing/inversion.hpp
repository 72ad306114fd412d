#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "detail/parallel.hpp"
#include "detail/spectral.hpp"

namespace dephasing {

struct KramersKronigOptions {
    bool extrapolate_tail = true;
    double edge_fraction_limit = 0.05;  // edge value / peak of 1 - Re t without extrapolation
    double tail_rate = 0.0;             // 0: estimated from the half width of the peak
};

struct KramersKronigResult {
    std::vector<double> im_t;
    bool tail_extrapolated = false;
    double edge_fraction = 0.0;
};

namespace detail {

// Half width at half maximum of a peaked profile (grid units), at least one spacing.
inline double half_width_estimate(const std::vector<double>& d, const std::vector<double>& u) {
    const auto peak = std::max_element(u.begin(), u.end(), [](double a, double b) { return std::abs(a) < std::abs(b); });
    const double top = std::abs(*peak);
    const double h = d[1] - d[0];
    if (top == 0.0) return h;
    std::size_t lo = std::size_t(peak - u.begin()), hi = lo;
    while (lo > 0 && std::abs(u[lo]) > 0.5 * top) --lo;
    while (hi + 1 < u.size() && std::abs(u[hi]) > 0.5 * top) ++hi;
    return std::max(h, 0.5 * (d[hi] - d[lo]));
}

inline double edge_fraction(const std::vector<double>& u) {
    double top = 0.0;
    for (double v : u) top = std::max(top, std::abs(v));
    if (top == 0.0) return 0.0;
    return std::max(std::abs(u.front()), std::abs(u.back())) / top;
}

}  // namespace detail

// Im t = (1/pi) P int (1 - Re t(w'))/(w' - w) dw' on a uniform grid.
// The 1/d^2 tail is fitted and paired analytically; the remainder uses
// singularity subtraction: int (r(x) - r(w))/(x - w) dx + r(w) ln((b - w)/(w - a)).
inline KramersKronigResult kramers_kronig(const FrequencyGrid& grid, const std::vector<double>& re_t,
                                          KramersKronigOptions opt = {}) {
    detail::require(re_t.size() == grid.size(), "spectrum length must match grid");
    detail::require(grid.size() >= 8, "Kramers-Kronig needs at least 8 points");
    const double h = grid.spacing();
    const auto& d = grid.values();
    const std::size_t n = d.size();
    std::vector<double> u(n);
    for (std::size_t i = 0; i < n; ++i) u[i] = 1.0 - re_t[i];

    KramersKronigResult res;
    res.edge_fraction = detail::edge_fraction(u);
    if (res.edge_fraction >= opt.edge_fraction_limit && !opt.extrapolate_tail)
        throw InvalidArgument("edge-mass check failed: 1 - Re t at the grid edge is " +
                              std::to_string(100.0 * res.edge_fraction) +
                              "% of its peak and tail extrapolation is disabled");

    detail::TailModel tail;
    tail.real_part = true;
    if (opt.extrapolate_tail) {
        const double b = opt.tail_rate > 0.0 ? opt.tail_rate : detail::half_width_estimate(d, u);
        std::vector<cplx> uc(u.begin(), u.end());
        tail = detail::fit_tail(d, uc, b, true);
        res.tail_extrapolated = true;
    }
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) r[i] = u[i] - tail(d[i]).real();

    const double a = d.front(), b = d.back();
    res.im_t.assign(n, 0.0);
    detail::parallel_for(n, [&](std::size_t i) {
        const double w = d[i];
        // Derivative at the singular node (one sided at the edges).
        double slope;
        if (i == 0) slope = (r[1] - r[0]) / h;
        else if (i + 1 == n) slope = (r[n - 1] - r[n - 2]) / h;
        else slope = (r[i + 1] - r[i - 1]) / (2.0 * h);
        double acc = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
            const double g = (j == i) ? slope : (r[j] - r[i]) / (d[j] - w);
            acc += detail::trapezoid_weight(j, n) * g;
        }
        acc *= h;
        // Edge nodes: keep the logarithm finite by ending the range half a cell out.
        const double lo = (i == 0) ? a - 0.5 * h : a;
        const double hi = (i + 1 == n) ? b + 0.5 * h : b;
        acc += r[i] * std::log((hi - w) / (w - lo));
        res.im_t[i] = acc / std::numbers::pi + (opt.extrapolate_tail ? tail.principal_value(w) : 0.0);
    });
    return res;
}

struct InversionOptions {
    double t_max = 6.0;              // in units of 1/Gamma
    double measurement_noise = 0.0;  // std of each spectral sample, for the amplification bound
    double amplification_limit = 0.05;
    std::size_t pad_factor = 4;
    std::size_t tail_points = 32;
};

struct InversionResult {
    EnvelopeCurve raw;         // as computed
    EnvelopeCurve normalized;  // divided by the raw value at t = 0
    double grid_error = 0.0;   // estimated absolute error before amplification
    double amplification = 0.0;
};

namespace detail {

inline void check_inversion_grid(const FrequencyGrid& grid) {
    detail::require(grid.size() >= 64, "inversion needs at least 64 grid points");
    detail::require(grid.is_uniform(), "inversion needs a uniform grid");
    detail::require(grid.is_symmetric(), "inversion needs a grid symmetric about delta = 0");
}

// C(t) = factor * e^{h t} int f(d) e^{-i d t} dd with f = G or Re G.
inline InversionResult invert_overlap(const SystemParams& p, const FrequencyGrid& grid, const std::vector<cplx>& f,
                                      bool real_route, const InversionOptions& opt) {
    check_inversion_grid(grid);
    detail::require(opt.t_max > 0.0, "t_max must be > 0");
    const double h = p.half_width();
    const auto& d = grid.values();
    const double dd = grid.spacing();
    const auto tail = fit_tail(d, f, h, real_route, opt.tail_points);

    // Error floor: tail residual left beyond the grid plus propagated sample noise.
    const std::size_t n = d.size();
    const double res_lo = std::abs(f.front() - tail(d.front()));
    const double res_hi = std::abs(f.back() - tail(d.back()));
    const double norm = real_route ? 1.0 / std::numbers::pi : 0.5 / std::numbers::pi;
    const double grid_error =
        norm * (0.5 * (res_lo + res_hi) * std::max(std::abs(d.front()), std::abs(d.back())) +
                opt.measurement_noise * dd * std::sqrt(double(n)));
    const double amp = std::exp(h * opt.t_max);
    if (amp * grid_error > opt.amplification_limit)
        throw InvalidArgument("amplification bound exceeded: e^{h t_max} * error = " + std::to_string(amp * grid_error) +
                              " > " + std::to_string(opt.amplification_limit) + "; lower t_max or widen the grid");

    const auto inv = inverse_transform_fft(d, f, tail, opt.t_max, opt.pad_factor);
    std::vector<cplx> c(inv.times.size());
    for (std::size_t k = 0; k < c.size(); ++k) {
        cplx v = norm * std::exp(h * inv.times[k]) * inv.values[k];
        if (real_route) v = v.real();
        c[k] = v;
    }
    InversionResult out;
    out.raw = EnvelopeCurve(inv.times, c);
    std::vector<cplx> cn = c;
    if (!c.empty() && std::abs(c.front()) > 0.0)
        for (auto& v : cn) v /= c.front();
    out.normalized = EnvelopeCurve(inv.times, std::move(cn));
    out.grid_error = grid_error;
    out.amplification = amp;
    return out;
}

}  // namespace detail

// C(t) = (1/pi) e^{h t} int Re G(d) e^{-i d t} dd, Re G = (1 - Re t)/gamma_mu, h = Gamma/2 + gamma_WB.
inline InversionResult envelope_from_transmittance(const SystemParams& p, const FrequencyGrid& grid,
                                                   const std::vector<double>& re_t, Channel in,
                                                   InversionOptions opt = {}) {
    detail::require(re_t.size() == grid.size(), "spectrum length must match grid");
    const double gm = p.rate(in);
    detail::require(gm > 0.0, "input channel has zero coupling");
    std::vector<cplx> f(re_t.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (1.0 - re_t[i]) / gm;
    return detail::invert_overlap(p, grid, f, true, opt);
}

// C(t) = (1/2pi) e^{h t} int G(d) e^{-i d t} dd with G = (1 - t)/gamma_mu.
inline InversionResult envelope_from_complex_transmittance(const SystemParams& p, const ComplexSpectrum& t,
                                                           Channel in, InversionOptions opt = {}) {
    const double gm = p.rate(in);
    detail::require(gm > 0.0, "input channel has zero coupling");
    std::vector<cplx> f(t.size());
    for (std::size_t i = 0; i < f.size(); ++i) f[i] = (1.0 - t[i]) / gm;
    return detail::invert_overlap(p, t.grid, f, false, opt);
}

// Re t -> Im t by Kramers-Kronig, then the complex route.
inline ComplexSpectrum complete_transmittance(const FrequencyGrid& grid, const std::vector<double>& re_t,
                                              KramersKronigOptions opt = {}) {
    const auto kk = kramers_kronig(grid, re_t, opt);
    std::vector<cplx> v(grid.size());
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = cplx(re_t[i], kk.im_t[i]);
    return ComplexSpectrum(grid, std::move(v), SpectrumKind::transmittance);
}

}  // namespace dephasing
