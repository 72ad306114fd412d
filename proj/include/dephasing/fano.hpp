#pragma once

#include <cmath>
#include <complex>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "detail/parallel.hpp"
#include "detail/spectral.hpp"
#include "scattering.hpp"

namespace dephasing {

// Localized mode that mediates the emitter-waveguide coupling.
struct FanoParams {
    double omega_c = 0.0;  // detuning from omega0
    double kappa_c = 1.0;

    FanoParams() = default;
    FanoParams(double omega, double kappa) : omega_c(omega), kappa_c(kappa) {
        detail::require_finite(omega_c, "omega_c");
        detail::require_finite(kappa_c, "kappa_c");
        detail::require(kappa_c > 0.0, "kappa_c must be > 0");
    }
};

inline cplx fano_z(double delta, const FanoParams& f) {
    return 1.0 / cplx(1.0, -2.0 * (delta - f.omega_c) / f.kappa_c);
}

inline std::vector<cplx> fano_z(const FrequencyGrid& grid, const FanoParams& f) {
    std::vector<cplx> z(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) z[i] = fano_z(grid[i], f);
    return z;
}

// Lambda_{out,in} = delta_{out,in} - 2 z sqrt(gamma_out gamma_in)/gamma.
inline cplx fano_lambda(const SystemParams& p, cplx z, Channel in, Channel out) {
    return (in == out ? 1.0 : 0.0) - 2.0 * z * std::sqrt(p.rate(in) * p.rate(out)) / p.guided_decay();
}

struct FanoScatterResult {
    ScatterResult scatter;
    std::vector<cplx> z;
};

// G_F = L[C]((z gamma + gamma_loss)/2 + gamma_WB - i delta);
// t = Lambda_mm + z^2 gamma_mu G_F, r = Lambda_{-m,m} + z^2 sqrt(gamma_+ gamma_-) G_F,
// r_loss = z sqrt(gamma_loss gamma_mu) G_F.
inline FanoScatterResult fano_scatter(const SystemParams& p, const FanoParams& fano, const EnvelopeFunction& C,
                                      const FrequencyGrid& grid, Channel in, LaplaceOptions opt = {}) {
    detail::require(p.guided_decay() > 0.0, "Fano relations need gamma > 0");
    if (std::abs(C(0.0) - 1.0) > eps_num) throw InvalidArgument("envelope must satisfy C(0) = 1");
    const auto z = fano_z(grid, fano);
    const double g = p.guided_decay(), gm = p.rate(in);
    std::vector<cplx> G(grid.size());
    std::vector<double> err(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        const cplx s = 0.5 * (z[i] * g + p.gamma_loss()) + p.white_background() - cplx(0.0, grid[i]);
        const auto r = laplace_transform(C, s, opt);
        G[i] = r.value;
        err[i] = r.error;
    });
    std::vector<cplx> t(grid.size()), r(grid.size()), rl(grid.size());
    const double gr = std::sqrt(p.gamma_plus() * p.gamma_minus()), gl = std::sqrt(p.gamma_loss() * gm);
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx z2 = z[i] * z[i];
        t[i] = fano_lambda(p, z[i], in, in) + z2 * gm * G[i];
        r[i] = fano_lambda(p, z[i], in, opposite(in)) + z2 * gr * G[i];
        rl[i] = z[i] * gl * G[i];
    }
    FanoScatterResult out{{ComplexSpectrum(grid, std::move(t), SpectrumKind::transmittance),
                           ComplexSpectrum(grid, std::move(r), SpectrumKind::reflectance),
                           ComplexSpectrum(grid, std::move(rl), SpectrumKind::loss_reflectance),
                           ComplexSpectrum(grid, std::move(G), SpectrumKind::overlap), std::move(err)},
                          z};
    return out;
}

struct FanoMeasurement {
    cplx homodyne;  // <a_out>/alpha
    double power;   // <a_out^dag a_out>/|alpha|^2
};

// homodyne = Lambda + z^2 sqrt(g_mu g_la) Q, power = |Lambda|^2 + 2 sqrt(g_mu g_la) Re{K Q},
// K = z^2 Lambda^* + |z|^4 sqrt(g_mu g_la)/(|z|^2 gamma + gamma_loss).
inline std::vector<FanoMeasurement> fano_measurements(const SystemParams& p, const FanoParams& fano,
                                                      const std::vector<cplx>& Q, const FrequencyGrid& grid,
                                                      Channel in, Channel out) {
    detail::require(Q.size() == grid.size(), "overlap length must match grid");
    const double c = std::sqrt(p.rate(in) * p.rate(out));
    std::vector<FanoMeasurement> m(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx z = fano_z(grid[i], fano);
        const cplx L = fano_lambda(p, z, in, out);
        const double z2abs = std::norm(z);
        const cplx K = z * z * std::conj(L) + z2abs * z2abs * c / (z2abs * p.guided_decay() + p.gamma_loss());
        m[i] = {L + z * z * c * Q[i], std::norm(L) + 2.0 * c * (K * Q[i]).real()};
    }
    return m;
}

struct FanoRecoveryOptions {
    double t_max = 3.0;
    std::size_t n_times = 61;
    double edge_limit = 1e-4;  // residual after tail removal, relative to max |G_F|
    double amplification_limit = 1e3;
};

// C(t) = (1/2pi) e^{(gamma_loss/2 + gamma_WB) t} int e^{-i d t} e^{z gamma t/2} G_F(d) dd.
// Exact when z is constant over the grid; otherwise the reweighting is the
// stated approximation and its error grows with the variation of z.
inline EnvelopeCurve fano_recover_envelope(const SystemParams& p, const FanoParams& fano, const ComplexSpectrum& G,
                                           FanoRecoveryOptions opt = {}) {
    detail::require(G.grid.size() >= 64 && G.grid.is_uniform(), "Fano recovery needs a uniform grid of at least 64 points");
    detail::require(opt.t_max > 0.0 && opt.n_times >= 2, "need t_max > 0 and at least 2 times");
    const auto& d = G.grid.values();
    const auto z = fano_z(G.grid, fano);
    const double g = p.guided_decay();
    const double h_loss = 0.5 * p.gamma_loss() + p.white_background();
    const double amp = std::exp((0.5 * g + h_loss) * opt.t_max);
    if (amp > opt.amplification_limit)
        throw InvalidArgument("t_max beyond amplification bound: e^{(gamma/2 + gamma_loss/2) t_max} = " +
                              std::to_string(amp));
    double peak = 0.0;
    for (auto v : G.values) peak = std::max(peak, std::abs(v));
    const double b = 0.5 * g + h_loss;
    {
        const auto tail0 = detail::fit_tail(d, G.values, b, false);
        const double edge = std::max(std::abs(G.values.front() - tail0(d.front())), std::abs(G.values.back() - tail0(d.back())));
        if (peak > 0.0 && edge > opt.edge_limit * peak)
            throw InvalidArgument("grid too narrow: edge residual " + std::to_string(edge / peak) +
                                  " of the peak exceeds " + std::to_string(opt.edge_limit));
    }
    const auto times = uniform_times(opt.t_max, opt.n_times);
    std::vector<cplx> c(times.size());
    detail::parallel_for(times.size(), [&](std::size_t k) {
        const double t = times[k];
        std::vector<cplx> f(d.size());
        for (std::size_t j = 0; j < d.size(); ++j) f[j] = std::exp(0.5 * z[j] * g * t) * G.values[j];
        const auto tail = detail::fit_tail(d, f, b, false);
        c[k] = std::exp(h_loss * t) / (2.0 * std::numbers::pi) * detail::inverse_transform_direct(d, f, tail, t);
    });
    return EnvelopeCurve(times, std::move(c));
}

}  // namespace dephasing
