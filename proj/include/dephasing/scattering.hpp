#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <Eigen/SparseLU>

#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <string>
#include <vector>

#include "core.hpp"
#include "detail/faddeeva.hpp"
#include "detail/parallel.hpp"
#include "detail/quadrature.hpp"
#include "noise.hpp"
#include "ramsey.hpp"

namespace dephasing {

struct ScatterResult {
    ComplexSpectrum transmittance;
    ComplexSpectrum reflectance;
    ComplexSpectrum loss_reflectance;
    ComplexSpectrum overlap;
    std::vector<double> overlap_error;  // estimated |G| error per point; empty when exact
};

// t = 1 - gamma_mu G, r = -sqrt(gamma_+ gamma_-) G, r_loss = -sqrt(gamma_loss gamma_mu) G.
inline ScatterResult scatter_from_overlap(const SystemParams& p, const FrequencyGrid& grid, std::vector<cplx> G,
                                          Channel in) {
    const double gm = p.rate(in);
    const double gr = std::sqrt(p.gamma_plus() * p.gamma_minus());
    const double gl = std::sqrt(p.gamma_loss() * gm);
    std::vector<cplx> t(G.size()), r(G.size()), rl(G.size());
    for (std::size_t i = 0; i < G.size(); ++i) {
        t[i] = 1.0 - gm * G[i];
        r[i] = -gr * G[i];
        rl[i] = -gl * G[i];
    }
    return {ComplexSpectrum(grid, std::move(t), SpectrumKind::transmittance),
            ComplexSpectrum(grid, std::move(r), SpectrumKind::reflectance),
            ComplexSpectrum(grid, std::move(rl), SpectrumKind::loss_reflectance),
            ComplexSpectrum(grid, std::move(G), SpectrumKind::overlap),
            {}};
}

// Gamma/2 -> Gamma/2 + gamma_WB; additive when applied repeatedly.
inline SystemParams apply_white_background(const SystemParams& p, double gamma_wb) {
    detail::require_rate(gamma_wb, "gamma_wb");
    return SystemParams(p.gamma_plus(), p.gamma_minus(), p.gamma_loss(), p.omega0(), p.white_background() + gamma_wb);
}

struct LaplaceOptions {
    double tail = 1e-12;       // bound on the neglected tail integral
    double rel_tol = 1e-12;    // per-panel Gauss-Kronrod tolerance
    double max_error = 1e-8;   // accepted total error estimate
};

struct LaplaceResult {
    cplx value{};
    double error = 0.0;
};

// int_0^inf C(t) e^{-s t} dt for |C| <= 1 and Re s > 0.
inline LaplaceResult laplace_transform(const EnvelopeFunction& C, cplx s, LaplaceOptions opt = {}) {
    const double a = s.real();
    if (!(a > 0.0)) throw InvalidArgument("Laplace argument needs Re s > 0");
    const double T = std::max(std::log(1.0 / (a * opt.tail)), 1.0) / a;
    const double w = std::abs(s.imag());
    detail::ComplexQuadResult q;
    if (w * T < 2.0 * 16.0 * detail::filon_order) {
        // Few oscillations: panels short enough to hold about one each.
        const double panel = std::min(T / 16.0, 2.0 * std::numbers::pi / std::max(w, 1e-300));
        q = detail::gk_integrate([&](double t) { return C(t) * std::exp(-s * t); }, 0.0, T, panel, opt.rel_tol, 12,
                                 opt.rel_tol);
    } else {
        // Many oscillations: Filon panels sized by the smoothness of C, split until resolved.
        auto g = [&](double t) { return C(t) * std::exp(-s * t); };
        const double floor = opt.rel_tol / T;  // absolute tolerance per unit length
        auto panel = [&](auto&& self, double t0, double h, int depth) -> void {
            if (std::abs(s) * h < 2.0 * detail::filon_order) {
                const auto r = detail::gk_integrate(g, t0, t0 + h, 2.0 * std::numbers::pi / w, opt.rel_tol, 12, floor * h);
                q.value += r.value;
                q.error += r.error;
                return;
            }
            const auto r = detail::filon_panel(C, s, t0, h);
            if (r.error > floor * h && depth < 40) {
                self(self, t0, 0.5 * h, depth + 1);
                self(self, t0 + 0.5 * h, 0.5 * h, depth + 1);
                return;
            }
            q.value += r.value;
            q.error += r.error;
        };
        for (int k = 0; k < 16; ++k) panel(panel, k * T / 16.0, T / 16.0, 0);
    }
    q.error += opt.tail;
    if (!std::isfinite(q.value.real()) || !std::isfinite(q.value.imag()) || q.error > opt.max_error)
        throw ConvergenceError("Laplace quadrature error " + std::to_string(q.error) + " exceeds " +
                               std::to_string(opt.max_error) + " at s = (" + std::to_string(s.real()) + ", " +
                               std::to_string(s.imag()) + ")");
    return {q.value, q.error};
}

// <<G>> = L[C](Gamma/2 + gamma_WB - i delta) per grid point.
inline ScatterResult scatter_from_envelope(const SystemParams& p, const EnvelopeFunction& C, const FrequencyGrid& grid,
                                           Channel in, LaplaceOptions opt = {}) {
    const double c0 = C(0.0);
    if (std::abs(c0 - 1.0) > eps_num) throw InvalidArgument("envelope must satisfy C(0) = 1");
    std::vector<cplx> G(grid.size());
    std::vector<double> err(grid.size());
    detail::parallel_for(grid.size(), [&](std::size_t i) {
        auto r = laplace_transform(C, cplx(p.half_width(), -grid[i]), opt);
        G[i] = r.value;
        err[i] = r.error;
    });
    auto res = scatter_from_overlap(p, grid, std::move(G), in);
    res.overlap_error = std::move(err);
    return res;
}

inline ScatterResult transmittance_white(const SystemParams& p, double gamma_phi, const FrequencyGrid& grid,
                                         Channel in = Channel::plus) {
    detail::require_rate(gamma_phi, "gamma_phi");
    std::vector<cplx> G(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) G[i] = 1.0 / cplx(p.half_width() + gamma_phi, -grid[i]);
    return scatter_from_overlap(p, grid, std::move(G), in);
}

struct SeriesOptions {
    double tol = 1e-12;
    int n_max = 10000;
    int growth_limit = 50;  // consecutive growing terms before giving up
};

// Expansion of the OU envelope in powers of (sigma/kappa)^2:
// G = sum_n (-a)^n/n! e^a / (Gamma/2 + sigma^2/kappa + n kappa - i delta), a = (sigma/kappa)^2.
inline ScatterResult transmittance_ou_series(const SystemParams& p, double sigma, double kappa,
                                             const FrequencyGrid& grid, Channel in = Channel::plus,
                                             SeriesOptions opt = {}) {
    detail::require_rate(sigma, "sigma");
    detail::require_finite(kappa, "kappa");
    if (!(kappa > 0.0)) throw InvalidArgument("OU series needs kappa > 0; use the quasi-static closed form");
    const double a = (sigma / kappa) * (sigma / kappa);
    const double base = p.half_width() + sigma * sigma / kappa;
    const double eps = std::numeric_limits<double>::epsilon();
    const std::string regime =
        "the series expansion fails to converge numerically for kappa << sigma (sigma/kappa = " +
        std::to_string(sigma / kappa) + "); use the quasi-static closed form or the Laplace route";
    std::vector<cplx> G(grid.size());
    std::vector<double> bound(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double d = grid[i];
        cplx sum = 0.0;
        double prev = std::numeric_limits<double>::infinity(), largest = 0.0, tail = 0.0;
        int growing = 0;
        bool done = false;
        for (int n = 0; n <= opt.n_max; ++n) {
            const double logc = a + (n == 0 ? 0.0 : n * std::log(a)) - std::lgamma(n + 1.0);
            const double mag = (a == 0.0 && n > 0) ? 0.0 : std::exp(logc);
            if (!std::isfinite(mag)) throw ConvergenceError(regime);
            const cplx term = (n % 2 ? -mag : mag) / cplx(base + n * kappa, -d);
            sum += term;
            const double tm = std::abs(term);
            largest = std::max(largest, tm);
            growing = (tm > prev) ? growing + 1 : 0;
            if (growing >= opt.growth_limit) throw ConvergenceError(regime);
            prev = tm;
            if (tm < opt.tol * std::abs(sum) || tm == 0.0) {
                // Alternating tail with shrinking terms: next term bounds the remainder.
                const double next = std::exp(logc + std::log(a) - std::log(n + 1.0)) / std::abs(cplx(base + (n + 1) * kappa, -d));
                tail = (a == 0.0) ? 0.0 : next;
                done = true;
                break;
            }
        }
        if (!done) throw ConvergenceError(regime);
        // Cancellation between huge alternating terms leaves rounding noise of order largest*eps.
        const double rounding = 10.0 * largest * eps;
        if (!std::isfinite(std::abs(sum)) || !(rounding <= opt.tol * std::abs(sum))) throw ConvergenceError(regime);
        G[i] = sum;
        bound[i] = tail + largest * eps;
    }
    auto res = scatter_from_overlap(p, grid, std::move(G), in);
    res.overlap_error = std::move(bound);
    return res;
}

// Static Gaussian detuning: G = sqrt(pi/2)/sigma * erfcx((Gamma/2 - i delta)/(sqrt(2) sigma)).
inline ScatterResult transmittance_quasistatic(const SystemParams& p, double sigma, const FrequencyGrid& grid,
                                               Channel in = Channel::plus) {
    detail::require_finite(sigma, "sigma");
    if (!(sigma > 0.0)) throw InvalidArgument("quasi-static lineshape needs sigma > 0; use transmittance_white with gamma_phi = 0");
    std::vector<cplx> G(grid.size());
    const double pref = std::sqrt(0.5 * std::numbers::pi) / sigma;
    for (std::size_t i = 0; i < grid.size(); ++i)
        G[i] = pref * detail::erfcx(cplx(p.half_width(), -grid[i]) / (std::numbers::sqrt2 * sigma));
    return scatter_from_overlap(p, grid, std::move(G), in);
}

// Frequency-dependent dephasing rate sigma^2 / (Gamma/2 + kappa - i delta).
inline ScatterResult transmittance_telegraph(const SystemParams& p, double sigma, double kappa,
                                             const FrequencyGrid& grid, Channel in = Channel::plus) {
    detail::require_rate(sigma, "sigma");
    detail::require_rate(kappa, "kappa");
    std::vector<cplx> G(grid.size());
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx s(p.half_width(), -grid[i]);
        G[i] = 1.0 / (s + sigma * sigma / (s + kappa));
    }
    return scatter_from_overlap(p, grid, std::move(G), in);
}

struct JumpSolveOptions {
    std::size_t dense_limit = 1024;  // sparse LU above this many states
};

// J g = P_ss with J = diag(Gamma/2 - i delta + i Delta_m) - W; G = sum g.
inline ScatterResult scatter_jump(const SystemParams& p, const JumpModel& jump, const FrequencyGrid& grid,
                                  Channel in = Channel::plus, JumpSolveOptions opt = {}) {
    const Eigen::Index n = Eigen::Index(jump.size());
    detail::require(n > 0, "empty jump model");
    Eigen::VectorXcd rhs(n);
    for (Eigen::Index m = 0; m < n; ++m) rhs[m] = jump.stationary[m];
    std::vector<cplx> G(grid.size());
    const double h = p.half_width();
    if (std::size_t(n) <= opt.dense_limit) {
        const Eigen::MatrixXcd minusW = -jump.dense_transition().cast<cplx>();
        detail::parallel_for(grid.size(), [&](std::size_t i) {
            Eigen::MatrixXcd J = minusW;
            for (Eigen::Index m = 0; m < n; ++m) J(m, m) += cplx(h, jump.realizations[m] - grid[i]);
            Eigen::PartialPivLU<Eigen::MatrixXcd> lu(J);
            const Eigen::VectorXcd g = lu.solve(rhs);
            if (!g.allFinite()) throw std::logic_error("singular jump-model system");
            G[i] = g.sum();
        });
    } else {
        const Eigen::SparseMatrix<cplx> minusW = -jump.transition.cast<cplx>();
        detail::parallel_for(grid.size(), [&](std::size_t i) {
            Eigen::SparseMatrix<cplx> J = minusW;
            for (Eigen::Index m = 0; m < n; ++m) J.coeffRef(m, m) += cplx(h, jump.realizations[m] - grid[i]);
            J.makeCompressed();
            Eigen::SparseLU<Eigen::SparseMatrix<cplx>> lu;
            lu.compute(J);
            if (lu.info() != Eigen::Success) throw std::logic_error("singular jump-model system");
            const Eigen::VectorXcd g = lu.solve(rhs);
            G[i] = g.sum();
        });
    }
    return scatter_from_overlap(p, grid, std::move(G), in);
}

// ------------------------------------------------------------------ dispatch

enum class ScatterMethod { automatic, laplace, series, closed_form, jump };

inline const char* to_string(ScatterMethod m) {
    switch (m) {
        case ScatterMethod::automatic: return "auto";
        case ScatterMethod::laplace: return "laplace";
        case ScatterMethod::series: return "series";
        case ScatterMethod::closed_form: return "closed_form";
        case ScatterMethod::jump: return "jump";
    }
    return "?";
}

inline ScatterMethod parse_scatter_method(const std::string& s) {
    if (s == "auto") return ScatterMethod::automatic;
    if (s == "laplace") return ScatterMethod::laplace;
    if (s == "series") return ScatterMethod::series;
    if (s == "closed_form") return ScatterMethod::closed_form;
    if (s == "jump") return ScatterMethod::jump;
    throw InvalidArgument("unknown method '" + s + "' (auto, laplace, series, closed_form, jump)");
}

namespace detail {
inline const NoiseModel& strip_background(const NoiseModel& m) {
    if (auto w = m.get_if<WithWhiteBackground>()) return *w->base;
    return m;
}
}  // namespace detail

// Method actually used for `model`, or InvalidArgument when it does not apply.
inline ScatterMethod resolve_method(const NoiseModel& model, ScatterMethod method) {
    const NoiseModel& b = detail::strip_background(model);
    const bool white = b.is<White>();
    const auto* cg = b.get_if<ColoredGaussian>();
    const bool tel = b.is<Telegraph>();
    const bool tlf = b.is<TLFEnsemble>();
    const auto* f = b.get_if<OneOverF>();
    const bool has_jump = tel || tlf || (f && !f->gaussian);
    const bool has_closed = white || tel || (cg && cg->kappa == 0.0);
    switch (method) {
        case ScatterMethod::automatic:
            if (has_closed) return ScatterMethod::closed_form;
            if (has_jump) return ScatterMethod::jump;
            return ScatterMethod::laplace;
        case ScatterMethod::laplace: return method;
        case ScatterMethod::series:
            if (cg && cg->kappa > 0.0) return method;
            throw InvalidArgument("method 'series' applies only to colored_gaussian noise with kappa > 0, not " + b.kind());
        case ScatterMethod::closed_form:
            if (has_closed) return method;
            throw InvalidArgument("no closed-form lineshape for " + b.kind() +
                                  " (available: white, telegraph, colored_gaussian with kappa = 0)");
        case ScatterMethod::jump:
            if (has_jump) return method;
            throw InvalidArgument("method 'jump' needs a finite realization set (telegraph, tlf_ensemble, non-Gaussian one_over_f), not " + b.kind());
    }
    return method;
}

struct ScatterModelOptions {
    LaplaceOptions laplace{};
    SeriesOptions series{};
    JumpModelOptions jump_model{};
    JumpSolveOptions jump_solve{};
};

inline ScatterResult scatter_model(const SystemParams& params, const NoiseModel& model, const FrequencyGrid& grid,
                                   Channel in, ScatterMethod method = ScatterMethod::automatic,
                                   ScatterModelOptions opt = {}) {
    const ScatterMethod m = resolve_method(model, method);
    SystemParams p = params;
    if (auto w = model.get_if<WithWhiteBackground>()) p = apply_white_background(params, w->gamma_wb);
    const NoiseModel& b = detail::strip_background(model);
    switch (m) {
        case ScatterMethod::laplace: return scatter_from_envelope(p, envelope_function(b), grid, in, opt.laplace);
        case ScatterMethod::series: {
            const auto& cg = *b.get_if<ColoredGaussian>();
            return transmittance_ou_series(p, cg.sigma, cg.kappa, grid, in, opt.series);
        }
        case ScatterMethod::closed_form:
            if (auto w = b.get_if<White>()) return transmittance_white(p, w->gamma_phi, grid, in);
            if (auto t = b.get_if<Telegraph>()) return transmittance_telegraph(p, t->sigma, t->kappa, grid, in);
            if (auto c = b.get_if<ColoredGaussian>()) {
                if (c->sigma == 0.0) return transmittance_white(p, 0.0, grid, in);
                return transmittance_quasistatic(p, c->sigma, grid, in);
            }
            break;
        case ScatterMethod::jump: return scatter_jump(p, build_jump_model(b, opt.jump_model), grid, in, opt.jump_solve);
        case ScatterMethod::automatic: break;
    }
    throw std::logic_error("unreachable scatter method");
}

}  // namespace dephasing
