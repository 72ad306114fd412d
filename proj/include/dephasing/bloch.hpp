#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "core.hpp"
#include "detail/parallel.hpp"
#include "noise.hpp"
#include "ramsey.hpp"
#include "scattering.hpp"

namespace dephasing {

struct DriveConfig {
    cplx rabi{0.05, 0.0};  // Omega in units of Gamma
    double detuning = 0.0;
    Channel input = Channel::plus;
};

inline constexpr double weak_drive_limit = 0.2;  // |Omega|/Gamma for weak-drive results

struct BlochOptions {
    double t_relax = 0.0;  // 0: 40/Gamma
    double window = 0.0;   // 0: 20/Gamma
    double dt = 0.0;       // 0: min(0.05/Gamma, 0.1/kappa, 0.1/sigma)
    double drift_floor = 1e-4;  // absolute slack of the split-half relaxation check
    bool check_relaxation = true;
    bool require_weak = true;
};

struct BlochSteadyState {
    double detuning = 0.0;
    EstimateWithError coherence_over_omega;  // <<sigma~^->>_ss / Omega
    EstimateWithError population;            // <<sigma_z>>_ss
    EstimateWithError overlap;               // G integrated on the same trajectories
    EstimateWithError deviation;             // coherence/Omega - G, paired per trajectory
    EstimateWithError identity_residual;     // Gamma(1+z)/2 - 2 Re(Omega^* s), exactly 0 in steady state
};

namespace detail {

struct BlochSlot {
    cplx s{}, g{};
    double z = -1.0;
};

inline double bloch_step(const SystemParams& p, const NoiseModel& model, double requested) {
    const auto r = rate_scales(model);
    double dt = requested > 0.0 ? requested : 0.05 / p.total_decay();
    if (requested <= 0.0) {
        if (r.kappa > 0.0) dt = std::min(dt, 0.1 / r.kappa);
        if (r.sigma > 0.0) dt = std::min(dt, 0.1 / r.sigma);
    }
    if (r.kappa * dt > 0.1 * (1.0 + 1e-9) || r.sigma * dt > 0.1 * (1.0 + 1e-9))
        throw InvalidArgument("step bound violated: need kappa*dt <= 0.1 and sigma*dt <= 0.1");
    return dt;
}

}  // namespace detail

// Stochastic Bloch equations in the frame of the drive:
//   ds/dt = -(h - i delta + i Delta) s - Omega z,   dz/dt = -Gamma (1 + z) + 4 Re(Omega^* s),
// h = Gamma/2 + gamma_WB + white part of the model. Exponential Euler with the
// step-averaged Delta; one noise trajectory drives every detuning.
inline std::vector<BlochSteadyState> bloch_sweep(const SystemParams& params, const NoiseModel& model, cplx rabi,
                                                 const std::vector<double>& detunings, Channel in, std::size_t n_traj,
                                                 std::uint64_t seed, BlochOptions opt = {}) {
    (void)in;  // the emitter dynamics do not depend on the input direction
    detail::require(n_traj >= 2, "need at least 2 trajectories");
    detail::require(std::abs(rabi) > 0.0, "Omega must be nonzero");
    const double Gam = params.total_decay();
    if (opt.require_weak && std::abs(rabi) / Gam > weak_drive_limit)
        throw InvalidArgument("|Omega|/Gamma = " + std::to_string(std::abs(rabi) / Gam) + " exceeds the weak-drive limit " +
                              std::to_string(weak_drive_limit));
    const double t_relax = opt.t_relax > 0.0 ? opt.t_relax : 40.0 / Gam;
    const double window = opt.window > 0.0 ? opt.window : 20.0 / Gam;
    detail::require(t_relax >= 10.0 / Gam * (1.0 - 1e-12), "t_relax must be >= 10/Gamma");
    const auto dec = decompose(model);
    const double h = params.half_width() + dec.white_rate;
    const double dt = detail::bloch_step(params, model, opt.dt);
    const std::size_t n_relax = std::size_t(std::ceil(t_relax / dt));
    std::size_t n_win = std::size_t(std::ceil(window / dt));
    n_win += n_win % 2;
    const std::size_t nd = detunings.size();
    const double ez = std::exp(-Gam * dt), fz = -std::expm1(-Gam * dt) / Gam;
    const double O2 = std::norm(rabi);

    // Per trajectory and detuning: window means of s/Omega, z, G, and the two halves.
    enum { C_FULL, C_H1, C_H2, G_FULL, Z_FULL, Z_H1, Z_H2, ID_FULL, N_SLOTS };
    auto stats = detail::monte_carlo(n_traj, nd * N_SLOTS, [&](std::size_t i, std::vector<cplx>& out) {
        Rng rng = make_stream(seed, i);
        NoiseSampler noise(dec.sources, rng);
        std::vector<detail::BlochSlot> st(nd);
        std::vector<cplx> acc(nd * N_SLOTS, 0.0);
        double prev = noise.value();
        const std::size_t total = n_relax + n_win;
        for (std::size_t k = 0; k < total; ++k) {
            const double next = noise.advance(dt);
            const double dbar = 0.5 * (prev + next);
            prev = next;
            for (std::size_t j = 0; j < nd; ++j) {
                auto& x = st[j];
                const cplx a(h, dbar - detunings[j]);
                const cplx e = std::exp(-a * dt), f = dt * detail::one_minus_exp_over(a * dt);
                const double drive = 4.0 * (std::conj(rabi) * x.s).real();
                const cplx s_new = e * x.s - f * rabi * x.z;
                x.z = ez * x.z + fz * (-Gam + drive);
                x.s = s_new;
                x.g = e * x.g + f;
                if (k >= n_relax) {
                    const bool first = (k - n_relax) < n_win / 2;
                    const cplx c = x.s / rabi;
                    cplx* o = &acc[j * N_SLOTS];
                    o[C_FULL] += c;
                    o[first ? C_H1 : C_H2] += c;
                    o[G_FULL] += x.g;
                    o[Z_FULL] += x.z;
                    o[first ? Z_H1 : Z_H2] += x.z;
                    o[ID_FULL] += 0.5 * Gam * (1.0 + x.z) - 2.0 * (std::conj(rabi) * x.s).real();
                }
            }
        }
        const double inv = 1.0 / double(n_win), inv_half = 2.0 / double(n_win);
        for (std::size_t j = 0; j < nd; ++j) {
            cplx* o = &acc[j * N_SLOTS];
            for (int q = 0; q < N_SLOTS; ++q) out[j * N_SLOTS + q] = o[q] * ((q == C_H1 || q == C_H2 || q == Z_H1 || q == Z_H2) ? inv_half : inv);
            // Store halves as their difference and the deviation in spare slots.
            out[j * N_SLOTS + C_H1] = out[j * N_SLOTS + C_H2] - out[j * N_SLOTS + C_H1];
            out[j * N_SLOTS + Z_H1] = out[j * N_SLOTS + Z_H2] - out[j * N_SLOTS + Z_H1];
            out[j * N_SLOTS + C_H2] = out[j * N_SLOTS + C_FULL] - out[j * N_SLOTS + G_FULL];
            out[j * N_SLOTS + Z_H2] = 0.0;
        }
    });

    std::vector<BlochSteadyState> res(nd);
    const std::size_t n = n_traj;
    for (std::size_t j = 0; j < nd; ++j) {
        const auto* s = &stats[j * N_SLOTS];
        auto& r = res[j];
        r.detuning = detunings[j];
        r.coherence_over_omega = EstimateWithError(s[C_FULL].mean, s[C_FULL].std_error, n);
        r.population = EstimateWithError(s[Z_FULL].mean.real(), s[Z_FULL].std_error, n);
        r.overlap = EstimateWithError(s[G_FULL].mean, s[G_FULL].std_error, n);
        r.deviation = EstimateWithError(s[C_H2].mean, s[C_H2].std_error, n);
        r.identity_residual = EstimateWithError(s[ID_FULL].mean.real(), s[ID_FULL].std_error, n);
        if (opt.check_relaxation) {
            const auto check = [&](const detail::SampleStats& d, double scale, const char* what) {
                if (std::abs(d.mean) > 3.0 * d.std_error + opt.drift_floor * std::max(1.0, scale))
                    throw StatisticalCheckError(std::string("steady state not reached: ") + what +
                                                " drifts by " + std::to_string(std::abs(d.mean)) + " between window halves (3 se = " +
                                                std::to_string(3.0 * d.std_error) + ") at delta = " +
                                                std::to_string(detunings[j]) + "; increase t_relax");
            };
            check(s[C_H1], std::abs(s[C_FULL].mean), "coherence/Omega");
            check(s[Z_H1], O2, "population");
        }
    }
    return res;
}

inline BlochSteadyState bloch_steady_state(const SystemParams& params, const NoiseModel& model, const DriveConfig& drive,
                                           std::size_t n_traj, std::uint64_t seed, BlochOptions opt = {}) {
    return bloch_sweep(params, model, drive.rabi, {drive.detuning}, drive.input, n_traj, seed, opt).front();
}

struct OutputObservables {
    cplx homodyne;  // <a_out>/alpha
    double power;   // <a_out^dag a_out>/|alpha|^2
};

// homodyne/alpha = delta_{la,mu} - sqrt(g_la g_mu) c,
// power/|alpha|^2 = delta_{la,mu} - 2 sqrt(g_la g_mu)(delta_{la,mu} - sqrt(b_la b_mu)) Re c.
inline OutputObservables output_observables(const SystemParams& p, cplx coherence_over_omega, Channel in, Channel out) {
    const double same = (in == out) ? 1.0 : 0.0;
    const double c = std::sqrt(p.rate(in) * p.rate(out));
    const double b = std::sqrt(p.beta(in) * p.beta(out));
    return {same - c * coherence_over_omega, same - 2.0 * c * (same - b) * coherence_over_omega.real()};
}

// |P_t + P_r + P_loss - 1| from the output formulas (loss channel by the same rule).
inline double flux_conservation(const SystemParams& p, cplx coherence_over_omega, Channel in) {
    const double gm = p.rate(in);
    const double rc = coherence_over_omega.real();
    const double pt = output_observables(p, coherence_over_omega, in, in).power;
    const double pr = output_observables(p, coherence_over_omega, in, opposite(in)).power;
    const double pl = 2.0 * gm * p.gamma_loss() / p.total_decay() * rc;
    return std::abs(pt + pr + pl - 1.0);
}

struct ChannelPowers {
    double transmitted = 0.0, reflected = 0.0, lost = 0.0;
    double residual = 0.0;
    double residual_std_error = 0.0;
};

// Output powers from the Monte Carlo moments <s>, <z> (any drive strength).
inline ChannelPowers flux_from_moments(const SystemParams& p, const BlochSteadyState& ss, cplx rabi, Channel in) {
    const double gm = p.rate(in), gr = p.rate(opposite(in)), gl = p.gamma_loss();
    const double O2 = std::norm(rabi);
    const double re_os = O2 * ss.coherence_over_omega.mean.real();  // Re(Omega^* s)
    const double up = 1.0 + ss.population.mean.real();
    ChannelPowers c;
    c.transmitted = 1.0 + gm * (-2.0 * re_os + gm * 0.5 * up) / O2;
    c.reflected = gm * gr * 0.5 * up / O2;
    c.lost = gm * gl * 0.5 * up / O2;
    c.residual = gm * std::abs(ss.identity_residual.mean.real()) / O2;
    c.residual_std_error = gm * ss.identity_residual.std_error / O2;
    return c;
}

struct SquaresDeficit {
    std::vector<double> deficit;        // 1 - (|t|^2 + |r|^2 + |r_loss|^2)
    std::vector<double> closed_form;    // 2 gamma_phi gamma_mu / ((Gamma/2 + gamma_phi)^2 + delta^2)
    std::vector<double> reference;      // gamma_phi gamma_mu / ((Gamma/2 + gamma_phi)^2 + delta^2), as printed
    double max_closed_form_error = 0.0;
    double max_reference_error = 0.0;
    double max_coherent_gap = 0.0;      // max |Re t - |t|^2|, zero without dephasing
};

// Squares of the averaged amplitudes under white dephasing.
inline SquaresDeficit squares_deficit_white(const SystemParams& p, double gamma_phi, const FrequencyGrid& grid,
                                            Channel in = Channel::plus) {
    const auto s = transmittance_white(p, gamma_phi, grid, in);
    const double gm = p.rate(in), hw = p.half_width() + gamma_phi;
    SquaresDeficit d;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const double sq = std::norm(s.transmittance[i]) + std::norm(s.reflectance[i]) + std::norm(s.loss_reflectance[i]);
        const double den = hw * hw + grid[i] * grid[i];
        d.deficit.push_back(1.0 - sq);
        d.closed_form.push_back(2.0 * gamma_phi * gm / den);
        d.reference.push_back(gamma_phi * gm / den);
        d.max_closed_form_error = std::max(d.max_closed_form_error, std::abs(d.deficit.back() - d.closed_form.back()));
        d.max_reference_error = std::max(d.max_reference_error, std::abs(d.deficit.back() - d.reference.back()));
        d.max_coherent_gap =
            std::max(d.max_coherent_gap, std::abs(s.transmittance[i].real() - std::norm(s.transmittance[i])));
    }
    return d;
}

}  // namespace dephasing
