#pragma once

#include <cmath>
#include <complex>
#include <cstdint>
#include <vector>

#include "core.hpp"
#include "detail/parallel.hpp"
#include "noise.hpp"
#include "ramsey.hpp"

namespace dephasing {

struct OverlapMcOptions {
    double dt = 0.0;  // 0: min(0.05/Gamma, 0.1/kappa, 0.1/sigma)
    std::size_t block = 64;
};

namespace detail {

inline double overlap_step(const SystemParams& p, const NoiseModel& model, double requested) {
    const auto r = rate_scales(model);
    double dt = requested;
    if (dt <= 0.0) {
        dt = 0.05 / p.total_decay();
        if (r.kappa > 0.0) dt = std::min(dt, 0.1 / r.kappa);
        if (r.sigma > 0.0) dt = std::min(dt, 0.1 / r.sigma);
    }
    if (r.kappa * dt > 0.1 * (1.0 + 1e-9) || r.sigma * dt > 0.1 * (1.0 + 1e-9))
        throw InvalidArgument("step bound violated: kappa*dt = " + std::to_string(r.kappa * dt) +
                              ", sigma*dt = " + std::to_string(r.sigma * dt) + " (both must be <= 0.1)");
    return dt;
}

}  // namespace detail

// dG/dt = -(h - i delta + i Delta(t)) G + 1 from G(0) = 0, recorded at t_ss and averaged.
// One trajectory drives all detunings, so the estimates are correlated across the sweep.
inline std::vector<EstimateWithError> overlap_mc_sweep(const SystemParams& params, const NoiseModel& model,
                                                       const std::vector<double>& detunings, std::size_t n_traj,
                                                       double t_ss, std::uint64_t seed, OverlapMcOptions opt = {}) {
    detail::require(n_traj >= 2, "need at least 2 trajectories");
    detail::require(std::isfinite(t_ss) && t_ss >= 10.0 / params.total_decay() * (1.0 - 1e-12),
                    "t_ss must be >= 10/Gamma");
    for (double d : detunings) detail::require_finite(d, "detuning");
    const auto dec = decompose(model);
    const double h = params.half_width() + dec.white_rate;
    const double dt = detail::overlap_step(params, model, opt.dt);
    const std::size_t steps = std::size_t(std::ceil(t_ss / dt * (1.0 - 1e-12)));
    const double step = t_ss / double(steps);
    const std::size_t nd = detunings.size();
    auto stats = detail::monte_carlo(
        n_traj, nd,
        [&](std::size_t i, std::vector<cplx>& out) {
            Rng rng = make_stream(seed, i);
            NoiseSampler noise(dec.sources, rng);
            std::fill(out.begin(), out.end(), cplx(0.0));
            double prev = noise.value();
            for (std::size_t k = 0; k < steps; ++k) {
                const double next = noise.advance(step);
                const double dbar = 0.5 * (prev + next);
                prev = next;
                for (std::size_t j = 0; j < nd; ++j) {
                    const cplx a(h, dbar - detunings[j]);
                    out[j] = std::exp(-a * step) * out[j] + step * detail::one_minus_exp_over(a * step);
                }
            }
        },
        opt.block);
    std::vector<EstimateWithError> res;
    res.reserve(nd);
    for (const auto& s : stats) res.emplace_back(s.mean, s.std_error, n_traj);
    return res;
}

inline EstimateWithError overlap_mc(const SystemParams& params, const NoiseModel& model, double delta,
                                    std::size_t n_traj, double t_ss, std::uint64_t seed, OverlapMcOptions opt = {}) {
    return overlap_mc_sweep(params, model, {delta}, n_traj, t_ss, seed, opt).front();
}

struct StationarityCheck {
    EstimateWithError origin;      // window [0, tau]
    EstimateWithError late;        // window [t - tau, t]
    EstimateWithError difference;  // late - origin, paired per trajectory
    bool consistent = true;        // |difference| <= 5 joint std errors
};

// Phase averages over a window of length tau at the origin and ending at t.
inline StationarityCheck stationary_phase_check(const NoiseModel& model, double t, double tau, std::size_t n_traj,
                                                std::uint64_t seed, EnvelopeMcOptions opt = {}) {
    detail::require_samplable(model);
    detail::require(n_traj >= 2, "need at least 2 trajectories");
    detail::require(std::isfinite(t) && std::isfinite(tau) && tau >= 0.0 && t >= tau, "need 0 <= tau <= t");
    StationarityCheck c;
    if (tau == 0.0) {
        c.origin = EstimateWithError(1.0, 0.0, n_traj);
        c.late = c.origin;
        c.difference = EstimateWithError(0.0, 0.0, n_traj);
        return c;
    }
    const auto dec = decompose(model);
    const double h_max = detail::max_noise_step(model);
    const std::size_t n_tau = std::isfinite(h_max) ? std::max<std::size_t>(1, std::size_t(std::ceil(tau / h_max))) : 1;
    const double step = tau / double(n_tau);
    // Late window starts after a whole number of steps, so every step has the same length.
    const std::size_t n_lead = std::size_t(std::llround((t - tau) / step));
    auto stats = detail::monte_carlo(
        n_traj, 3,
        [&](std::size_t i, std::vector<cplx>& out) {
            Rng rng = make_stream(seed, i);
            NoiseSampler s(dec.sources, rng);
            std::vector<double> inc(n_lead + n_tau);
            double prev = s.value();
            for (auto& v : inc) {
                const double next = s.advance(step);
                v = 0.5 * step * (prev + next);
                prev = next;
            }
            double early = 0.0, late = 0.0;
            for (std::size_t k = 0; k < n_tau; ++k) {
                early += inc[k];
                late += inc[n_lead + k];
            }
            out[0] = std::polar(1.0, -early);
            out[1] = std::polar(1.0, -late);
            out[2] = out[1] - out[0];
        },
        opt.block);
    c.origin = EstimateWithError(stats[0].mean, stats[0].std_error, n_traj);
    c.late = EstimateWithError(stats[1].mean, stats[1].std_error, n_traj);
    c.difference = EstimateWithError(stats[2].mean, stats[2].std_error, n_traj);
    c.consistent = std::abs(stats[2].mean) <= 5.0 * stats[2].std_error + 1e-15;
    return c;
}

}  // namespace dephasing
