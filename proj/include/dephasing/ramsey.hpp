#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>
#include <unsupported/Eigen/MatrixFunctions>
#include <boost/numeric/odeint.hpp>

#include <cmath>
#include <complex>
#include <functional>
#include <string>
#include <vector>

#include "core.hpp"
#include "detail/parallel.hpp"
#include "detail/quadrature.hpp"
#include "noise.hpp"

namespace dephasing {

using EnvelopeFunction = std::function<double(double)>;

namespace detail {

inline double sinc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 - x * x / 6.0;
    return std::sin(x) / x;
}
inline double sinhc(double x) {
    if (std::abs(x) < 1e-4) return 1.0 + x * x / 6.0;
    return std::sinh(x) / x;
}

// (e^{-x} + x - 1) / x^2, accurate down to x = 0.
inline double ou_shape(double x) {
    if (x < 1e-3) return 0.5 - x / 6.0 + x * x / 24.0 - x * x * x / 120.0;
    return (std::expm1(-x) + x) / (x * x);
}

}  // namespace detail

inline double ou_envelope_value(double sigma, double kappa, double t) {
    return std::exp(-sigma * sigma * t * t * detail::ou_shape(kappa * t));
}

// Two-state envelope; real and overflow free for all kappa, sigma.
inline double telegraph_envelope_value(double sigma, double kappa, double t) {
    if (sigma == 0.0 || t == 0.0) return 1.0;
    const double disc = kappa * kappa - 4.0 * sigma * sigma;
    const double decay = std::exp(-0.5 * kappa * t);
    if (disc < 0.0) {
        const double w = 0.5 * std::sqrt(-disc);
        return decay * (std::cos(w * t) + 0.5 * kappa * t * detail::sinc(w * t));
    }
    const double R = std::sqrt(disc);
    const double y = 0.5 * R * t;
    if (y < 0.5) return decay * (std::cosh(y) + 0.5 * kappa * t * detail::sinhc(y));
    const double v0 = kappa / R;
    const double vp = -2.0 * sigma * sigma / (kappa + R);  // (-kappa + R)/2 without cancellation
    const double vm = -0.5 * (kappa + R);
    return 0.5 * (1.0 + v0) * std::exp(vp * t) + 0.5 * (1.0 - v0) * std::exp(vm * t);
}

inline EnvelopeCurve sample_envelope(const EnvelopeFunction& f, const std::vector<double>& times) {
    std::vector<cplx> v(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) v[i] = f(times[i]);
    return EnvelopeCurve(times, std::move(v));
}

// exp(-int_0^t (t - tau) acf(tau) dtau), adaptive Simpson on the exponent.
inline EnvelopeCurve envelope_gaussian_from_acf(const EnvelopeFunction& acf, const std::vector<double>& times,
                                                double abs_tol = 1e-10) {
    std::vector<cplx> v(times.size());
    for (std::size_t i = 0; i < times.size(); ++i) {
        const double t = times[i];
        if (t == 0.0) {
            v[i] = 1.0;
            continue;
        }
        auto q = detail::adaptive_simpson([&](double tau) { return (t - tau) * acf(tau); }, 0.0, t, abs_tol);
        if (!q.converged || !std::isfinite(q.value))
            throw ConvergenceError("cumulant quadrature did not reach tolerance " + std::to_string(abs_tol) +
                                   " at t = " + std::to_string(t));
        v[i] = std::exp(-q.value);
    }
    return EnvelopeCurve(times, std::move(v));
}

inline EnvelopeCurve envelope_ou(double sigma, double kappa, const std::vector<double>& times) {
    detail::require_rate(sigma, "sigma");
    detail::require_rate(kappa, "kappa");
    return sample_envelope([=](double t) { return ou_envelope_value(sigma, kappa, t); }, times);
}

inline EnvelopeCurve envelope_telegraph(double sigma, double kappa, const std::vector<double>& times) {
    detail::require_rate(sigma, "sigma");
    detail::require_rate(kappa, "kappa");
    return sample_envelope([=](double t) { return telegraph_envelope_value(sigma, kappa, t); }, times);
}

// Exact envelope of any built-in model: independent sources multiply.
inline EnvelopeFunction envelope_function(const NoiseModel& model) {
    const auto d = decompose(model);
    return [d](double t) {
        double c = std::exp(-d.white_rate * t);
        for (const auto& s : d.sources) {
            if (s.variance() == 0.0) continue;
            if (s.kind == NoiseSource::Kind::ou)
                c *= ou_envelope_value(s.amplitude, s.kappa, t);
            else
                c *= std::pow(telegraph_envelope_value(s.amplitude, s.kappa, t), s.count);
        }
        return c;
    };
}

struct JumpEnvelopeOptions {
    std::size_t dense_limit = 512;  // matrix exponential up to this many states
    double abs_tol = 1e-12;
    double rel_tol = 1e-10;
};

// dx/dt = (-i diag(Delta) + W) x, x(0) = P_ss, C = sum x.
inline EnvelopeCurve envelope_jump(const JumpModel& jump, const std::vector<double>& times,
                                   JumpEnvelopeOptions opt = {}) {
    const Eigen::Index n = Eigen::Index(jump.size());
    detail::require(n > 0, "empty jump model");
    for (std::size_t i = 1; i < times.size(); ++i)
        detail::require(times[i] > times[i - 1], "times must be increasing");
    detail::require(times.empty() || times.front() >= 0.0, "times must be >= 0");
    std::vector<cplx> out(times.size());
    Eigen::VectorXcd x0(n);
    for (Eigen::Index m = 0; m < n; ++m) x0[m] = jump.stationary[m];

    if (std::size_t(n) <= opt.dense_limit) {
        Eigen::MatrixXcd A = jump.dense_transition().cast<cplx>();
        for (Eigen::Index m = 0; m < n; ++m) A(m, m) += cplx(0.0, -jump.realizations[m]);
        // Reuse the propagator while the step is unchanged (uniform grids need one).
        Eigen::MatrixXcd P;
        double last_dt = -1.0;
        Eigen::VectorXcd x = x0;
        double t_prev = 0.0;
        for (std::size_t k = 0; k < times.size(); ++k) {
            const double dt = times[k] - t_prev;
            if (dt > 0.0) {
                if (std::abs(dt - last_dt) > 1e-12 * dt) {
                    P = (A * dt).exp();
                    last_dt = dt;
                }
                x = P * x;
            }
            t_prev = times[k];
            out[k] = x.sum();
        }
        return EnvelopeCurve(times, std::move(out));
    }

    using State = std::vector<cplx>;
    const Eigen::SparseMatrix<cplx> W = jump.transition.cast<cplx>();
    auto rhs = [&](const State& x, State& dx, double) {
        Eigen::Map<const Eigen::VectorXcd> xv(x.data(), n);
        Eigen::Map<Eigen::VectorXcd> dv(dx.data(), n);
        dv = W * xv;
        for (Eigen::Index m = 0; m < n; ++m) dv[m] += cplx(0.0, -jump.realizations[m]) * xv[m];
    };
    State x(x0.data(), x0.data() + n);
    namespace ode = boost::numeric::odeint;
    auto stepper = ode::make_controlled(opt.abs_tol, opt.rel_tol, ode::runge_kutta_dopri5<State>());
    double t_prev = 0.0;
    try {
        for (std::size_t k = 0; k < times.size(); ++k) {
            if (times[k] > t_prev) {
                const double span = times[k] - t_prev;
                ode::integrate_adaptive(stepper, rhs, x, t_prev, times[k], span / 16.0);
            }
            t_prev = times[k];
            cplx c = 0.0;
            for (const auto& v : x) c += v;
            out[k] = c;
        }
    } catch (const std::exception& e) {
        throw ConvergenceError(std::string("jump-model ODE failed (") + e.what() +
                               "); try a finer time grid or a smaller state space");
    }
    return EnvelopeCurve(times, std::move(out));
}

struct EnvelopeMcOptions {
    std::size_t block = 64;  // trajectories per deterministic accumulation block
};

namespace detail {

// Largest step allowed by the sampler bounds (kappa dt, sigma dt <= 0.1).
// (1 - e^{-x})/x without cancellation for small |x|.
inline cplx one_minus_exp_over(cplx x) {
    if (std::abs(x) < 1e-3) return 1.0 - x / 2.0 + x * x / 6.0 - x * x * x / 24.0;
    return (1.0 - std::exp(-x)) / x;
}

inline double max_noise_step(const NoiseModel& model) {
    const auto r = rate_scales(model);
    double h = std::numeric_limits<double>::infinity();
    if (r.kappa > 0.0) h = std::min(h, 0.1 / r.kappa);
    if (r.sigma > 0.0) h = std::min(h, 0.1 / r.sigma);
    return h;
}

// Per output slot mean and standard error over n_traj trajectories. fn(i, out)
// fills out (size n_out) for trajectory i. Blocks are reduced pairwise so the
// result does not depend on the thread schedule.
template <class Fn>
std::vector<SampleStats> monte_carlo(std::size_t n_traj, std::size_t n_out, Fn&& fn, std::size_t block = 64) {
    const std::size_t n_blocks = (n_traj + block - 1) / block;
    std::vector<std::vector<cplx>> sums(n_blocks, std::vector<cplx>(n_out));
    std::vector<std::vector<double>> sq(n_blocks, std::vector<double>(n_out));
    parallel_for(n_blocks, [&](std::size_t b) {
        std::vector<cplx> v(n_out);
        for (std::size_t i = b * block; i < std::min(n_traj, (b + 1) * block); ++i) {
            fn(i, v);
            for (std::size_t j = 0; j < n_out; ++j) {
                sums[b][j] += v[j];
                sq[b][j] += std::norm(v[j]);
            }
        }
    });
    std::vector<SampleStats> out(n_out);
    std::vector<cplx> col(n_blocks);
    std::vector<double> colsq(n_blocks);
    const double n = double(n_traj);
    for (std::size_t j = 0; j < n_out; ++j) {
        for (std::size_t b = 0; b < n_blocks; ++b) {
            col[b] = sums[b][j];
            colsq[b] = sq[b][j];
        }
        const cplx mean = pairwise_sum(col) / n;
        const double var = n > 1 ? std::max(0.0, (pairwise_sum(colsq) - n * std::norm(mean)) / (n - 1.0)) : 0.0;
        out[j] = {mean, std::sqrt(var / n)};
    }
    return out;
}

}  // namespace detail

// Average of exp(-i int_0^t Delta) over sampled trajectories (trapezoid phase).
inline EnvelopeCurve envelope_mc(const NoiseModel& model, const std::vector<double>& times, std::size_t n_traj,
                                 std::uint64_t seed, EnvelopeMcOptions opt = {}) {
    detail::require_samplable(model);
    detail::require(n_traj >= 100, "envelope_mc needs n_traj >= 100");
    for (std::size_t i = 0; i < times.size(); ++i) {
        detail::require(std::isfinite(times[i]) && times[i] >= 0.0, "times must be >= 0");
        if (i > 0) detail::require(times[i] > times[i - 1], "times must be increasing");
    }
    const double h_max = detail::max_noise_step(model);
    const auto sources = decompose(model).sources;
    auto stats = detail::monte_carlo(
        n_traj, times.size(),
        [&](std::size_t i, std::vector<cplx>& out) {
            Rng rng = make_stream(seed, i);
            NoiseSampler s(sources, rng);
            double phase = 0.0, t = 0.0, prev = s.value();
            for (std::size_t k = 0; k < times.size(); ++k) {
                const double span = times[k] - t;
                if (span > 0.0) {
                    const std::size_t steps = std::isfinite(h_max) ? std::size_t(std::ceil(span / h_max * (1.0 - 1e-12))) : 1;
                    const double h = span / double(std::max<std::size_t>(steps, 1));
                    for (std::size_t q = 0; q < std::max<std::size_t>(steps, 1); ++q) {
                        const double next = s.advance(h);
                        phase += 0.5 * h * (prev + next);
                        prev = next;
                    }
                }
                t = times[k];
                out[k] = std::polar(1.0, -phase);
            }
        },
        opt.block);
    std::vector<cplx> v(times.size());
    std::vector<double> se(times.size());
    for (std::size_t k = 0; k < times.size(); ++k) {
        v[k] = stats[k].mean;
        se[k] = stats[k].std_error;
    }
    return EnvelopeCurve(times, std::move(v), std::move(se));
}

struct CoherenceDecay {
    std::vector<double> times;
    std::vector<cplx> coherence;    // rotating frame, omega0 phase dropped
    std::vector<double> population;  // <sigma_z>, from 0 toward -1
};

inline CoherenceDecay coherence_decay(const SystemParams& params, const EnvelopeCurve& envelope) {
    const double G = params.total_decay();
    CoherenceDecay d{envelope.times, std::vector<cplx>(envelope.size()), std::vector<double>(envelope.size())};
    for (std::size_t k = 0; k < envelope.size(); ++k) {
        const double t = envelope.times[k];
        d.coherence[k] = 0.5 * std::exp(-0.5 * G * t) * envelope.values[k];
        d.population[k] = std::exp(-G * t) - 1.0;
    }
    return d;
}

}  // namespace dephasing
