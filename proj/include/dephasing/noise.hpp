#pragma once

#include <Eigen/Dense>
#include <Eigen/Sparse>

#include <cmath>
#include <cstdint>
#include <memory>
#include <numbers>
#include <random>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include "core.hpp"
#include "detail/parallel.hpp"

namespace dephasing {

class NoiseModel;

// Delta-correlated dephasing, autocorrelation 2 gamma_phi delta(tau).
struct White {
    double gamma_phi = 0.0;
};
// Ornstein-Uhlenbeck process; kappa = 0 is quasi-static.
struct ColoredGaussian {
    double sigma = 0.0;
    double kappa = 0.0;
};
// Two values +-sigma, switching rate kappa.
struct Telegraph {
    double sigma = 0.0;
    double kappa = 0.0;
};
// M independent fluctuators, total values (2m - M) sigma / sqrt(M).
struct TLFEnsemble {
    int M = 1;
    double sigma = 0.0;
    double kappa = 0.0;
};
struct NoiseComponent {
    double kappa = 0.0;
    double sigma = 0.0;
    friend bool operator==(const NoiseComponent&, const NoiseComponent&) = default;
};
// Sum of N independent components scaled by 1/sqrt(N): OU processes when
// gaussian, otherwise M-fluctuator ensembles.
struct OneOverF {
    std::vector<NoiseComponent> components;
    bool gaussian = true;
    int M = 1;
};
struct WithWhiteBackground {
    std::shared_ptr<const NoiseModel> base;
    double gamma_wb = 0.0;
};

class NoiseModel {
public:
    using Variant = std::variant<White, ColoredGaussian, Telegraph, TLFEnsemble, OneOverF, WithWhiteBackground>;

    NoiseModel() : v_(White{0.0}) {}
    NoiseModel(White m) : v_(m) { detail::require_rate(m.gamma_phi, "gamma_phi"); }
    NoiseModel(ColoredGaussian m) : v_(m) {
        detail::require_rate(m.sigma, "sigma");
        detail::require_rate(m.kappa, "kappa");
    }
    NoiseModel(Telegraph m) : v_(m) {
        detail::require_rate(m.sigma, "sigma");
        detail::require_rate(m.kappa, "kappa");
    }
    NoiseModel(TLFEnsemble m) : v_(m) {
        detail::require(m.M >= 1, "M must be >= 1");
        detail::require_rate(m.sigma, "sigma");
        detail::require_rate(m.kappa, "kappa");
    }
    NoiseModel(OneOverF m) : v_(std::move(m)) {
        const auto& f = std::get<OneOverF>(v_);
        detail::require(!f.components.empty(), "1/f model needs at least one component");
        detail::require(f.M >= 1, "M must be >= 1");
        for (const auto& c : f.components) {
            detail::require_rate(c.kappa, "component kappa");
            detail::require_rate(c.sigma, "component sigma");
        }
    }
    NoiseModel(WithWhiteBackground m) : v_(std::move(m)) {
        const auto& w = std::get<WithWhiteBackground>(v_);
        detail::require(w.base != nullptr, "white background needs a base model");
        detail::require_rate(w.gamma_wb, "gamma_wb");
        detail::require(!std::holds_alternative<WithWhiteBackground>(w.base->variant()),
                        "nested white backgrounds are not allowed; add the rates instead");
    }

    const Variant& variant() const { return v_; }
    template <class T>
    const T* get_if() const { return std::get_if<T>(&v_); }
    template <class T>
    bool is() const { return std::holds_alternative<T>(v_); }

    std::string kind() const {
        static const char* names[] = {"white", "colored_gaussian", "telegraph", "tlf_ensemble", "one_over_f",
                                      "with_white_background"};
        return names[v_.index()];
    }

private:
    Variant v_;
};

inline NoiseModel with_white_background(const NoiseModel& base, double gamma_wb) {
    return NoiseModel(WithWhiteBackground{std::make_shared<const NoiseModel>(base), gamma_wb});
}

// The model as independent building blocks. Each source contributes
// amplitude * (OU unit process) or amplitude * (sum of count +-1 fluctuators).
struct NoiseSource {
    enum class Kind { ou, fluctuators };
    Kind kind = Kind::ou;
    double amplitude = 0.0;
    double kappa = 0.0;
    int count = 1;

    double variance() const { return kind == Kind::ou ? amplitude * amplitude : count * amplitude * amplitude; }
};

struct NoiseDecomposition {
    std::vector<NoiseSource> sources;
    double white_rate = 0.0;  // gamma_phi of all delta-correlated parts
};

inline NoiseDecomposition decompose(const NoiseModel& model) {
    NoiseDecomposition d;
    using K = NoiseSource::Kind;
    std::visit(
        [&](const auto& m) {
            using T = std::decay_t<decltype(m)>;
            if constexpr (std::is_same_v<T, White>) {
                d.white_rate = m.gamma_phi;
            } else if constexpr (std::is_same_v<T, ColoredGaussian>) {
                d.sources.push_back({K::ou, m.sigma, m.kappa, 1});
            } else if constexpr (std::is_same_v<T, Telegraph>) {
                d.sources.push_back({K::fluctuators, m.sigma, m.kappa, 1});
            } else if constexpr (std::is_same_v<T, TLFEnsemble>) {
                d.sources.push_back({K::fluctuators, m.sigma / std::sqrt(double(m.M)), m.kappa, m.M});
            } else if constexpr (std::is_same_v<T, OneOverF>) {
                const double n = double(m.components.size());
                for (const auto& c : m.components) {
                    if (m.gaussian)
                        d.sources.push_back({K::ou, c.sigma / std::sqrt(n), c.kappa, 1});
                    else
                        d.sources.push_back({K::fluctuators, c.sigma / std::sqrt(n * m.M), c.kappa, m.M});
                }
            } else {
                d = decompose(*m.base);
                d.white_rate += m.gamma_wb;
            }
        },
        model.variant());
    return d;
}

// ---------------------------------------------------------------- statistics

inline double autocorrelation(const NoiseModel& model, double tau) {
    detail::require(std::isfinite(tau) && tau >= 0.0, "tau must be finite and >= 0");
    if (model.is<White>())
        throw InvalidArgument("white noise is delta-correlated: no finite pointwise autocorrelation");
    // With a white background only the finite part is returned (tau > 0 value, extended to 0).
    double acf = 0.0;
    for (const auto& s : decompose(model).sources) acf += s.variance() * std::exp(-s.kappa * tau);
    return acf;
}

inline double power_spectrum(const NoiseModel& model, double omega) {
    detail::require_finite(omega, "omega");
    const auto d = decompose(model);
    double s = 2.0 * d.white_rate;
    for (const auto& src : d.sources) {
        const double v = src.variance();
        if (v == 0.0) continue;
        if (src.kappa == 0.0) {
            if (omega == 0.0) throw InvalidArgument("quasi-static noise has a delta peak at omega = 0");
            continue;
        }
        s += 2.0 * src.kappa * v / (src.kappa * src.kappa + omega * omega);
    }
    return s;
}

inline double correlation_time(const NoiseModel& model) {
    const auto d = decompose(model);
    double var = 0.0, integral = 0.0;
    for (const auto& s : d.sources) {
        const double v = s.variance();
        if (v == 0.0) continue;
        if (s.kappa == 0.0) throw InvalidArgument("infinite correlation time for quasi-static noise (kappa = 0)");
        var += v;
        integral += v / s.kappa;
    }
    if (var == 0.0) {
        if (d.white_rate > 0.0 || model.is<White>()) return 0.0;
        throw InvalidArgument("correlation time undefined for zero-variance noise");
    }
    return integral / var;
}

// Log-uniform rates from kappa_min to kappa_max, sigma_j = sigma1 (kappa_1/kappa_j)^((eta-1)/2).
inline std::vector<NoiseComponent> one_over_f_components(int N, double kappa_min, double kappa_max, double sigma1,
                                                         double eta) {
    detail::require(N >= 2, "1/f recipe needs N >= 2");
    detail::require_finite(kappa_min, "kappa_min");
    detail::require_finite(kappa_max, "kappa_max");
    detail::require(kappa_min > 0.0 && kappa_min < kappa_max, "1/f recipe needs 0 < kappa_min < kappa_max");
    detail::require_rate(sigma1, "sigma1");
    detail::require(eta > 0.0 && eta < 2.0, "eta must lie in (0, 2)");
    std::vector<NoiseComponent> c(N);
    const double span = std::log(kappa_max / kappa_min);
    for (int j = 0; j < N; ++j) {
        const double k = (j + 1 == N) ? kappa_max : kappa_min * std::exp(span * j / (N - 1));
        c[j] = {k, sigma1 * std::pow(kappa_min / k, 0.5 * (eta - 1.0))};
    }
    return c;
}

// Power law the recipe approximates between kappa_min and kappa_max.
inline double one_over_f_ideal_spectrum(double sigma1, double kappa_min, double kappa_max, double eta, double omega) {
    const double amp = std::numbers::pi * sigma1 * sigma1 * std::pow(kappa_min, eta - 1.0) /
                       (std::sin(0.5 * std::numbers::pi * eta) * std::log(kappa_max / kappa_min));
    return amp / std::pow(std::abs(omega), eta);
}

struct RateScales {
    double sigma = 0.0;  // rms amplitude of the sampled part
    double kappa = 0.0;  // fastest switching or relaxation rate
};

inline RateScales rate_scales(const NoiseModel& model) {
    RateScales r;
    double var = 0.0;
    for (const auto& s : decompose(model).sources) {
        var += s.variance();
        if (s.variance() > 0.0) r.kappa = std::max(r.kappa, s.kappa);
    }
    r.sigma = std::sqrt(var);
    return r;
}

// ------------------------------------------------------------------ sampling

// Streams Delta(t) starting from the stationary law. Step coefficients are
// cached, so a constant dt costs one exp per source.
class NoiseSampler {
public:
    NoiseSampler(const std::vector<NoiseSource>& sources, Rng& rng) : rng_(&rng) {
        std::normal_distribution<double> normal;
        std::bernoulli_distribution coin(0.5);
        for (const auto& s : sources) {
            if (s.variance() == 0.0) continue;
            State st;
            st.src = s;
            if (s.kind == NoiseSource::Kind::ou) {
                st.value = s.amplitude * normal(rng);
            } else {
                st.signs.resize(s.count);
                int up = 0;
                for (auto& sg : st.signs) {
                    sg = coin(rng) ? 1 : -1;
                    up += sg;
                }
                st.value = s.amplitude * up;
            }
            states_.push_back(std::move(st));
        }
        sum();
    }

    double value() const { return value_; }

    double advance(double dt) {
        if (dt != dt_) prepare(dt);
        std::normal_distribution<double> normal;
        std::uniform_real_distribution<double> uniform;
        for (auto& st : states_) {
            if (st.src.kind == NoiseSource::Kind::ou) {
                if (st.kick > 0.0) st.value = st.value * st.decay + st.kick * normal(*rng_);
            } else if (st.flip > 0.0) {
                int up = 0;
                for (auto& sg : st.signs) {
                    if (uniform(*rng_) < st.flip) sg = -sg;
                    up += sg;
                }
                st.value = st.src.amplitude * up;
            }
        }
        sum();
        return value_;
    }

private:
    struct State {
        NoiseSource src;
        double value = 0.0;
        double decay = 1.0, kick = 0.0, flip = 0.0;
        std::vector<int> signs;
    };
    void prepare(double dt) {
        detail::require(std::isfinite(dt) && dt > 0.0, "time step must be > 0");
        for (auto& st : states_) {
            const auto& s = st.src;
            if (s.kind == NoiseSource::Kind::ou) {
                st.decay = std::exp(-s.kappa * dt);
                st.kick = s.amplitude * std::sqrt(-std::expm1(-2.0 * s.kappa * dt));
            } else {
                if (s.kappa * dt > 0.1 * (1.0 + 1e-9))
                    throw InvalidArgument("fluctuator step bound violated: kappa*dt = " + std::to_string(s.kappa * dt) +
                                          " > 0.1");
                st.flip = -0.5 * std::expm1(-s.kappa * dt);
            }
        }
        dt_ = dt;
    }
    void sum() {
        value_ = 0.0;
        for (const auto& st : states_) value_ += st.value;
    }
    Rng* rng_;
    std::vector<State> states_;
    double value_ = 0.0;
    double dt_ = -1.0;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<double> values;
};

namespace detail {
inline double uniform_step(const std::vector<double>& times) {
    require(times.size() >= 2, "time grid needs at least 2 points");
    const double dt = (times.back() - times.front()) / double(times.size() - 1);
    require(dt > 0.0, "time grid must be increasing");
    for (std::size_t i = 1; i < times.size(); ++i)
        require(std::abs(times[i] - times[i - 1] - dt) <= 1e-9 * dt, "time grid must be uniform");
    return dt;
}
inline void require_samplable(const NoiseModel& model) {
    if (model.is<White>()) throw InvalidArgument("white noise is never sampled; it enters analytically");
    if (model.is<WithWhiteBackground>())
        throw InvalidArgument("sample the base model; the white background enters analytically");
}
}  // namespace detail

inline Trajectory sample_trajectory(const NoiseModel& model, const std::vector<double>& times, std::uint64_t seed) {
    detail::require_samplable(model);
    const double dt = detail::uniform_step(times);
    Rng rng = make_stream(seed, 0);
    NoiseSampler sampler(decompose(model).sources, rng);
    Trajectory tr{times, std::vector<double>(times.size())};
    tr.values[0] = sampler.value();
    for (std::size_t k = 1; k < times.size(); ++k) tr.values[k] = sampler.advance(dt);
    return tr;
}

// -------------------------------------------------------------- jump models

struct JumpModel {
    std::vector<double> realizations;
    Eigen::SparseMatrix<double> transition;  // column n holds the rates out of state n
    std::vector<double> stationary;

    std::size_t size() const { return realizations.size(); }
    Eigen::MatrixXd dense_transition() const { return Eigen::MatrixXd(transition); }

    struct Residuals {
        double column_sum = 0.0;       // max |sum_m W_mn|
        double stationarity = 0.0;     // max |(W P)_m|
        double normalization = 0.0;    // |sum P - 1|
        double mean = 0.0;             // |sum Delta P|
        double negative_rate = 0.0;    // most negative off-diagonal entry (as a positive number)
    };
    Residuals residuals() const {
        Residuals r;
        const Eigen::Index n = transition.rows();
        Eigen::VectorXd p = Eigen::Map<const Eigen::VectorXd>(stationary.data(), n);
        Eigen::VectorXd cols = Eigen::VectorXd::Zero(n);
        for (Eigen::Index k = 0; k < transition.outerSize(); ++k)
            for (Eigen::SparseMatrix<double>::InnerIterator it(transition, k); it; ++it) {
                cols[it.col()] += it.value();
                if (it.row() != it.col()) r.negative_rate = std::max(r.negative_rate, -it.value());
            }
        r.column_sum = cols.cwiseAbs().maxCoeff();
        r.stationarity = (transition * p).cwiseAbs().maxCoeff();
        r.normalization = std::abs(p.sum() - 1.0);
        double m = 0.0;
        for (std::size_t i = 0; i < realizations.size(); ++i) m += realizations[i] * stationary[i];
        r.mean = std::abs(m);
        return r;
    }
};

struct JumpModelOptions {
    std::size_t max_states = 65536;
};

namespace detail {
// C(M, m) / 2^M, exact in binary for the ensemble sizes in use.
inline double binomial_probability(int M, int m) {
    double c = 1.0;
    for (int k = 1; k <= m; ++k) c = c * double(M - m + k) / double(k);
    return std::ldexp(c, -M);
}
}  // namespace detail

// Explicit chain from a list of fluctuator ensembles (mixed-radix state index).
inline JumpModel jump_model_from_sources(const std::vector<NoiseSource>& sources, JumpModelOptions opt = {}) {
    double states = 1.0;
    for (const auto& s : sources) {
        if (s.kind != NoiseSource::Kind::fluctuators)
            throw InvalidArgument("Gaussian noise has no finite realization set; no jump model");
        states *= double(s.count + 1);
    }
    if (states > double(opt.max_states)) {
        std::string desc;
        if (!sources.empty())
            desc = "(M+1)^N = (" + std::to_string(sources.front().count) + "+1)^" + std::to_string(sources.size()) + " = ";
        throw ModelSizeError("jump model too large: " + desc + std::to_string(static_cast<long long>(states)) +
                             " states exceeds cap " + std::to_string(opt.max_states));
    }
    const std::size_t n = static_cast<std::size_t>(states);
    JumpModel jm;
    jm.realizations.assign(n, 0.0);
    jm.stationary.assign(n, 1.0);
    std::vector<Eigen::Triplet<double>> trip;
    std::vector<int> digit(sources.size());
    std::vector<std::size_t> stride(sources.size());
    {
        std::size_t st = 1;
        for (std::size_t j = 0; j < sources.size(); ++j) {
            stride[j] = st;
            st *= std::size_t(sources[j].count + 1);
        }
    }
    for (std::size_t idx = 0; idx < n; ++idx) {
        std::size_t rem = idx;
        double delta = 0.0, prob = 1.0, out_rate = 0.0;
        for (std::size_t j = 0; j < sources.size(); ++j) {
            const auto& s = sources[j];
            const int M = s.count, m = int(rem % std::size_t(M + 1));
            rem /= std::size_t(M + 1);
            digit[j] = m;
            delta += (2.0 * m - M) * s.amplitude;
            prob *= detail::binomial_probability(M, m);
            const double up = 0.5 * s.kappa * (M - m), down = 0.5 * s.kappa * m;
            if (m < M && up > 0.0) trip.emplace_back(int(idx + stride[j]), int(idx), up);
            if (m > 0 && down > 0.0) trip.emplace_back(int(idx - stride[j]), int(idx), down);
            out_rate += up + down;
        }
        if (out_rate > 0.0) trip.emplace_back(int(idx), int(idx), -out_rate);
        jm.realizations[idx] = delta;
        jm.stationary[idx] = prob;
    }
    jm.transition.resize(Eigen::Index(n), Eigen::Index(n));
    jm.transition.setFromTriplets(trip.begin(), trip.end());
    jm.transition.makeCompressed();
    return jm;
}

inline JumpModel build_jump_model(const NoiseModel& model, JumpModelOptions opt = {}) {
    if (model.is<White>() || model.is<ColoredGaussian>() ||
        (model.is<OneOverF>() && model.get_if<OneOverF>()->gaussian))
        throw InvalidArgument("Gaussian noise has no finite realization set; no jump model");
    if (model.is<WithWhiteBackground>())
        throw InvalidArgument("build the jump model of the base; the white background enters through SystemParams");
    return jump_model_from_sources(decompose(model).sources, opt);
}

}  // namespace dephasing
