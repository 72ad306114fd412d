#pragma once

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace dephasing {

using cplx = std::complex<double>;

// Exit-code classes used by the CLI: 2, 3, 4.
struct InvalidArgument : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct ModelSizeError : InvalidArgument {
    using InvalidArgument::InvalidArgument;
};
struct ConvergenceError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct StatisticalCheckError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Tolerance for modulus bounds on analytic results.
inline constexpr double eps_num = 1e-9;

namespace detail {
inline void require(bool ok, const std::string& msg) {
    if (!ok) throw InvalidArgument(msg);
}
inline void require_finite(double v, std::string_view name) {
    if (!std::isfinite(v)) throw InvalidArgument(std::string(name) + " must be finite");
}
inline void require_rate(double v, std::string_view name) {
    require_finite(v, name);
    if (v < 0.0) throw InvalidArgument(std::string(name) + " must be >= 0");
}
}  // namespace detail

enum class Channel { plus, minus };

constexpr Channel opposite(Channel c) { return c == Channel::plus ? Channel::minus : Channel::plus; }
constexpr const char* to_string(Channel c) { return c == Channel::plus ? "+" : "-"; }

// Rates in units of Gamma; omega0 is metadata only.
class SystemParams {
public:
    SystemParams(double gamma_plus, double gamma_minus, double gamma_loss, double omega0 = 0.0,
                 double white_background = 0.0)
        : gp_(gamma_plus), gm_(gamma_minus), gl_(gamma_loss), w0_(omega0), wb_(white_background) {
        detail::require_rate(gp_, "gamma_plus");
        detail::require_rate(gm_, "gamma_minus");
        detail::require_rate(gl_, "gamma_loss");
        detail::require_finite(w0_, "omega0");
        detail::require_rate(wb_, "white_background");
        detail::require(total_decay() > 0.0, "Gamma = gamma_plus + gamma_minus + gamma_loss must be > 0");
    }

    // gamma_plus = gamma_minus = 0.45, gamma_loss = 0.1
    static SystemParams canonical() { return {0.45, 0.45, 0.1}; }

    double gamma_plus() const { return gp_; }
    double gamma_minus() const { return gm_; }
    double gamma_loss() const { return gl_; }
    double omega0() const { return w0_; }
    double white_background() const { return wb_; }

    double total_decay() const { return gp_ + gm_ + gl_; }
    double guided_decay() const { return gp_ + gm_; }
    double rate(Channel c) const { return c == Channel::plus ? gp_ : gm_; }
    double beta(Channel c) const { return rate(c) / total_decay(); }
    double loss_beta() const { return gl_ / total_decay(); }

    // Real part of the Laplace argument: Gamma/2 + gamma_WB.
    double half_width() const { return 0.5 * total_decay() + wb_; }

    friend bool operator==(const SystemParams&, const SystemParams&) = default;

private:
    double gp_, gm_, gl_, w0_, wb_;
};

class FrequencyGrid {
public:
    FrequencyGrid() = default;
    explicit FrequencyGrid(std::vector<double> detunings) : d_(std::move(detunings)) {
        detail::require(!d_.empty(), "frequency grid must be nonempty");
        for (double v : d_) detail::require_finite(v, "detuning");
        for (std::size_t i = 1; i < d_.size(); ++i)
            detail::require(d_[i] > d_[i - 1], "frequency grid must be strictly increasing");
    }

    std::size_t size() const { return d_.size(); }
    double operator[](std::size_t i) const { return d_[i]; }
    const std::vector<double>& values() const { return d_; }
    auto begin() const { return d_.begin(); }
    auto end() const { return d_.end(); }
    double front() const { return d_.front(); }
    double back() const { return d_.back(); }

    // Spacing deviations up to 1e3*rel_tol*h tolerate accumulated rounding.
    bool is_uniform(double rel_tol = 1e-9) const {
        if (d_.size() < 2) return false;
        const double h = (d_.back() - d_.front()) / double(d_.size() - 1);
        for (std::size_t i = 1; i < d_.size(); ++i)
            if (std::abs((d_[i] - d_[i - 1]) - h) > rel_tol * 1e3 * h) return false;
        return true;
    }
    double spacing() const {
        detail::require(is_uniform(), "frequency grid must be uniform");
        return (d_.back() - d_.front()) / double(d_.size() - 1);
    }
    // Symmetric about zero within a fraction of one spacing.
    bool is_symmetric() const {
        const std::size_t n = d_.size();
        for (std::size_t i = 0; i < n; ++i)
            if (std::abs(d_[i] + d_[n - 1 - i]) > 1e-9 * std::max(1.0, std::abs(d_[i]))) return false;
        return true;
    }

private:
    std::vector<double> d_;
};

inline FrequencyGrid make_grid(double delta_min, double delta_max, std::size_t n_points) {
    detail::require_finite(delta_min, "delta_min");
    detail::require_finite(delta_max, "delta_max");
    detail::require(n_points >= 2, "make_grid needs n_points >= 2");
    detail::require(delta_min < delta_max, "make_grid needs delta_min < delta_max");
    std::vector<double> d(n_points);
    const double h = (delta_max - delta_min) / double(n_points - 1);
    for (std::size_t i = 0; i < n_points; ++i) d[i] = delta_min + h * double(i);
    d.back() = delta_max;
    // Keep exact symmetry for symmetric bounds.
    if (delta_min == -delta_max)
        for (std::size_t i = 0; i < n_points / 2; ++i) d[n_points - 1 - i] = -d[i];
    if (delta_min == -delta_max && n_points % 2 == 1) d[n_points / 2] = 0.0;
    return FrequencyGrid(std::move(d));
}

// Uniform times 0, t_max/(n-1), ..., t_max.
inline std::vector<double> uniform_times(double t_max, std::size_t n_points) {
    detail::require_finite(t_max, "t_max");
    detail::require(t_max > 0.0, "t_max must be > 0");
    detail::require(n_points >= 2, "time grid needs at least 2 points");
    std::vector<double> t(n_points);
    for (std::size_t i = 0; i < n_points; ++i) t[i] = t_max * double(i) / double(n_points - 1);
    return t;
}

enum class SpectrumKind { transmittance, reflectance, loss_reflectance, overlap };

constexpr const char* to_string(SpectrumKind k) {
    switch (k) {
        case SpectrumKind::transmittance: return "transmittance";
        case SpectrumKind::reflectance: return "reflectance";
        case SpectrumKind::loss_reflectance: return "loss_reflectance";
        case SpectrumKind::overlap: return "overlap";
    }
    return "?";
}

struct ComplexSpectrum {
    FrequencyGrid grid;
    std::vector<cplx> values;
    SpectrumKind kind = SpectrumKind::transmittance;

    ComplexSpectrum() = default;
    ComplexSpectrum(FrequencyGrid g, std::vector<cplx> v, SpectrumKind k)
        : grid(std::move(g)), values(std::move(v)), kind(k) {
        detail::require(values.size() == grid.size(), "spectrum length must match grid length");
    }
    std::size_t size() const { return values.size(); }
    cplx operator[](std::size_t i) const { return values[i]; }

    std::vector<double> real() const {
        std::vector<double> r(values.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = values[i].real();
        return r;
    }
    std::vector<double> imag() const {
        std::vector<double> r(values.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = values[i].imag();
        return r;
    }
    std::vector<double> modulus() const {
        std::vector<double> r(values.size());
        for (std::size_t i = 0; i < r.size(); ++i) r[i] = std::abs(values[i]);
        return r;
    }
};

struct EnvelopeCurve {
    std::vector<double> times;
    std::vector<cplx> values;
    std::vector<double> std_error;  // empty unless Monte Carlo

    EnvelopeCurve() = default;
    EnvelopeCurve(std::vector<double> t, std::vector<cplx> v, std::vector<double> se = {})
        : times(std::move(t)), values(std::move(v)), std_error(std::move(se)) {
        detail::require(times.size() == values.size(), "envelope times/values length mismatch");
        detail::require(std_error.empty() || std_error.size() == times.size(),
                        "envelope std_error length mismatch");
        for (std::size_t i = 0; i < times.size(); ++i) {
            detail::require(std::isfinite(times[i]) && times[i] >= 0.0, "envelope times must be finite and >= 0");
            if (i > 0) detail::require(times[i] > times[i - 1], "envelope times must be increasing");
        }
    }
    std::size_t size() const { return times.size(); }
    bool has_errors() const { return !std_error.empty(); }
};

// Largest violation of C(0) = 1 and |C| <= 1 (zero when both hold within tol).
inline double envelope_invariant_violation(const EnvelopeCurve& c, double tol = eps_num) {
    double worst = 0.0;
    if (!c.times.empty() && c.times.front() == 0.0)
        worst = std::max(worst, std::abs(c.values.front() - 1.0) - tol);
    for (auto v : c.values) worst = std::max(worst, std::abs(v) - 1.0 - tol);
    return std::max(worst, 0.0);
}

struct EstimateWithError {
    cplx mean{};
    double std_error = 0.0;
    std::size_t n_samples = 0;

    EstimateWithError() = default;
    EstimateWithError(cplx m, double se, std::size_t n) : mean(m), std_error(se), n_samples(n) {
        detail::require(std::isfinite(se) && se >= 0.0, "std_error must be >= 0");
        detail::require(n >= 1, "n_samples must be >= 1");
    }
};

}  // namespace dephasing
