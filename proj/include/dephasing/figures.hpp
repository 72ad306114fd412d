#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "core.hpp"
#include "io.hpp"
#include "noise.hpp"
#include "ramsey.hpp"
#include "scattering.hpp"

namespace dephasing::figures {

enum class Kind { envelope, transmittance, power_spectrum };

struct Curve {
    std::string label;
    NoiseModel model;
};

struct FigureSpec {
    std::string name;
    Kind kind = Kind::transmittance;
    SystemParams params = SystemParams::canonical();
    std::vector<Curve> curves;
    double x_min = 0.0, x_max = 0.0;  // detuning, time or angular frequency range
    std::size_t n_points = 0;
};

struct OneOverFSetup {
    int n = 8;
    double kappa_min = 1e-5, kappa_max = 10.0, sigma1 = 2.0, eta = 0.99;
    int M = 1;
};

inline OneOverF one_over_f_figure_model(bool gaussian, const OneOverFSetup& s = {}) {
    return OneOverF{one_over_f_components(s.n, s.kappa_min, s.kappa_max, s.sigma1, s.eta), gaussian, s.M};
}

inline const std::vector<std::string>& figure_names() {
    static const std::vector<std::string> names = {"fig2c", "fig3a", "fig4a", "fig4b", "fig4c",
                                                   "fig5b", "fig5c", "fig6b", "fig6c"};
    return names;
}

inline FigureSpec figure_spec(const std::string& name) {
    FigureSpec f;
    f.name = name;
    const double s_ou = 1.0, s_tel = 2.0;
    auto ou_family = [&] {
        f.curves = {{"kappa_10sigma", ColoredGaussian{s_ou, 10.0 * s_ou}},
                    {"kappa_2sigma", ColoredGaussian{s_ou, 2.0 * s_ou}},
                    {"kappa_0", ColoredGaussian{s_ou, 0.0}}};
    };
    auto telegraph_family = [&] {
        f.curves = {{"kappa_5sigma", Telegraph{s_tel, 5.0 * s_tel}},
                    {"kappa_1sigma", Telegraph{s_tel, s_tel}},
                    {"kappa_0.05sigma", Telegraph{s_tel, 0.05 * s_tel}}};
    };
    auto tlf_family = [&] {
        for (int M : {2, 3, 4, 5, 10})
            f.curves.push_back({"M" + std::to_string(M), TLFEnsemble{M, s_tel, 0.1 * s_tel}});
    };
    auto one_over_f_family = [&] {
        f.curves = {{"gaussian", one_over_f_figure_model(true)}, {"non_gaussian", one_over_f_figure_model(false)}};
    };
    if (name == "fig2c") {
        f.kind = Kind::envelope;
        ou_family();
        f.x_max = 5.0;
        f.n_points = 201;
    } else if (name == "fig3a") {
        ou_family();
        f.x_min = -5.0;
        f.x_max = 5.0;
        f.n_points = 401;
    } else if (name == "fig4a") {
        f.kind = Kind::power_spectrum;
        f.curves = {{"exact", one_over_f_figure_model(true)}};
        f.x_min = 1e-6;
        f.x_max = 1e6;
        f.n_points = 241;
    } else if (name == "fig4b") {
        one_over_f_family();
        f.x_min = -8.0;
        f.x_max = 8.0;
        f.n_points = 401;
    } else if (name == "fig4c") {
        f.kind = Kind::envelope;
        one_over_f_family();
        f.x_max = 3.0;
        f.n_points = 201;
    } else if (name == "fig5b") {
        telegraph_family();
        f.x_min = -8.0;
        f.x_max = 8.0;
        f.n_points = 401;
    } else if (name == "fig5c") {
        f.kind = Kind::envelope;
        telegraph_family();
        f.x_max = 3.0;
        f.n_points = 201;
    } else if (name == "fig6b") {
        tlf_family();
        f.x_min = -8.0;
        f.x_max = 8.0;
        f.n_points = 401;
    } else if (name == "fig6c") {
        f.kind = Kind::envelope;
        tlf_family();
        f.x_max = 3.0;
        f.n_points = 201;
    } else {
        std::string all;
        for (const auto& n : figure_names()) all += (all.empty() ? "" : ", ") + n;
        throw InvalidArgument("unknown figure '" + name + "' (" + all + ")");
    }
    return f;
}

struct FigureFile {
    std::string name;  // file stem
    io::Table table;
};

inline std::vector<FigureFile> figure_data(const FigureSpec& f) {
    std::vector<FigureFile> out;
    switch (f.kind) {
        case Kind::envelope: {
            const auto times = uniform_times(f.x_max, f.n_points);
            for (const auto& c : f.curves)
                out.push_back({f.name + "_" + c.label, io::envelope_table(sample_envelope(envelope_function(c.model), times))});
            break;
        }
        case Kind::transmittance: {
            const auto grid = make_grid(f.x_min, f.x_max, f.n_points);
            for (const auto& c : f.curves)
                out.push_back({f.name + "_" + c.label, io::scatter_table(scatter_model(f.params, c.model, grid, Channel::plus))});
            break;
        }
        case Kind::power_spectrum: {
            const OneOverFSetup s{};
            io::Table t;
            t.header = {"omega", "S_exact", "S_ideal"};
            const double a = std::log10(f.x_min), b = std::log10(f.x_max);
            for (std::size_t i = 0; i < f.n_points; ++i) {
                const double w = std::pow(10.0, a + (b - a) * double(i) / double(f.n_points - 1));
                t.add({w, power_spectrum(f.curves.front().model, w),
                       one_over_f_ideal_spectrum(s.sigma1, s.kappa_min, s.kappa_max, s.eta, w)});
            }
            out.push_back({f.name, std::move(t)});
            break;
        }
    }
    return out;
}

}  // namespace dephasing::figures
