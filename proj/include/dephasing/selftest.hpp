#pragma once

#include <cmath>
#include <cstdio>
#include <functional>
#include <ostream>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "core.hpp"
#include "fano.hpp"
#include "noise.hpp"
#include "ramsey.hpp"
#include "scattering.hpp"

namespace dephasing {

// Quick deterministic checks; one line per check, true when all pass.
inline bool run_selftest(std::ostream& os) {
    struct Check {
        std::string name;
        std::function<double()> error;
        double tol;
    };
    const auto p = SystemParams::canonical();
    const auto grid = make_grid(-5.0, 5.0, 51);
    auto max_diff = [](const ComplexSpectrum& a, const ComplexSpectrum& b) {
        double m = 0.0;
        for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
        return m;
    };
    const std::vector<Check> checks = {
        {"noiseless resonance t(0) = 0.1",
         [&] { return std::abs(transmittance_white(p, 0.0, FrequencyGrid({0.0})).transmittance[0] - 0.1); }, 1e-12},
        {"telegraph jump solver = closed form",
         [&] {
             const NoiseModel m(Telegraph{2.0, 2.0});
             return max_diff(scatter_jump(p, build_jump_model(m), grid, Channel::plus).transmittance,
                             transmittance_telegraph(p, 2.0, 2.0, grid).transmittance);
         },
         1e-12},
        {"OU series = Laplace of envelope",
         [&] {
             return max_diff(transmittance_ou_series(p, 1.0, 2.0, grid).transmittance,
                             scatter_from_envelope(p, envelope_function(NoiseModel(ColoredGaussian{1.0, 2.0})), grid,
                                                   Channel::plus)
                                 .transmittance);
         },
         1e-6},
        {"white background = white closed form",
         [&] {
             const auto m = with_white_background(NoiseModel(White{0.0}), 0.3);
             return max_diff(scatter_model(p, m, grid, Channel::plus).transmittance,
                             transmittance_white(p, 0.3, grid).transmittance);
         },
         1e-12},
        {"flux conservation from output formulas",
         [&] {
             const auto s = transmittance_white(p, 1.0, grid);
             double m = 0.0;
             for (std::size_t i = 0; i < grid.size(); ++i)
                 m = std::max(m, flux_conservation(p, s.overlap[i], Channel::plus));
             return m;
         },
         1e-12},
        {"Fano z(omega_c) = 1", [&] { return std::abs(fano_z(0.7, FanoParams(0.7, 3.0)) - 1.0); }, 1e-15},
    };
    bool all = true;
    for (const auto& c : checks) {
        double e = 0.0;
        std::string note;
        try {
            e = c.error();
        } catch (const std::exception& x) {
            e = INFINITY;
            note = std::string(" (") + x.what() + ")";
        }
        const bool ok = e <= c.tol;
        all = all && ok;
        char buf[64];
        std::snprintf(buf, sizeof buf, "%.3g (tol %.0e)", e, c.tol);
        os << (ok ? "PASS " : "FAIL ") << c.name << ": " << buf << note << '\n';
    }
    return all;
}

}  // namespace dephasing
