// Transmittance of an emitter under Ornstein-Uhlenbeck dephasing, three ways.
#include <dephasing/dephasing.hpp>

#include <cstdio>

using namespace dephasing;

int main() {
    const auto p = SystemParams::canonical();
    const auto grid = make_grid(-4.0, 4.0, 9);
    const double sigma = 1.0, kappa = 2.0;

    const auto series = transmittance_ou_series(p, sigma, kappa, grid);
    const auto laplace = scatter_from_envelope(p, envelope_function(NoiseModel(ColoredGaussian{sigma, kappa})), grid, Channel::plus);
    const auto mc = overlap_mc_sweep(p, NoiseModel(ColoredGaussian{sigma, kappa}), grid.values(), 4000, 12.0, 42);

    std::printf("%8s %22s %22s %22s\n", "delta", "t (series)", "t (Laplace)", "t (trajectories)");
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx a = series.transmittance[i], b = laplace.transmittance[i];
        const cplx c = 1.0 - p.gamma_plus() * mc[i].mean;
        std::printf("%8.2f %10.6f%+10.6fi %10.6f%+10.6fi %10.6f%+10.6fi\n", grid[i], a.real(), a.imag(), b.real(),
                    b.imag(), c.real(), c.imag());
    }
}
