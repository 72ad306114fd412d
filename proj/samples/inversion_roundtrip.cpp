// Recover the Ramsey envelope from a power-only transmittance measurement.
#include <dephasing/dephasing.hpp>

#include <cmath>
#include <cstdio>

using namespace dephasing;

int main() {
    const auto p = SystemParams::canonical();
    const NoiseModel noise(ColoredGaussian{1.0, 2.0});
    const auto grid = make_grid(-200.0, 200.0, 8001);
    const auto s = scatter_model(p, noise, grid, Channel::plus);

    const auto inv = envelope_from_transmittance(p, grid, s.transmittance.real(), Channel::plus);
    const auto exact = envelope_function(noise);
    std::printf("%6s %12s %12s\n", "t", "recovered", "exact");
    for (std::size_t k = 0; k < inv.normalized.size(); k += std::max<std::size_t>(1, inv.normalized.size() / 12)) {
        const double t = inv.normalized.times[k];
        std::printf("%6.3f %12.6f %12.6f\n", t, inv.normalized.values[k].real(), exact(t));
    }
}
