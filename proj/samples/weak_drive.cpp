// Weak coherent drive: the steady-state coherence maps onto the averaged overlap.
#include <dephasing/dephasing.hpp>

#include <cstdio>

using namespace dephasing;

int main() {
    const auto p = SystemParams::canonical();
    const NoiseModel noise(Telegraph{1.0, 0.5});
    const std::vector<double> detunings = {-2.0, -1.0, 0.0, 1.0, 2.0};
    const auto ss = bloch_sweep(p, noise, cplx(0.02, 0.0), detunings, Channel::plus, 2000, 7);
    const auto exact = transmittance_telegraph(p, 1.0, 0.5, FrequencyGrid(detunings));
    std::printf("%6s %24s %24s %10s\n", "delta", "homodyne t", "closed-form t", "flux res.");
    for (std::size_t i = 0; i < ss.size(); ++i) {
        const auto o = output_observables(p, ss[i].coherence_over_omega.mean, Channel::plus, Channel::plus);
        const auto f = flux_from_moments(p, ss[i], cplx(0.02, 0.0), Channel::plus);
        const cplx t = exact.transmittance[i];
        std::printf("%6.2f %11.6f%+11.6fi %11.6f%+11.6fi %10.2e\n", detunings[i], o.homodyne.real(), o.homodyne.imag(),
                    t.real(), t.imag(), f.residual);
    }
}
