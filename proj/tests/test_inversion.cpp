#include "catch_amalgamated.hpp"

#include <dephasing/inversion.hpp>
#include <dephasing/ramsey.hpp>
#include <dephasing/scattering.hpp>

using namespace dephasing;
using Catch::Matchers::WithinAbs;

namespace {
const SystemParams P = SystemParams::canonical();
const FrequencyGrid& wide_grid() {
    static const FrequencyGrid g = make_grid(-40, 40, 1 << 14);
    return g;
}
void check_roundtrip(const EnvelopeCurve& c, const std::function<double(double)>& ref, double tol, double t_max = 1e9) {
    std::size_t checked = 0;
    for (std::size_t k = 0; k < c.size(); ++k) {
        const double r = ref(c.times[k]);
        if (r < 0.05 || c.times[k] > t_max) continue;
        INFO("t = " << c.times[k] << " recovered " << c.values[k] << " expected " << r);
        CHECK(std::abs(c.values[k] - r) < tol);
        ++checked;
    }
    CHECK(checked > 5);
}
}  // namespace

TEST_CASE("Kramers-Kronig transform", "[inversion]") {
    const auto grid = make_grid(-200, 200, 8001);
    const auto w = transmittance_white(P, 0.1, grid);
    const auto kk = kramers_kronig(grid, w.transmittance.real());
    double worst = 0.0, odd = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        worst = std::max(worst, std::abs(kk.im_t[i] - w.transmittance[i].imag()));
        odd = std::max(odd, std::abs(kk.im_t[i] + kk.im_t[grid.size() - 1 - i]));
    }
    INFO("max |Im t error| " << worst);
    CHECK(worst < 1e-3);
    CHECK(odd < 1e-10);

    const std::vector<double> ones(grid.size(), 1.0);
    for (double v : kramers_kronig(grid, ones).im_t) CHECK(v == 0.0);

    const auto narrow = make_grid(-2, 2, 81);
    const auto n = transmittance_white(P, 0.1, narrow);
    KramersKronigOptions off;
    off.extrapolate_tail = false;
    CHECK_THROWS_AS(kramers_kronig(narrow, n.transmittance.real(), off), InvalidArgument);
    CHECK(kramers_kronig(narrow, n.transmittance.real()).tail_extrapolated);
}

TEST_CASE("power-route roundtrips", "[inversion]") {
    const auto& grid = wide_grid();
    InversionOptions o;
    SECTION("white") {
        const auto s = transmittance_white(P, 0.3, grid);
        const auto r = envelope_from_transmittance(P, grid, s.transmittance.real(), Channel::plus, o);
        check_roundtrip(r.raw, [](double t) { return std::exp(-0.3 * t); }, 2e-2, 4.0);
        CHECK(std::abs(r.raw.values.front() - 1.0) < 2e-2);
    }
    SECTION("noiseless") {
        const auto s = transmittance_white(P, 0.0, grid);
        const auto r = envelope_from_transmittance(P, grid, s.transmittance.real(), Channel::plus, o);
        check_roundtrip(r.raw, [](double) { return 1.0; }, 2e-2, 3.0);
    }
    SECTION("OU family") {
        for (double k : {10.0, 2.0}) {
            const auto s = transmittance_ou_series(P, 1.0, k, grid);
            const auto r = envelope_from_transmittance(P, grid, s.transmittance.real(), Channel::plus, o);
            INFO("kappa " << k);
            check_roundtrip(r.raw, [k](double t) { return ou_envelope_value(1.0, k, t); }, 2e-2);
        }
    }
    SECTION("quasi-static") {
        const auto s = transmittance_quasistatic(P, 1.0, grid);
        const auto r = envelope_from_transmittance(P, grid, s.transmittance.real(), Channel::plus, o);
        check_roundtrip(r.raw, [](double t) { return std::exp(-0.5 * t * t); }, 2e-2);
    }
}

TEST_CASE("complex and Kramers-Kronig routes", "[inversion]") {
    const auto& grid = wide_grid();
    const auto s = transmittance_white(P, 0.3, grid);
    const auto hom = envelope_from_complex_transmittance(P, s.transmittance, Channel::plus);
    check_roundtrip(hom.raw, [](double t) { return std::exp(-0.3 * t); }, 2e-2, 4.0);

    const auto ou = transmittance_ou_series(P, 1.0, 2.0, grid);
    const auto a = envelope_from_complex_transmittance(P, ou.transmittance, Channel::plus);
    const auto b = envelope_from_complex_transmittance(P, complete_transmittance(grid, ou.transmittance.real()), Channel::plus);
    const auto c = envelope_from_transmittance(P, grid, ou.transmittance.real(), Channel::plus);
    for (std::size_t k = 0; k < a.raw.size(); ++k) {
        if (ou_envelope_value(1.0, 2.0, a.raw.times[k]) < 0.05) continue;
        CHECK(std::abs(a.raw.values[k] - b.raw.values[k]) < 3e-2);
        CHECK(std::abs(a.raw.values[k] - c.raw.values[k]) < 2e-2);
        CHECK(std::abs(a.raw.values[k].imag()) < 2e-2);
    }
}

TEST_CASE("inversion argument checks", "[inversion]") {
    const auto asym = make_grid(-10, 20, 256);
    const std::vector<double> re(asym.size(), 1.0);
    CHECK_THROWS_AS(envelope_from_transmittance(P, asym, re, Channel::plus), InvalidArgument);
    const auto small = make_grid(-10, 10, 32);
    CHECK_THROWS_AS(envelope_from_transmittance(P, small, std::vector<double>(32, 1.0), Channel::plus), InvalidArgument);
    const auto g = make_grid(-10, 10, 1001);
    const auto s = transmittance_white(P, 0.3, g);
    InversionOptions far;
    far.t_max = 40.0;
    far.measurement_noise = 1e-3;
    CHECK_THROWS_AS(envelope_from_transmittance(P, g, s.transmittance.real(), Channel::plus, far), InvalidArgument);
    const auto ok = envelope_from_transmittance(P, wide_grid(),
                                                transmittance_white(P, 0.3, wide_grid()).transmittance.real(), Channel::plus);
    CHECK(ok.amplification == Catch::Approx(std::exp(0.5 * 6.0)));
    CHECK(ok.normalized.values.front() == cplx(1.0));
}
