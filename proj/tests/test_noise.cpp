#include "catch_amalgamated.hpp"

#include <dephasing/noise.hpp>
#include <dephasing/detail/quadrature.hpp>

#include <cmath>
#include <numbers>

using namespace dephasing;
using Catch::Matchers::WithinAbs;
using Catch::Matchers::WithinRel;

TEST_CASE("noise models validate their parameters", "[noise]") {
    CHECK_THROWS_AS(NoiseModel(White{-1.0}), InvalidArgument);
    CHECK_THROWS_AS(NoiseModel(ColoredGaussian{1.0, NAN}), InvalidArgument);
    CHECK_THROWS_AS(NoiseModel(TLFEnsemble{0, 1.0, 1.0}), InvalidArgument);
    CHECK_THROWS_AS(NoiseModel(OneOverF{{}, true, 1}), InvalidArgument);
    const auto wb = with_white_background(NoiseModel(Telegraph{1.0, 1.0}), 0.1);
    CHECK_THROWS_AS(with_white_background(wb, 0.2), InvalidArgument);
    CHECK(wb.kind() == "with_white_background");
}

TEST_CASE("autocorrelation values", "[noise]") {
    CHECK(autocorrelation(NoiseModel(ColoredGaussian{1.0, 2.0}), 0.0) == 1.0);
    CHECK_THAT(autocorrelation(NoiseModel(Telegraph{2.0, 1.0}), std::log(2.0)), WithinAbs(2.0, 1e-14));
    const NoiseModel f(OneOverF{{{1.0, 1.0}, {2.0, 1.0}}, true, 1});
    CHECK_THAT(autocorrelation(f, 0.0), WithinAbs(1.0, 1e-15));
    CHECK_THROWS_AS(autocorrelation(NoiseModel(White{0.3}), 0.5), InvalidArgument);
    const auto wb = with_white_background(NoiseModel(ColoredGaussian{1.0, 1.0}), 0.4);
    CHECK_THAT(autocorrelation(wb, 0.7), WithinAbs(std::exp(-0.7), 1e-15));
}

TEST_CASE("ensembles share the single-fluctuator autocorrelation", "[noise]") {
    for (int M : {1, 2, 5, 10})
        for (double tau : {0.0, 0.3, 2.0})
            CHECK_THAT(autocorrelation(NoiseModel(TLFEnsemble{M, 1.5, 0.7}), tau),
                       WithinAbs(2.25 * std::exp(-0.7 * tau), 1e-13));
}

TEST_CASE("power spectrum values", "[noise]") {
    CHECK_THAT(power_spectrum(NoiseModel(ColoredGaussian{1.0, 1.0}), 0.0), WithinAbs(2.0, 1e-15));
    CHECK_THAT(power_spectrum(NoiseModel(ColoredGaussian{1.0, 1.0}), 1.0), WithinAbs(1.0, 1e-15));
    CHECK_THAT(power_spectrum(NoiseModel(White{0.3}), 17.0), WithinAbs(0.6, 1e-15));
    CHECK_THROWS_AS(power_spectrum(NoiseModel(ColoredGaussian{1.0, 0.0}), 0.0), InvalidArgument);
}

TEST_CASE("power spectrum is the cosine transform of the autocorrelation", "[noise]") {
    const NoiseModel m(ColoredGaussian{1.3, 0.8});
    for (double w : {0.0, 0.5, 3.0}) {
        auto f = [&](double tau) { return cplx(2.0 * std::cos(w * tau) * autocorrelation(m, tau), 0.0); };
        const auto q = detail::gk_integrate(f, 0.0, 60.0, 1.0);
        CHECK_THAT(q.value.real(), WithinAbs(power_spectrum(m, w), 1e-6));
    }
}

TEST_CASE("correlation times", "[noise]") {
    CHECK_THAT(correlation_time(NoiseModel(ColoredGaussian{3.0, 2.0})), WithinAbs(0.5, 1e-15));
    CHECK_THAT(correlation_time(NoiseModel(Telegraph{1.0, 4.0})), WithinAbs(0.25, 1e-15));
    CHECK_THAT(correlation_time(NoiseModel(OneOverF{{{1.0, 1.0}, {2.0, 1.0}}, true, 1})), WithinAbs(0.75, 1e-15));
    CHECK(correlation_time(NoiseModel(White{0.5})) == 0.0);
    CHECK_THROWS_AS(correlation_time(NoiseModel(ColoredGaussian{1.0, 0.0})), InvalidArgument);
}

TEST_CASE("1/f recipe components", "[noise]") {
    const auto two = one_over_f_components(2, 1.0, 10.0, 1.0, 1.0);
    REQUIRE(two.size() == 2);
    CHECK(two[0].kappa == 1.0);
    CHECK(two[1].kappa == 10.0);
    CHECK(two[0].sigma == 1.0);
    CHECK(two[1].sigma == 1.0);

    const auto c = one_over_f_components(8, 1e-5, 10.0, 2.0, 0.99);
    REQUIRE(c.size() == 8);
    for (int j = 0; j < 8; ++j)
        CHECK_THAT(c[j].kappa, WithinRel(1e-5 * std::pow(1e6, j / 7.0), 1e-13));
    // mpmath: sigma_2 = 2 (kappa_1/kappa_2)^(-0.005)
    CHECK_THAT(c[1].sigma, WithinRel(2.0198341465765022, 1e-14));
    CHECK_THAT(c[2].sigma, WithinRel(2.0398649898382135, 1e-14));
    CHECK_THROWS_AS(one_over_f_components(8, 1.0, 1.0, 2.0, 0.99), InvalidArgument);
    CHECK_THROWS_AS(one_over_f_components(8, 1e-5, 10.0, 2.0, 2.0), InvalidArgument);
}

TEST_CASE("1/f spectrum against independent values and the power law", "[noise]") {
    const NoiseModel f(OneOverF{one_over_f_components(8, 1e-5, 10.0, 2.0, 0.99), true, 1});
    // mpmath evaluation of (1/N) sum 2 kappa sigma^2/(kappa^2 + w^2)
    CHECK_THAT(power_spectrum(f, 1e-3), WithinRel(820.30306678530315, 1e-13));
    CHECK_THAT(power_spectrum(f, 1.0), WithinRel(0.88642324814091147, 1e-13));
    CHECK_THAT(power_spectrum(f, 100.0), WithinRel(0.0013178433200495162, 1e-13));
    const double mid = power_spectrum(f, 0.01) / one_over_f_ideal_spectrum(2.0, 1e-5, 10.0, 0.99, 0.01);
    CHECK(std::abs(mid - 1.0) < 0.25);
    // Inside the band of rates the ratio stays in [0.75, 1.33]; above kappa_N it falls like w^(eta-2).
    for (double lw = -4.0; lw <= 0.0 + 1e-9; lw += 0.25) {
        const double w = std::pow(10.0, lw);
        const double r = power_spectrum(f, w) / one_over_f_ideal_spectrum(2.0, 1e-5, 10.0, 0.99, w);
        CHECK(r >= 0.75);
        CHECK(r <= 1.33);
    }
    const double r4 = power_spectrum(f, 1e4) / one_over_f_ideal_spectrum(2.0, 1e-5, 10.0, 0.99, 1e4);
    CHECK(r4 >= 1e-4);
    CHECK(r4 <= 1.0);
}

TEST_CASE("trajectories sample the model support", "[noise]") {
    const auto times = uniform_times(5.0, 101);
    const auto tr = sample_trajectory(NoiseModel(Telegraph{2.0, 1.0}), times, 11);
    for (double v : tr.values) CHECK((v == 2.0 || v == -2.0));
    const auto qs = sample_trajectory(NoiseModel(ColoredGaussian{1.0, 0.0}), times, 5);
    for (double v : qs.values) CHECK(v == qs.values.front());
    const auto m3 = sample_trajectory(NoiseModel(TLFEnsemble{3, 1.0, 1.0}), times, 3);
    for (double v : m3.values) {
        const double k = (v * std::sqrt(3.0) + 3.0) / 2.0;
        CHECK_THAT(k, WithinAbs(std::round(k), 1e-12));
    }
    CHECK_THROWS_AS(sample_trajectory(NoiseModel(White{1.0}), times, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_trajectory(NoiseModel(Telegraph{1.0, 1.0}), {0.0, 0.1, 0.3}, 1), InvalidArgument);
    CHECK_THROWS_AS(sample_trajectory(NoiseModel(Telegraph{1.0, 10.0}), uniform_times(1.0, 11), 1), InvalidArgument);
}

TEST_CASE("sampling is deterministic per seed", "[noise]") {
    const auto times = uniform_times(2.0, 41);
    const NoiseModel m(ColoredGaussian{1.0, 1.0});
    CHECK(sample_trajectory(m, times, 9).values == sample_trajectory(m, times, 9).values);
    CHECK(sample_trajectory(m, times, 9).values != sample_trajectory(m, times, 10).values);
}

TEST_CASE("stationary start has zero mean", "[noise]") {
    const NoiseModel m(ColoredGaussian{1.0, 1.0});
    const std::size_t n = 100000;
    double sum = 0.0;
    for (std::size_t s = 0; s < n; ++s) sum += sample_trajectory(m, {0.0, 0.05}, s).values[0];
    CHECK(std::abs(sum / double(n)) < 5.0 / std::sqrt(double(n)));
}

TEST_CASE("sampled autocorrelation matches the formula", "[noise]") {
    const std::size_t n = 10000;
    for (const NoiseModel& m : {NoiseModel(ColoredGaussian{1.0, 1.0}), NoiseModel(Telegraph{1.0, 1.0})}) {
        const auto times = uniform_times(3.0, 61);  // dt = 0.05, samples at tau = 0, 1, 3
        double s[3] = {}, s2[3] = {};
        for (std::size_t k = 0; k < n; ++k) {
            const auto tr = sample_trajectory(m, times, 1000 + k);
            const double x[3] = {tr.values[0] * tr.values[0], tr.values[0] * tr.values[20], tr.values[0] * tr.values[60]};
            for (int j = 0; j < 3; ++j) {
                s[j] += x[j];
                s2[j] += x[j] * x[j];
            }
        }
        const double taus[3] = {0.0, 1.0, 3.0};
        for (int j = 0; j < 3; ++j) {
            const double mean = s[j] / double(n);
            const double se = std::sqrt((s2[j] / double(n) - mean * mean) / double(n));
            INFO(m.kind() << " tau " << taus[j]);
            CHECK(std::abs(mean - autocorrelation(m, taus[j])) <= 5.0 * se + 1e-12);
        }
    }
}

TEST_CASE("jump models of telegraph and ensembles", "[noise]") {
    const auto t = build_jump_model(NoiseModel(Telegraph{1.5, 0.8}));
    REQUIRE(t.size() == 2);
    CHECK(t.realizations == std::vector<double>{-1.5, 1.5});
    CHECK(t.stationary == std::vector<double>{0.5, 0.5});
    const auto W = t.dense_transition();
    CHECK_THAT(W(0, 0), WithinAbs(-0.4, 1e-15));
    CHECK_THAT(W(0, 1), WithinAbs(0.4, 1e-15));
    CHECK_THAT(W(1, 0), WithinAbs(0.4, 1e-15));
    CHECK_THAT(W(1, 1), WithinAbs(-0.4, 1e-15));

    const auto e = build_jump_model(NoiseModel(TLFEnsemble{2, 1.0, 1.0}));
    REQUIRE(e.size() == 3);
    CHECK_THAT(e.realizations[0], WithinAbs(-std::sqrt(2.0), 1e-15));
    CHECK_THAT(e.realizations[1], WithinAbs(0.0, 1e-15));
    CHECK_THAT(e.realizations[2], WithinAbs(std::sqrt(2.0), 1e-15));
    CHECK(e.stationary == std::vector<double>{0.25, 0.5, 0.25});

    const auto f = build_jump_model(NoiseModel(OneOverF{{{1.0, 1.0}, {2.0, 1.0}}, false, 1}));
    REQUIRE(f.size() == 4);
    for (double p : f.stationary) CHECK(p == 0.25);
}

TEST_CASE("jump model invariants", "[noise]") {
    for (const NoiseModel& m : {NoiseModel(Telegraph{2.0, 0.1}), NoiseModel(TLFEnsemble{10, 2.0, 0.2}),
                                NoiseModel(OneOverF{one_over_f_components(8, 1e-5, 10.0, 2.0, 0.99), false, 1}),
                                NoiseModel(OneOverF{one_over_f_components(3, 0.1, 10.0, 1.0, 1.0), false, 3})}) {
        const auto r = build_jump_model(m).residuals();
        INFO(m.kind());
        CHECK(r.column_sum <= 1e-12);
        CHECK(r.stationarity <= 1e-12);
        CHECK(r.normalization <= 1e-12);
        CHECK(r.mean <= 1e-12);
        CHECK(r.negative_rate == 0.0);
    }
}

TEST_CASE("jump models reject Gaussian noise and oversized products", "[noise]") {
    CHECK_THROWS_AS(build_jump_model(NoiseModel(ColoredGaussian{1.0, 1.0})), InvalidArgument);
    CHECK_THROWS_AS(build_jump_model(NoiseModel(OneOverF{{{1.0, 1.0}}, true, 1})), InvalidArgument);
    const NoiseModel big(OneOverF{one_over_f_components(8, 1e-3, 10.0, 1.0, 1.0), false, 4});
    try {
        build_jump_model(big);
        FAIL("expected a size error");
    } catch (const ModelSizeError& e) {
        CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("(M+1)^N"));
        CHECK_THAT(std::string(e.what()), Catch::Matchers::ContainsSubstring("390625"));
    }
    const NoiseModel small(OneOverF{one_over_f_components(3, 0.1, 10.0, 1.0, 1.0), false, 4});
    JumpModelOptions o;
    o.max_states = 124;
    CHECK_THROWS_AS(build_jump_model(small, o), ModelSizeError);
    o.max_states = 125;
    CHECK(build_jump_model(small, o).size() == 125);
}
