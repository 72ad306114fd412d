#pragma once

#include <chrono>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "bloch.hpp"
#include "config.hpp"
#include "core.hpp"
#include "detail/parallel.hpp"
#include "fano.hpp"
#include "figures.hpp"
#include "inversion.hpp"
#include "io.hpp"
#include "mc_oracle.hpp"
#include "noise.hpp"
#include "ramsey.hpp"
#include "scattering.hpp"

namespace dephasing::cli {

inline constexpr const char* code_version = "0.1.0";

enum class Format { csv, json };

struct RunOptions {
    std::filesystem::path out_dir = ".";
    Format format = Format::csv;
    std::optional<std::uint64_t> seed;  // overrides the config
    std::size_t threads = 0;            // 0: library default
};

enum ExitCode { ok = 0, failure = 1, config_error = 2, not_converged = 3, statistical_failure = 4 };

struct Artifacts {
    std::vector<figures::FigureFile> files;
    config::json errors = config::json::object();
    std::optional<StatisticalCheckError> deferred;  // reported after the files are written
};

namespace detail {

inline config::json table_json(const io::Table& t) {
    config::json rows = config::json::array();
    for (const auto& r : t.rows) rows.push_back(r);
    return {{"columns", t.header}, {"rows", rows}};
}

inline Artifacts run_spectrum(const config::RunConfig& c) {
    const auto r = scatter_model(c.params, *c.noise, c.grid.build(), c.channel, c.method);
    double q = 0.0;
    for (double e : r.overlap_error) q = std::max(q, e);
    Artifacts a;
    a.files.push_back({c.output, io::scatter_table(r)});
    a.errors["method"] = to_string(resolve_method(*c.noise, c.method));
    a.errors["max_quadrature_error"] = q;
    return a;
}

inline Artifacts run_ramsey(const config::RunConfig& c, std::uint64_t seed) {
    const auto times = uniform_times(c.t_max, c.n_times);
    Artifacts a;
    if (c.ramsey_method == "mc") {
        const auto e = envelope_mc(*c.noise, times, c.n_traj, seed);
        double se = 0.0;
        for (double v : e.std_error) se = std::max(se, v);
        a.files.push_back({c.output, io::envelope_table(e)});
        a.errors["max_std_error"] = se;
        a.errors["n_traj"] = c.n_traj;
    } else {
        a.files.push_back({c.output, io::envelope_table(sample_envelope(envelope_function(*c.noise), times))});
    }
    return a;
}

inline Artifacts run_invert(const config::RunConfig& c) {
    io::MeasuredTransmittance m;
    if (!c.invert_input.empty()) {
        m = io::transmittance_from_table(io::read_csv(c.invert_input));
    } else {
        const auto s = scatter_model(c.params, *c.noise, c.grid.build(), c.channel, c.method);
        m = {s.transmittance.grid, s.transmittance.values, true};
    }
    InversionOptions opt;
    opt.t_max = c.t_max;
    opt.measurement_noise = c.measurement_noise;
    std::vector<double> re(m.t.size());
    for (std::size_t i = 0; i < re.size(); ++i) re[i] = m.t[i].real();
    InversionResult r;
    if (c.invert_route == "power") {
        r = envelope_from_transmittance(c.params, m.grid, re, c.channel, opt);
    } else if (c.invert_route == "homodyne") {
        if (!m.has_imag) throw InvalidArgument("options.route: 'homodyne' needs an im_t column in the input");
        r = envelope_from_complex_transmittance(c.params, ComplexSpectrum(m.grid, m.t, SpectrumKind::transmittance),
                                                c.channel, opt);
    } else {
        r = envelope_from_complex_transmittance(c.params, complete_transmittance(m.grid, re), c.channel, opt);
    }
    Artifacts a;
    a.files.push_back({c.output, io::envelope_table(r.normalized)});
    a.errors["raw_C0_re"] = r.raw.values.front().real();
    a.errors["raw_C0_im"] = r.raw.values.front().imag();
    a.errors["grid_error"] = r.grid_error;
    a.errors["amplification"] = r.amplification;
    return a;
}

inline Artifacts run_mc_validate(const config::RunConfig& c, std::uint64_t seed) {
    const auto grid = c.grid.build();
    const auto ref = scatter_model(c.params, *c.noise, grid, c.channel, c.method);
    const auto mc = overlap_mc_sweep(c.params, *c.noise, grid.values(), c.n_traj, c.t_ss, seed);
    io::Table t;
    t.header = {"delta", "re_G_mc", "im_G_mc", "stderr", "re_G_ref", "im_G_ref", "z_score"};
    double worst = 0.0;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        const cplx d = mc[i].mean - ref.overlap[i];
        const double z = mc[i].std_error > 0.0 ? std::abs(d) / mc[i].std_error : (std::abs(d) > 1e-12 ? INFINITY : 0.0);
        worst = std::max(worst, z);
        t.add({grid[i], mc[i].mean.real(), mc[i].mean.imag(), mc[i].std_error, ref.overlap[i].real(),
               ref.overlap[i].imag(), z});
    }
    Artifacts a;
    a.files.push_back({c.output, std::move(t)});
    a.errors["max_z_score"] = worst;
    a.errors["n_traj"] = c.n_traj;
    if (worst > 5.0)
        a.deferred = StatisticalCheckError("Monte Carlo overlap differs from the " +
                                           std::string(to_string(resolve_method(*c.noise, c.method))) +
                                           " route by " + std::to_string(worst) + " standard errors (limit 5)");
    return a;
}

inline Artifacts run_fano(const config::RunConfig& c) {
    const FanoParams f(c.omega_c, c.kappa_c);
    const auto r = fano_scatter(c.params, f, envelope_function(*c.noise), c.grid.build(), c.channel);
    Artifacts a;
    a.files.push_back({c.output, io::scatter_table(r.scatter, &r.z)});
    double q = 0.0;
    for (double e : r.scatter.overlap_error) q = std::max(q, e);
    a.errors["max_quadrature_error"] = q;
    if (c.fano_recover) {
        FanoRecoveryOptions o;
        o.t_max = c.t_max;
        a.files.push_back({c.output + "_envelope", io::envelope_table(fano_recover_envelope(c.params, f, r.scatter.overlap, o))});
    }
    return a;
}

inline Artifacts run_bloch(const config::RunConfig& c, std::uint64_t seed) {
    const auto grid = c.grid.build();
    BlochOptions o;
    o.t_relax = c.t_relax;
    const auto ss = bloch_sweep(c.params, *c.noise, c.rabi, grid.values(), c.channel, c.n_traj, seed, o);
    const double gm = c.params.rate(c.channel), gr = c.params.rate(opposite(c.channel));
    const double b = std::sqrt(c.params.beta(c.channel) * c.params.beta(opposite(c.channel)));
    io::Table t;
    t.header = {"delta",        "re_hom",          "im_hom",           "power_trans",    "power_refl",
                "flux_residual", "stderr_hom",     "stderr_power_trans", "stderr_power_refl", "stderr_flux"};
    double worst = 0.0;
    for (std::size_t i = 0; i < ss.size(); ++i) {
        const cplx coh = ss[i].coherence_over_omega.mean;
        const double se = ss[i].coherence_over_omega.std_error;
        const auto tr = output_observables(c.params, coh, c.channel, c.channel);
        const auto rf = output_observables(c.params, coh, c.channel, opposite(c.channel));
        const auto fl = flux_from_moments(c.params, ss[i], c.rabi, c.channel);
        worst = std::max(worst, fl.residual - std::max(1e-3, 5.0 * fl.residual_std_error));
        t.add({grid[i], tr.homodyne.real(), tr.homodyne.imag(), tr.power, rf.power, fl.residual, gm * se,
               2.0 * gm * (1.0 - c.params.beta(c.channel)) * se, 2.0 * std::sqrt(gm * gr) * b * se,
               fl.residual_std_error});
    }
    Artifacts a;
    a.files.push_back({c.output, std::move(t)});
    a.errors["n_traj"] = c.n_traj;
    a.errors["rabi"] = {c.rabi.real(), c.rabi.imag()};
    if (worst > 0.0)
        a.deferred = StatisticalCheckError("flux residual exceeds max(1e-3, 5 standard errors) at some detuning");
    return a;
}

inline Artifacts run_figure(const config::RunConfig& c) {
    Artifacts a;
    a.files = figures::figure_data(figures::figure_spec(c.figure));
    a.errors["figure"] = c.figure;
    return a;
}

inline std::string utc_now() {
    const std::time_t t = std::time(nullptr);
    char buf[32];
    std::strftime(buf, sizeof buf, "%Y-%m-%dT%H:%M:%SZ", std::gmtime(&t));
    return buf;
}

}  // namespace detail

// Runs one task and writes <out>/<name>.csv (or .json) plus <out>/<output>.meta.json.
inline void run(const config::RunConfig& c, const RunOptions& opt, std::ostream& log = std::clog) {
    if (opt.threads > 0) set_max_threads(opt.threads);
    const std::uint64_t seed = opt.seed.value_or(c.seed);
    const auto start = std::chrono::steady_clock::now();
    Artifacts a;
    switch (c.task) {
        case config::Task::spectrum: a = detail::run_spectrum(c); break;
        case config::Task::ramsey: a = detail::run_ramsey(c, seed); break;
        case config::Task::invert: a = detail::run_invert(c); break;
        case config::Task::mc_validate: a = detail::run_mc_validate(c, seed); break;
        case config::Task::fano: a = detail::run_fano(c); break;
        case config::Task::bloch: a = detail::run_bloch(c, seed); break;
        case config::Task::figure: a = detail::run_figure(c); break;
    }
    const double runtime = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    std::filesystem::create_directories(opt.out_dir);
    config::json files = config::json::array();
    for (const auto& f : a.files) {
        const auto path = opt.out_dir / (f.name + (opt.format == Format::csv ? ".csv" : ".json"));
        if (opt.format == Format::csv) {
            io::write_csv(path.string(), f.table);
        } else {
            std::ofstream o(path);
            if (!o) throw InvalidArgument("cannot open '" + path.string() + "' for writing");
            o << detail::table_json(f.table).dump(1) << '\n';
        }
        files.push_back(path.filename().string());
        log << "wrote " << path.string() << '\n';
    }
    config::json meta = {{"task", config::to_string(c.task)},
                         {"code_version", code_version},
                         {"seed", seed},
                         {"threads", max_threads()},
                         {"runtime_seconds", runtime},
                         {"timestamp", detail::utc_now()},
                         {"config", c.echo},
                         {"params", config::params_to_json(c.params)},
                         {"error_estimates", a.errors},
                         {"files", files}};
    if (c.noise) meta["noise"] = config::noise_to_json(*c.noise);
    const std::string stem = c.task == config::Task::figure ? c.figure : c.output;
    std::ofstream m(opt.out_dir / (stem + ".meta.json"));
    m << meta.dump(2) << '\n';
    if (a.deferred) throw *a.deferred;
}

inline int exit_code_for(const std::exception_ptr& e, std::ostream& err = std::cerr) {
    try {
        std::rethrow_exception(e);
    } catch (const InvalidArgument& x) {
        err << "error: " << x.what() << '\n';
        return config_error;
    } catch (const ConvergenceError& x) {
        err << "not converged: " << x.what() << '\n';
        return not_converged;
    } catch (const StatisticalCheckError& x) {
        err << "statistical check failed: " << x.what() << '\n';
        return statistical_failure;
    } catch (const std::exception& x) {
        err << "error: " << x.what() << '\n';
        return failure;
    }
}

}  // namespace dephasing::cli
