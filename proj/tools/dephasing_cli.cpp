#include <CLI11.hpp>

#include <dephasing/cli.hpp>
#include <dephasing/selftest.hpp>

#include <iostream>
#include <optional>
#include <string>

namespace dc = dephasing::config;
namespace cli = dephasing::cli;

int main(int argc, char** argv) {
    CLI::App app{"Noise-averaged waveguide scattering of a dephased emitter"};
    app.require_subcommand(1);

    std::string config_path, out_dir = ".", format = "csv";
    std::optional<std::uint64_t> seed;
    std::size_t threads = 0;
    auto common = [&](CLI::App* s, bool needs_config) {
        auto* c = s->add_option("--config", config_path, "JSON run configuration");
        if (needs_config) c->required()->check(CLI::ExistingFile);
        s->add_option("--out", out_dir, "output directory")->capture_default_str();
        s->add_option("--seed", seed, "master seed (overrides the config)");
        s->add_option("--threads", threads, "worker thread cap (0: hardware)");
        s->add_option("--format", format, "data format")->check(CLI::IsMember({"csv", "json"}))->capture_default_str();
    };

    std::vector<std::pair<CLI::App*, dc::Task>> tasks;
    for (auto [name, task, help] : {std::tuple{"spectrum", dc::Task::spectrum, "averaged t, r, r_loss on a grid"},
                                    std::tuple{"ramsey", dc::Task::ramsey, "Ramsey envelope C(t)"},
                                    std::tuple{"invert", dc::Task::invert, "envelope from a transmittance spectrum"},
                                    std::tuple{"mc-validate", dc::Task::mc_validate, "trajectory oracle vs analytic overlap"},
                                    std::tuple{"fano", dc::Task::fano, "Fano-coupled scattering"},
                                    std::tuple{"bloch", dc::Task::bloch, "weak-drive steady state and outputs"}}) {
        auto* s = app.add_subcommand(name, help);
        common(s, true);
        tasks.emplace_back(s, task);
    }
    std::string figure_name;
    auto* fig = app.add_subcommand("figure", "dataset for a named figure");
    fig->add_option("name", figure_name, "fig2c, fig3a, fig4a, fig4b, fig4c, fig5b, fig5c, fig6b, fig6c")->required();
    common(fig, false);
    auto* self = app.add_subcommand("selftest", "fast consistency checks");
    self->add_option("--threads", threads, "worker thread cap (0: hardware)");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int rc = app.exit(e);
        return rc == 0 ? 0 : cli::config_error;
    }

    try {
        if (threads > 0) dephasing::set_max_threads(unsigned(threads));
        if (self->parsed()) return dephasing::run_selftest(std::cout) ? cli::ok : cli::statistical_failure;

        cli::RunOptions opt;
        opt.out_dir = out_dir;
        opt.format = format == "json" ? cli::Format::json : cli::Format::csv;
        opt.seed = seed;
        opt.threads = threads;

        dc::RunConfig cfg;
        if (fig->parsed()) {
            cfg = config_path.empty() ? dc::RunConfig{} : dc::load(config_path, dc::Task::figure);
            cfg.task = dc::Task::figure;
            cfg.figure = figure_name;
            cfg.echo["task"] = "figure";
            cfg.echo["options"]["name"] = figure_name;
        } else {
            for (auto& [s, task] : tasks)
                if (s->parsed()) cfg = dc::load(config_path, task);
        }
        cli::run(cfg, opt);
        return cli::ok;
    } catch (...) {
        return cli::exit_code_for(std::current_exception());
    }
}
