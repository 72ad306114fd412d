#pragma once

#include <nlohmann/json.hpp>

#include <cstdint>
#include <fstream>
#include <initializer_list>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "core.hpp"
#include "noise.hpp"
#include "fano.hpp"
#include "scattering.hpp"

namespace dephasing::config {

using json = nlohmann::json;

inline constexpr int schema_version = 1;

// Field-level access with a dotted path for messages; every object is
// checked against the keys it may hold.
class Node {
public:
    Node(const json& j, std::string path) : j_(&j), path_(std::move(path)) {}

    const std::string& path() const { return path_; }
    const json& raw() const { return *j_; }

    void allow(std::initializer_list<const char*> keys) const {
        if (!j_->is_object()) fail("must be an object");
        std::set<std::string> ok(keys.begin(), keys.end());
        for (auto it = j_->begin(); it != j_->end(); ++it)
            if (!ok.count(it.key())) throw InvalidArgument(sub(it.key()) + ": unknown key");
    }
    bool has(const std::string& k) const { return j_->is_object() && j_->contains(k); }
    Node at(const std::string& k) const {
        if (!has(k)) throw InvalidArgument(sub(k) + ": required field missing");
        return Node((*j_)[k], sub(k));
    }
    double number(const std::string& k) const {
        const Node n = at(k);
        if (!n.raw().is_number()) n.fail("must be a number");
        return n.raw().get<double>();
    }
    double number(const std::string& k, double dflt) const { return has(k) ? number(k) : dflt; }
    long long integer(const std::string& k) const {
        const Node n = at(k);
        if (!n.raw().is_number_integer()) n.fail("must be an integer");
        return n.raw().get<long long>();
    }
    long long integer(const std::string& k, long long dflt) const { return has(k) ? integer(k) : dflt; }
    std::size_t count(const std::string& k, std::size_t dflt) const {
        const long long v = integer(k, static_cast<long long>(dflt));
        if (v < 0) at(k).fail("must be >= 0");
        return std::size_t(v);
    }
    std::string string(const std::string& k) const {
        const Node n = at(k);
        if (!n.raw().is_string()) n.fail("must be a string");
        return n.raw().get<std::string>();
    }
    std::string string(const std::string& k, const std::string& dflt) const { return has(k) ? string(k) : dflt; }
    bool boolean(const std::string& k, bool dflt) const {
        if (!has(k)) return dflt;
        const Node n = at(k);
        if (!n.raw().is_boolean()) n.fail("must be true or false");
        return n.raw().get<bool>();
    }
    [[noreturn]] void fail(const std::string& msg) const { throw InvalidArgument(path_ + ": " + msg); }

    // Wraps library validation errors with this node's path.
    template <class F>
    auto guarded(F&& f) const {
        try {
            return f();
        } catch (const ModelSizeError&) {
            throw;
        } catch (const InvalidArgument& e) {
            throw InvalidArgument(path_ + ": " + e.what());
        }
    }

private:
    std::string sub(const std::string& k) const { return path_.empty() ? k : path_ + "." + k; }
    const json* j_;
    std::string path_;
};

inline Channel parse_channel(const std::string& s, const Node& where) {
    if (s == "plus" || s == "+") return Channel::plus;
    if (s == "minus" || s == "-") return Channel::minus;
    where.fail("channel must be 'plus' or 'minus', got '" + s + "'");
}

inline SystemParams parse_params(const Node& n) {
    n.allow({"gamma_plus", "gamma_minus", "gamma_loss", "omega0", "white_background"});
    return n.guarded([&] {
        return SystemParams(n.number("gamma_plus"), n.number("gamma_minus"), n.number("gamma_loss"),
                            n.number("omega0", 0.0), n.number("white_background", 0.0));
    });
}

inline NoiseModel parse_noise(const Node& n) {
    const std::string type = n.string("type");
    auto build = [&]() -> NoiseModel {
        if (type == "white") {
            n.allow({"type", "gamma_phi"});
            return White{n.number("gamma_phi")};
        }
        if (type == "colored_gaussian") {
            n.allow({"type", "sigma", "kappa"});
            return ColoredGaussian{n.number("sigma"), n.number("kappa")};
        }
        if (type == "telegraph") {
            n.allow({"type", "sigma", "kappa"});
            return Telegraph{n.number("sigma"), n.number("kappa")};
        }
        if (type == "tlf_ensemble") {
            n.allow({"type", "M", "sigma", "kappa"});
            return TLFEnsemble{int(n.integer("M")), n.number("sigma"), n.number("kappa")};
        }
        if (type == "one_over_f") {
            n.allow({"type", "components", "recipe", "gaussian", "M"});
            OneOverF f;
            f.gaussian = n.boolean("gaussian", true);
            f.M = int(n.integer("M", 1));
            if (n.has("components") == n.has("recipe")) n.fail("give exactly one of 'components' or 'recipe'");
            if (n.has("components")) {
                const Node c = n.at("components");
                if (!c.raw().is_array()) c.fail("must be an array");
                for (std::size_t i = 0; i < c.raw().size(); ++i) {
                    const Node e(c.raw()[i], c.path() + "[" + std::to_string(i) + "]");
                    e.allow({"kappa", "sigma"});
                    f.components.push_back({e.number("kappa"), e.number("sigma")});
                }
            } else {
                const Node r = n.at("recipe");
                r.allow({"n", "kappa_min", "kappa_max", "sigma1", "eta"});
                f.components = r.guarded([&] {
                    return one_over_f_components(int(r.integer("n")), r.number("kappa_min"), r.number("kappa_max"),
                                                 r.number("sigma1"), r.number("eta"));
                });
            }
            return f;
        }
        if (type == "with_white_background") {
            n.allow({"type", "base", "gamma_wb"});
            return with_white_background(parse_noise(n.at("base")), n.number("gamma_wb"));
        }
        n.fail("unknown noise type '" + type +
               "' (white, colored_gaussian, telegraph, tlf_ensemble, one_over_f, with_white_background)");
    };
    return n.guarded(build);
}

inline json noise_to_json(const NoiseModel& m) {
    return std::visit(
        [](const auto& v) -> json {
            using T = std::decay_t<decltype(v)>;
            if constexpr (std::is_same_v<T, White>) return {{"type", "white"}, {"gamma_phi", v.gamma_phi}};
            if constexpr (std::is_same_v<T, ColoredGaussian>)
                return {{"type", "colored_gaussian"}, {"sigma", v.sigma}, {"kappa", v.kappa}};
            if constexpr (std::is_same_v<T, Telegraph>)
                return {{"type", "telegraph"}, {"sigma", v.sigma}, {"kappa", v.kappa}};
            if constexpr (std::is_same_v<T, TLFEnsemble>)
                return {{"type", "tlf_ensemble"}, {"M", v.M}, {"sigma", v.sigma}, {"kappa", v.kappa}};
            if constexpr (std::is_same_v<T, OneOverF>) {
                json c = json::array();
                for (const auto& k : v.components) c.push_back({{"kappa", k.kappa}, {"sigma", k.sigma}});
                return {{"type", "one_over_f"}, {"components", c}, {"gaussian", v.gaussian}, {"M", v.M}};
            }
            if constexpr (std::is_same_v<T, WithWhiteBackground>)
                return {{"type", "with_white_background"}, {"base", noise_to_json(*v.base)}, {"gamma_wb", v.gamma_wb}};
        },
        m.variant());
}

inline json params_to_json(const SystemParams& p) {
    return {{"gamma_plus", p.gamma_plus()},
            {"gamma_minus", p.gamma_minus()},
            {"gamma_loss", p.gamma_loss()},
            {"omega0", p.omega0()},
            {"white_background", p.white_background()}};
}

struct GridSpec {
    double min = -5.0, max = 5.0;
    std::size_t n = 201;
    FrequencyGrid build() const { return make_grid(min, max, n); }
};

inline GridSpec parse_grid(const Node& n) {
    n.allow({"min", "max", "n"});
    GridSpec g{n.number("min"), n.number("max"), n.count("n", 201)};
    n.guarded([&] { return g.build(); });
    return g;
}

enum class Task { spectrum, ramsey, invert, mc_validate, fano, bloch, figure };

inline const char* to_string(Task t) {
    switch (t) {
        case Task::spectrum: return "spectrum";
        case Task::ramsey: return "ramsey";
        case Task::invert: return "invert";
        case Task::mc_validate: return "mc-validate";
        case Task::fano: return "fano";
        case Task::bloch: return "bloch";
        case Task::figure: return "figure";
    }
    return "?";
}

inline Task parse_task(const std::string& s) {
    for (Task t : {Task::spectrum, Task::ramsey, Task::invert, Task::mc_validate, Task::fano, Task::bloch, Task::figure})
        if (s == to_string(t)) return t;
    throw InvalidArgument("task: unknown task '" + s + "' (spectrum, ramsey, invert, mc-validate, fano, bloch, figure)");
}

struct RunConfig {
    Task task = Task::spectrum;
    SystemParams params = SystemParams::canonical();
    std::optional<NoiseModel> noise;
    GridSpec grid{};
    Channel channel = Channel::plus;
    ScatterMethod method = ScatterMethod::automatic;
    std::uint64_t seed = 1;
    std::size_t n_traj = 10000;
    double t_max = 6.0;
    std::size_t n_times = 121;
    double t_ss = 12.0;
    std::string ramsey_method = "exact";  // exact | mc
    std::string invert_input;             // scattering CSV; empty: synthesize from the noise model
    std::string invert_route = "power";   // power | homodyne | kk
    double measurement_noise = 0.0;
    double omega_c = 0.0, kappa_c = 1.0;
    bool fano_recover = false;
    cplx rabi{0.05, 0.0};
    double t_relax = 40.0;
    std::string figure;
    std::string output = "result";  // base name inside the output directory
    json echo;                      // the parsed input, for the sidecar
};

// The task comes from the config, the caller, or both when they agree.
inline RunConfig parse(const json& j, std::optional<Task> task = {}) {
    const Node root(j, "");
    root.allow({"schema_version", "task", "params", "noise", "grid", "options", "output"});
    const long long v = root.integer("schema_version");
    if (v != schema_version)
        root.at("schema_version").fail("unsupported version " + std::to_string(v) + " (expected " +
                                       std::to_string(schema_version) + ")");
    RunConfig c;
    c.echo = j;
    if (root.has("task")) {
        c.task = parse_task(root.string("task"));
        if (task && *task != c.task)
            root.at("task").fail(std::string("config is for '") + to_string(c.task) + "', not '" + to_string(*task) + "'");
    } else if (task) {
        c.task = *task;
    } else {
        root.at("task");
    }
    if (root.has("params")) c.params = parse_params(root.at("params"));
    if (root.has("noise")) c.noise = parse_noise(root.at("noise"));
    if (root.has("grid")) c.grid = parse_grid(root.at("grid"));
    c.output = root.string("output", c.output);
    detail::require(!c.output.empty() && c.output.find('/') == std::string::npos,
                    "output: must be a plain file base name");

    const bool needs_noise = c.task != Task::figure && !(c.task == Task::invert && root.has("options") &&
                                                         root.at("options").has("input"));
    if (needs_noise && !c.noise) throw InvalidArgument("noise: required field missing for task " + std::string(to_string(c.task)));

    const json empty = json::object();
    const Node o = root.has("options") ? root.at("options") : Node(empty, "options");
    auto channel = [&] { c.channel = parse_channel(o.string("channel", "plus"), o); };
    auto method = [&] {
        const std::string m = o.string("method", "auto");
        c.method = o.guarded([&] { return parse_scatter_method(m); });
        if (c.noise) o.guarded([&] { return resolve_method(*c.noise, c.method); });
    };
    auto seed = [&] {
        const long long s = o.integer("seed", 1);
        if (s < 0) o.at("seed").fail("must be >= 0");
        c.seed = std::uint64_t(s);
    };
    switch (c.task) {
        case Task::spectrum:
            o.allow({"channel", "method"});
            channel();
            method();
            break;
        case Task::ramsey:
            o.allow({"method", "t_max", "n_times", "n_traj", "seed"});
            c.ramsey_method = o.string("method", "exact");
            if (c.ramsey_method != "exact" && c.ramsey_method != "mc")
                o.at("method").fail("must be 'exact' or 'mc'");
            c.t_max = o.number("t_max", 6.0);
            c.n_times = o.count("n_times", 121);
            c.n_traj = o.count("n_traj", 10000);
            seed();
            break;
        case Task::invert:
            o.allow({"input", "route", "t_max", "measurement_noise", "channel", "method"});
            c.invert_input = o.string("input", "");
            c.invert_route = o.string("route", "power");
            if (c.invert_route != "power" && c.invert_route != "homodyne" && c.invert_route != "kk")
                o.at("route").fail("must be 'power', 'homodyne' or 'kk'");
            c.t_max = o.number("t_max", 6.0);
            c.measurement_noise = o.number("measurement_noise", 0.0);
            channel();
            method();
            break;
        case Task::mc_validate:
            o.allow({"n_traj", "t_ss", "seed", "channel", "method"});
            c.n_traj = o.count("n_traj", 10000);
            c.t_ss = o.number("t_ss", 12.0);
            seed();
            channel();
            method();
            break;
        case Task::fano:
            o.allow({"omega_c", "kappa_c", "channel", "recover", "t_max"});
            c.omega_c = o.number("omega_c", 0.0);
            c.kappa_c = o.number("kappa_c", 1.0);
            c.fano_recover = o.boolean("recover", false);
            c.t_max = o.number("t_max", 3.0);
            channel();
            o.guarded([&] { return FanoParams(c.omega_c, c.kappa_c); });
            break;
        case Task::bloch:
            o.allow({"rabi_re", "rabi_im", "n_traj", "t_relax", "seed", "channel"});
            c.rabi = cplx(o.number("rabi_re", 0.05), o.number("rabi_im", 0.0));
            c.n_traj = o.count("n_traj", 2000);
            c.t_relax = o.number("t_relax", 40.0);
            seed();
            channel();
            break;
        case Task::figure:
            o.allow({"name"});
            c.figure = o.string("name", "");
            break;
    }
    return c;
}

inline RunConfig load(const std::string& path, std::optional<Task> task = {}) {
    std::ifstream f(path);
    if (!f) throw InvalidArgument("cannot open config '" + path + "'");
    json j;
    try {
        j = json::parse(f, nullptr, true, /*ignore_comments=*/true);
    } catch (const json::parse_error& e) {
        throw InvalidArgument(path + ": " + e.what());
    }
    return parse(j, task);
}

}  // namespace dephasing::config
