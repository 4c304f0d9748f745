#include "fragdiff/app/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include <yaml-cpp/yaml.h>

#include "fragdiff/errors.hpp"

namespace fragdiff::app {

namespace {

std::string where(const YAML::Node& node) {
    const auto mark = node.Mark();
    if (mark.line < 0) {
        return "config";
    }
    return "line " + std::to_string(mark.line + 1);
}

[[noreturn]] void fail(const YAML::Node& node, const std::string& message) {
    throw ConfigError(where(node) + ": " + message);
}

void require_map(const YAML::Node& node, const std::string& path) {
    if (!node.IsMap()) {
        fail(node, "'" + path + "' must be a mapping");
    }
}

void check_keys(const YAML::Node& node, const std::string& section,
                std::initializer_list<const char*> allowed) {
    for (const auto& item : node) {
        const auto key = item.first.as<std::string>();
        const bool known = std::any_of(allowed.begin(), allowed.end(),
                                       [&](const char* a) { return key == a; });
        if (!known) {
            std::string list;
            for (const char* a : allowed) {
                list += list.empty() ? a : std::string(", ") + a;
            }
            const std::string scope = section.empty() ? "top level" : "'" + section + "'";
            fail(item.first, "unknown key '" + key + "' in " + scope + " (allowed: " + list + ")");
        }
    }
}

template <class T>
T scalar(const YAML::Node& node, const std::string& path) {
    if (!node.IsScalar()) {
        fail(node, "'" + path + "' must be a scalar");
    }
    try {
        return node.as<T>();
    } catch (const YAML::BadConversion&) {
        fail(node, "'" + path + "' has an invalid value '" + node.Scalar() + "'");
    }
}

double positive(const YAML::Node& node, const std::string& path) {
    const double v = scalar<double>(node, path);
    if (!(v > 0.0) || !std::isfinite(v)) {
        fail(node, "'" + path + "' must be positive and finite");
    }
    return v;
}

std::vector<double> number_list(const YAML::Node& node, const std::string& path) {
    if (!node.IsSequence()) {
        fail(node, "'" + path + "' must be a list");
    }
    std::vector<double> out;
    for (const auto& v : node) {
        out.push_back(scalar<double>(v, path));
    }
    return out;
}

RateModel parse_rate(const YAML::Node& node, const std::string& path) {
    if (node.IsScalar()) {
        const double c = scalar<double>(node, path);
        try {
            return RateModel::constant(c);
        } catch (const Error& e) {
            fail(node, e.what());
        }
    }
    require_map(node, path);
    check_keys(node, path, {"kind", "c", "gamma", "x", "values", "base", "n"});
    if (!node["kind"]) {
        fail(node, "'" + path + ".kind' is required");
    }
    const auto kind = scalar<std::string>(node["kind"], path + ".kind");
    auto number = [&](const char* key) {
        if (!node[key]) {
            fail(node, "'" + path + "." + key + "' is required for kind " + kind);
        }
        return scalar<double>(node[key], path + "." + key);
    };
    try {
        if (kind == "constant") {
            return RateModel::constant(number("c"));
        }
        if (kind == "power") {
            return RateModel::power(number("gamma"));
        }
        if (kind == "shifted_power") {
            return RateModel::shifted_power(number("c"), number("gamma"));
        }
        if (kind == "table") {
            if (!node["x"] || !node["values"]) {
                fail(node, "'" + path + "' of kind table needs x and values");
            }
            return RateModel::table(number_list(node["x"], path + ".x"),
                                    number_list(node["values"], path + ".values"));
        }
        if (kind == "regularized") {
            if (!node["base"]) {
                fail(node, "'" + path + ".base' is required for kind regularized");
            }
            const double n = number("n");
            if (n != std::floor(n) || n < 1.0) {
                fail(node["n"], "'" + path + ".n' must be a positive integer");
            }
            return RateModel::regularized(parse_rate(node["base"], path + ".base"),
                                          static_cast<int>(n));
        }
    } catch (const ConfigError&) {
        throw;
    } catch (const Error& e) {
        fail(node, e.what());
    }
    fail(node["kind"], "unknown rate kind '" + kind +
                           "' (expected constant, power, shifted_power, table or regularized)");
}

DaughterKernel parse_kernel(const YAML::Node& node, const std::string& path) {
    require_map(node, path);
    check_keys(node, path, {"kind", "nu"});
    const std::string kind =
        node["kind"] ? scalar<std::string>(node["kind"], path + ".kind") : "powerlaw";
    if (kind != "powerlaw") {
        fail(node["kind"], "unknown kernel kind '" + kind + "' (expected powerlaw)");
    }
    const double nu = node["nu"] ? scalar<double>(node["nu"], path + ".nu") : 0.0;
    try {
        return DaughterKernel::power_law(nu);
    } catch (const Error& e) {
        fail(node["nu"] ? node["nu"] : node, e.what());
    }
}

RunConfig mitosis() {
    RunConfig c;
    c.preset = "mitosis";
    c.task = Task::evolve;
    c.domain.x_max = 40.0;
    c.domain.cells = 2048;
    c.rate = RateModel::constant(1.0);
    c.kernel = DaughterKernel::power_law(0.0);
    c.time.scheme = Scheme::imex_euler;
    c.time.dt = 1e-4;
    c.time.t_end = 1.0;
    c.time.output_every = 100;
    c.initial.kind = "exp";
    return c;
}

RunConfig linear_rate() {
    RunConfig c;
    c.preset = "linear-rate";
    c.task = Task::evolve;
    c.domain.x_max = 20.0;
    c.domain.cells = 1024;
    c.rate = RateModel::power(1.0);
    c.kernel = DaughterKernel::power_law(0.0);
    c.time.scheme = Scheme::fully_implicit;
    c.time.dt = 0.01;
    c.time.t_end = 40.0;
    c.time.output_every = 10;
    c.initial.kind = "exp";
    return c;
}

void apply_domain(const YAML::Node& node, RunConfig& c) {
    require_map(node, "domain");
    check_keys(node, "domain", {"x_max", "cells", "grading", "ratio", "right_bc"});
    if (node["x_max"]) {
        c.domain.x_max = positive(node["x_max"], "domain.x_max");
    }
    if (node["cells"]) {
        const long long n = scalar<long long>(node["cells"], "domain.cells");
        if (n < static_cast<long long>(Mesh::min_cells)) {
            fail(node["cells"], "'domain.cells' must be at least " +
                                    std::to_string(Mesh::min_cells));
        }
        c.domain.cells = static_cast<std::size_t>(n);
    }
    if (node["grading"]) {
        const auto g = scalar<std::string>(node["grading"], "domain.grading");
        if (g == "uniform") {
            c.domain.grading = GradingSpec::uniform();
        } else if (g == "geometric") {
            c.domain.grading = GradingSpec::geometric(1.02);
        } else {
            fail(node["grading"], "unknown grading '" + g + "' (expected uniform or geometric)");
        }
    }
    if (node["ratio"]) {
        const double r = scalar<double>(node["ratio"], "domain.ratio");
        if (c.domain.grading.kind != Grading::geometric) {
            fail(node["ratio"], "'domain.ratio' needs grading: geometric");
        }
        if (!(r > 1.0 && r <= 1.2)) {
            fail(node["ratio"], "'domain.ratio' must lie in (1, 1.2]");
        }
        c.domain.grading.ratio = r;
    }
    if (node["right_bc"]) {
        const auto bc = scalar<std::string>(node["right_bc"], "domain.right_bc");
        if (bc == "noflux") {
            c.domain.right_bc = RightBoundary::noflux;
        } else if (bc == "dirichlet") {
            c.domain.right_bc = RightBoundary::dirichlet;
        } else {
            fail(node["right_bc"], "unknown right_bc '" + bc + "' (expected noflux or dirichlet)");
        }
    }
}

void apply_time(const YAML::Node& node, RunConfig& c) {
    require_map(node, "time");
    check_keys(node, "time",
               {"scheme", "dt", "t_end", "output_every", "moment_order", "check_positivity"});
    if (node["scheme"]) {
        const auto name = scalar<std::string>(node["scheme"], "time.scheme");
        try {
            c.time.scheme = parse_scheme(name);
        } catch (const ConfigError& e) {
            fail(node["scheme"], e.what());
        }
    }
    if (node["dt"]) {
        const double dt = scalar<double>(node["dt"], "time.dt");
        if (!(dt >= 0.0) || !std::isfinite(dt)) {
            fail(node["dt"], "'time.dt' must be >= 0 (0 selects the default step)");
        }
        c.time.dt = dt;
    }
    if (node["t_end"]) {
        c.time.t_end = positive(node["t_end"], "time.t_end");
    }
    if (node["output_every"]) {
        const long long k = scalar<long long>(node["output_every"], "time.output_every");
        if (k < 1) {
            fail(node["output_every"], "'time.output_every' must be >= 1");
        }
        c.time.output_every = static_cast<std::size_t>(k);
    }
    if (node["moment_order"]) {
        const double m = scalar<double>(node["moment_order"], "time.moment_order");
        if (!(m >= 1.0)) {
            fail(node["moment_order"], "'time.moment_order' must be >= 1");
        }
        c.time.moment_order = m;
    }
    if (node["check_positivity"]) {
        c.time.check_positivity = scalar<bool>(node["check_positivity"], "time.check_positivity");
    }
}

void apply_output(const YAML::Node& node, RunConfig& c) {
    require_map(node, "output");
    check_keys(node, "output", {"dir", "formats"});
    if (node["dir"]) {
        c.output.dir = scalar<std::string>(node["dir"], "output.dir");
    }
    if (node["formats"]) {
        const auto& f = node["formats"];
        if (!f.IsSequence()) {
            fail(f, "'output.formats' must be a list");
        }
        c.output.csv = false;
        c.output.jsonl = false;
        for (const auto& v : f) {
            const auto name = scalar<std::string>(v, "output.formats");
            if (name == "csv") {
                c.output.csv = true;
            } else if (name == "jsonl") {
                c.output.jsonl = true;
            } else {
                fail(v, "unknown output format '" + name + "' (expected csv or jsonl)");
            }
        }
    }
}

RunConfig from_node(const YAML::Node& root) {
    if (root && !root.IsNull() && !root.IsMap()) {
        fail(root, "configuration must be a mapping");
    }
    const YAML::Node top = root && root.IsMap() ? root : YAML::Node(YAML::NodeType::Map);
    check_keys(top, "", {"preset", "task", "seed", "domain", "coefficients", "time", "initial",
                         "steady", "spectrum", "checks", "output"});

    RunConfig c;
    if (top["preset"]) {
        const auto name = scalar<std::string>(top["preset"], "preset");
        try {
            c = preset(name);
        } catch (const ConfigError& e) {
            fail(top["preset"], e.what());
        }
    } else {
        std::vector<std::string> missing;
        auto need = [&](bool present, const char* key) {
            if (!present) {
                missing.emplace_back(key);
            }
        };
        const auto& d = top["domain"];
        const auto& k = top["coefficients"];
        need(static_cast<bool>(top["task"]), "task");
        need(d && d.IsMap() && d["x_max"], "domain.x_max");
        need(d && d.IsMap() && d["cells"], "domain.cells");
        need(k && k.IsMap() && k["a"], "coefficients.a");
        need(k && k.IsMap() && k["b"], "coefficients.b");
        if (!missing.empty()) {
            std::string list;
            for (const auto& m : missing) {
                list += list.empty() ? m : ", " + m;
            }
            throw ConfigError("missing required keys: " + list);
        }
    }

    if (top["task"]) {
        const auto name = scalar<std::string>(top["task"], "task");
        try {
            c.task = parse_task(name);
        } catch (const ConfigError& e) {
            fail(top["task"], e.what());
        }
    }
    if (top["seed"]) {
        c.seed = scalar<std::uint64_t>(top["seed"], "seed");
    }
    if (top["domain"]) {
        apply_domain(top["domain"], c);
    }
    if (const auto& k = top["coefficients"]) {
        require_map(k, "coefficients");
        check_keys(k, "coefficients", {"a", "b", "D"});
        if (k["a"]) {
            c.rate = parse_rate(k["a"], "coefficients.a");
        }
        if (k["b"]) {
            c.kernel = parse_kernel(k["b"], "coefficients.b");
        }
        if (k["D"]) {
            c.diffusivity = positive(k["D"], "coefficients.D");
        }
    }
    if (top["time"]) {
        apply_time(top["time"], c);
    }
    if (const auto& n = top["initial"]) {
        require_map(n, "initial");
        check_keys(n, "initial", {"kind", "mass"});
        if (n["kind"]) {
            const auto kind = scalar<std::string>(n["kind"], "initial.kind");
            static const std::set<std::string> kinds{"exp", "x_exp", "gaussian", "steady",
                                                     "random"};
            if (!kinds.count(kind)) {
                fail(n["kind"], "unknown initial kind '" + kind +
                                    "' (expected exp, x_exp, gaussian, steady or random)");
            }
            c.initial.kind = kind;
        }
        if (n["mass"]) {
            c.initial.mass = positive(n["mass"], "initial.mass");
        }
    }
    if (const auto& s = top["steady"]) {
        require_map(s, "steady");
        check_keys(s, "steady", {"n_sequence"});
        if (s["n_sequence"]) {
            std::vector<int> seq;
            for (double v : number_list(s["n_sequence"], "steady.n_sequence")) {
                if (v != std::floor(v) || v < 1.0) {
                    fail(s["n_sequence"], "'steady.n_sequence' entries must be positive integers");
                }
                seq.push_back(static_cast<int>(v));
            }
            if (seq.empty() || !std::is_sorted(seq.begin(), seq.end()) ||
                std::adjacent_find(seq.begin(), seq.end()) != seq.end()) {
                fail(s["n_sequence"], "'steady.n_sequence' must be non-empty and strictly increasing");
            }
            c.n_sequence = std::move(seq);
        }
    }
    if (const auto& s = top["spectrum"]) {
        require_map(s, "spectrum");
        check_keys(s, "spectrum", {"k", "shift"});
        if (s["k"]) {
            const int k = scalar<int>(s["k"], "spectrum.k");
            if (k < 1) {
                fail(s["k"], "'spectrum.k' must be >= 1");
            }
            c.spectrum_k = k;
        }
        if (s["shift"]) {
            c.spectrum_shift = positive(s["shift"], "spectrum.shift");
        }
    }
    if (const auto& s = top["checks"]) {
        require_map(s, "checks");
        check_keys(s, "checks", {"samples"});
        if (s["samples"]) {
            const long long k = scalar<long long>(s["samples"], "checks.samples");
            if (k < 1) {
                fail(s["samples"], "'checks.samples' must be >= 1");
            }
            c.check_samples = static_cast<std::size_t>(k);
        }
    }
    if (top["output"]) {
        apply_output(top["output"], c);
    }
    return c;
}

YAML::Node load(const std::string& text) {
    try {
        return YAML::Load(text);
    } catch (const YAML::Exception& e) {
        throw ConfigError("line " + std::to_string(e.mark.line + 1) + ": " + e.msg);
    }
}

}  // namespace

std::string to_string(Task task) {
    switch (task) {
        case Task::evolve: return "evolve";
        case Task::steady: return "steady";
        case Task::steady_regularized: return "steady_regularized";
        case Task::spectrum: return "spectrum";
        case Task::checks: return "checks";
    }
    return "unknown";
}

Task parse_task(const std::string& name) {
    for (Task t : {Task::evolve, Task::steady, Task::steady_regularized, Task::spectrum,
                   Task::checks}) {
        if (name == to_string(t)) {
            return t;
        }
    }
    throw ConfigError("unknown task '" + name +
                      "' (expected evolve, steady, steady_regularized, spectrum or checks)");
}

std::vector<std::string> preset_names() { return {"mitosis", "linear-rate"}; }

RunConfig preset(const std::string& name) {
    if (name == "mitosis") {
        return mitosis();
    }
    if (name == "linear-rate") {
        return linear_rate();
    }
    throw ConfigError("unknown preset '" + name + "' (expected mitosis or linear-rate)");
}

RunConfig parse_config_text(const std::string& text) { return from_node(load(text)); }

RunConfig parse_config(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file " + path.string());
    }
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_config_text(buf.str());
}

}  // namespace fragdiff::app
