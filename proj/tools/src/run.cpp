#include "fragdiff/app/run.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <random>

#include <Eigen/Core>
#include <boost/version.hpp>
#include <nlohmann/json.hpp>

#include "fragdiff/analysis_checks.hpp"
#include "fragdiff/coefficients.hpp"
#include "fragdiff/evolution.hpp"
#include "fragdiff/spectral.hpp"
#include "fragdiff/stationary.hpp"

#ifndef FRAGDIFF_VERSION
#define FRAGDIFF_VERSION "unknown"
#endif

namespace fragdiff::app {

using nlohmann::json;

namespace {

std::string grading_name(const GradingSpec& g) {
    return g.kind == Grading::uniform ? "uniform" : "geometric";
}

json config_echo(const RunConfig& c) {
    json j;
    j["preset"] = c.preset;
    j["task"] = to_string(c.task);
    j["seed"] = c.seed;
    j["domain"] = {{"x_max", c.domain.x_max},
                   {"cells", c.domain.cells},
                   {"grading", grading_name(c.domain.grading)},
                   {"ratio", c.domain.grading.ratio},
                   {"right_bc", to_string(c.domain.right_bc)}};
    j["coefficients"] = {{"a", c.rate.describe()},
                         {"b", c.kernel.describe()},
                         {"D", c.diffusivity}};
    j["time"] = {{"scheme", to_string(c.time.scheme)},
                 {"dt", c.time.dt},
                 {"t_end", c.time.t_end},
                 {"output_every", c.time.output_every},
                 {"moment_order", c.time.moment_order},
                 {"check_positivity", c.time.check_positivity}};
    j["initial"] = {{"kind", c.initial.kind}, {"mass", c.initial.mass}};
    j["steady"] = {{"n_sequence", c.n_sequence}};
    j["spectrum"] = {{"k", c.spectrum_k}, {"shift", c.spectrum_shift}};
    j["checks"] = {{"samples", c.check_samples}};
    return j;
}

json mesh_stats(const Mesh& mesh) {
    return {{"cells", mesh.size()},
            {"x_max", mesh.x_max()},
            {"h_min", mesh.h_min()},
            {"h_max", mesh.h_max()},
            {"grading", grading_name(mesh.grading())}};
}

json versions() {
    return {{"fragdiff", FRAGDIFF_VERSION},
            {"eigen", std::to_string(EIGEN_WORLD_VERSION) + "." +
                          std::to_string(EIGEN_MAJOR_VERSION) + "." +
                          std::to_string(EIGEN_MINOR_VERSION)},
            {"boost", std::to_string(BOOST_VERSION / 100000) + "." +
                          std::to_string(BOOST_VERSION / 100 % 1000) + "." +
                          std::to_string(BOOST_VERSION % 100)}};
}

json hypotheses_json(const HypothesisCheck& h) {
    return {{"rate_positive", h.rate_positive},
            {"contraction", h.contraction},
            {"rate_diverges", h.rate_diverges},
            {"all", h.all()}};
}

json fit_json(const DecayFit& f) {
    return {{"status", to_string(f.status)},
            {"nu_hat", f.nu_hat},
            {"r_squared", f.r_squared},
            {"t_begin", f.t_begin},
            {"t_end", f.t_end},
            {"points", f.points},
            {"diagnostic", f.diagnostic}};
}

json inequality_json(const InequalityReport& r) {
    return {{"name", r.name},
            {"lhs", r.lhs},
            {"rhs", r.rhs},
            {"margin", r.margin},
            {"tolerance", r.tolerance},
            {"status", to_string(r.status)}};
}

json sample_json(const SampleCheckReport& r) {
    return {{"name", r.name},
            {"samples", r.samples},
            {"violations", r.violations},
            {"worst_margin", r.worst_margin},
            {"passed", r.passed()}};
}

State normalized(State s, double mass) {
    const double m1 = moment(s, 1.0);
    if (!(m1 > 0.0)) {
        throw ConfigError("initial profile has no mass on this mesh");
    }
    s *= mass / m1;
    return s;
}

State random_state(const MeshPtr& mesh, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    std::vector<double> v(mesh->size());
    const auto x = mesh->centers();
    for (std::size_t i = 0; i < v.size(); ++i) {
        v[i] = u(rng) * std::exp(-x[i] / 4.0);
    }
    return State(mesh, std::move(v));
}

State initial_state(const RunConfig& c, const OperatorBundle& bundle) {
    const auto& kind = c.initial.kind;
    const MeshPtr& mesh = bundle.mesh_ptr();
    if (kind == "steady") {
        return solve_steady(bundle, c.initial.mass).psi;
    }
    if (kind == "random") {
        std::mt19937_64 rng(c.seed);
        return normalized(random_state(mesh, rng), c.initial.mass);
    }
    if (kind == "x_exp") {
        return normalized(State::sample(mesh, [](double x) { return x * std::exp(-x); }),
                          c.initial.mass);
    }
    if (kind == "gaussian") {
        return normalized(
            State::sample(mesh, [](double x) { return x * std::exp(-x * x / 4.0); }),
            c.initial.mass);
    }
    return normalized(State::sample(mesh, [](double x) { return std::exp(-x); }), c.initial.mass);
}

class Writer {
public:
    Writer(const RunConfig& config, std::filesystem::path dir, RunResult& result)
        : config_(config), dir_(std::move(dir)), result_(result) {}

    void record(json j) { records_.push_back(std::move(j)); }

    void profile(const State& s) {
        if (!config_.output.csv) {
            return;
        }
        std::string text = "x,phi\n";
        const auto x = s.mesh().centers();
        for (std::size_t i = 0; i < s.size(); ++i) {
            text += format_double(x[i]) + "," + format_double(s[i]) + "\n";
        }
        write("profile.csv", text);
    }

    void moments(const Trajectory& traj) {
        if (!config_.output.csv) {
            return;
        }
        std::string text = "t,M0,M1,M2,Mm,dist_ref_X1,mass_drift_rel,tail_mass_frac\n";
        for (std::size_t row : traj.output_rows) {
            const StepRecord& r = traj.records[row];
            for (double v : {r.t, r.m0, r.m1, r.m2, r.mm, r.dist_ref_x1, r.mass_drift_rel}) {
                text += format_double(v) + ",";
            }
            text += format_double(r.tail_mass_frac) + "\n";
        }
        write("moments.csv", text);
    }

    void finish(const json& meta) {
        write("run_meta.json", meta.dump(2) + "\n");
        if (!config_.output.jsonl) {
            return;
        }
        std::string text = meta.dump() + "\n";
        for (const auto& r : records_) {
            text += r.dump() + "\n";
        }
        write("diagnostics.jsonl", text);
    }

private:
    void write(const std::string& name, const std::string& text) {
        std::ofstream out(dir_ / name, std::ios::binary | std::ios::trunc);
        out << text;
        if (!out) {
            throw ConfigError("cannot write " + (dir_ / name).string());
        }
        result_.files.push_back(name);
    }

    const RunConfig& config_;
    std::filesystem::path dir_;
    RunResult& result_;
    std::vector<json> records_;
};

void run_evolve(const RunConfig& c, const OperatorBundle& bundle, Writer& out, json& meta,
                RunResult& result) {
    const State initial = initial_state(c, bundle);

    std::optional<State> reference;
    json ref = {{"record", "reference"}};
    try {
        reference = solve_steady(bundle, moment(initial, 1.0)).psi;
        ref["available"] = true;
        ref["residual_x1"] = x1_norm(bundle.mesh(),
                                     apply_generator(bundle, *reference).values());
    } catch (const Error& e) {
        ref["available"] = false;
        ref["reason"] = e.what();
    }
    out.record(ref);

    IntegratorConfig cfg = c.time;
    const Trajectory traj = evolve(bundle, initial, cfg, reference);
    const double budget = stability_budget(bundle, traj.dt);
    meta["dt"] = traj.dt;
    meta["stability_budget"] = budget;

    DecayFit fit;
    if (reference) {
        fit = decay_rate(traj);
    } else {
        fit.status = FitStatus::not_applicable;
        fit.diagnostic = "no steady state to measure against";
    }
    json summary = {{"record", "evolve"},
                    {"scheme", to_string(cfg.scheme)},
                    {"dt", traj.dt},
                    {"steps", traj.records.size() - 1},
                    {"t_final", traj.records.back().t},
                    {"max_mass_drift_rel", traj.max_mass_drift_rel},
                    {"flux_budget_rel", traj.flux_budget_rel},
                    {"min_value", traj.min_value},
                    {"stability_budget", budget},
                    {"final_dist_ref_x1", traj.records.back().dist_ref_x1},
                    {"decay_fit", fit_json(fit)}};
    if (cfg.scheme != Scheme::fully_implicit && budget > 2.0) {
        summary["warning"] = "explicit birth step exceeds the stability budget";
    }
    out.record(summary);
    out.moments(traj);
    out.profile(traj.final_state());

    result.summary = "evolve: " + std::to_string(traj.records.size() - 1) + " steps, drift " +
                     format_double(traj.max_mass_drift_rel) + ", decay " +
                     to_string(fit.status) + " nu_hat " + format_double(fit.nu_hat);
}

void run_steady(const RunConfig& c, const OperatorBundle& bundle, Writer& out,
                RunResult& result) {
    const SteadyResult s = solve_steady(bundle, c.initial.mass);
    json rec = {{"record", "steady"},
                {"residual_x1", s.residual_x1},
                {"min_value", s.min_value},
                {"constraint_row", s.constraint_row}};
    json mom;
    for (double m : {0.0, 1.0, 2.0, 3.0, 4.0}) {
        mom["M" + std::to_string(static_cast<int>(m))] = moment(s.psi, m);
    }
    rec["moments"] = mom;

    const std::vector<double> orders{3.0, 4.0};
    try {
        const auto k = contraction_constants(bundle.rate(), bundle.kernel(), orders,
                                             bundle.mesh().x_max());
        json ceil = json::array();
        for (const auto& [m, mu] : k.mu) {
            const double mm = moment(s.psi, m);
            ceil.push_back({{"m", m}, {"mu", mu}, {"moment", mm}, {"within", mm <= mu}});
        }
        rec["moment_ceilings"] = ceil;
    } catch (const Error& e) {
        rec["moment_ceilings"] = e.what();
    }
    out.record(rec);
    out.profile(s.psi);
    result.summary = "steady: residual " + format_double(s.residual_x1);
}

void run_regularized(const RunConfig& c, const OperatorBundle& bundle, Writer& out,
                     RunResult& result) {
    const RegularizedReport r = solve_steady_regularized(bundle, c.n_sequence);
    for (const auto& s : r.steps) {
        out.record({{"record", "regularized_step"},
                    {"n", s.n},
                    {"base_residual_x1", s.base_residual_x1},
                    {"M1", moment(s.psi, 1.0)}});
    }
    out.record({{"record", "steady_regularized"},
                {"m", r.m},
                {"x1_distances", r.x1_distances},
                {"xm_distances", r.xm_distances},
                {"limit_residual_x1", r.limit_residual_x1},
                {"cauchy", r.cauchy},
                {"diagnostic", r.diagnostic}});
    out.profile(r.steps.back().psi);
    result.summary = std::string("steady_regularized: ") + (r.cauchy ? "cauchy" : r.diagnostic);
}

void run_spectrum(const RunConfig& c, const OperatorBundle& bundle, Writer& out,
                  RunResult& result) {
    const EigenPair dom = dominant_eigenpair(bundle);
    out.record({{"record", "dominant"},
                {"lambda0", dom.lambda0},
                {"iterations", dom.iterations},
                {"hypotheses", hypotheses_json(dom.hypotheses)},
                {"hypotheses_text", dom.hypotheses.describe()}});
    GapOptions opt;
    opt.shift = c.spectrum_shift;
    opt.seed = c.seed;
    const GapReport gap = spectral_gap(bundle, c.spectrum_k, opt, dom.psi);
    json eig = json::array();
    for (const auto& z : gap.eigenvalues) {
        eig.push_back({z.real(), z.imag()});
    }
    out.record({{"record", "spectral_gap"},
                {"epsilon_hat", gap.epsilon_hat},
                {"eigenvalues", eig},
                {"residuals", gap.residuals},
                {"shift", gap.shift},
                {"restarts", gap.restarts},
                {"converged", gap.converged},
                {"violation", gap.violation},
                {"note", "truncated-operator estimate"}});
    out.profile(dom.psi);
    result.summary = "spectrum: lambda0 " + format_double(dom.lambda0) + ", epsilon_hat " +
                     format_double(gap.epsilon_hat);
}

void run_checks(const RunConfig& c, const OperatorBundle& bundle, Writer& out,
                RunResult& result) {
    auto note_status = [&](const std::string& name, bool ok) {
        if (!ok) {
            result.failed.push_back(name);
        }
    };

    std::mt19937_64 rng(c.seed);
    std::uniform_real_distribution<double> scale(0.5, 2.0);

    std::vector<std::pair<SampledFunction, Weight>> kato{
        {samples::x_exp(), Weight::linear()},
        {samples::shifted_exp(), Weight::power(2.0)},
        {samples::sin_exp(), Weight::power_cutoff(2.0, 5.0)}};
    for (std::size_t k = 0; k < c.check_samples; ++k) {
        kato.emplace_back(samples::sin_exp().scaled(scale(rng), scale(rng)), Weight::linear());
    }
    for (const auto& [f, ell] : kato) {
        const auto r = check_kato(f, ell);
        json j = inequality_json(r);
        j["record"] = "kato";
        out.record(j);
        note_status("kato " + r.name, r.status != CheckStatus::fail);
    }

    for (const auto& f : {samples::x_exp(), samples::sin_exp()}) {
        for (double m : {-0.5, 0.0, 0.5}) {
            const auto r = check_interpolation(f, m);
            json forms = json::array();
            forms.push_back(inequality_json(r.product_form));
            for (const auto& e : r.epsilon_forms) {
                forms.push_back(inequality_json(e));
            }
            for (const auto& e : r.pointwise) {
                forms.push_back(inequality_json(e));
            }
            out.record({{"record", "interpolation"},
                        {"function", f.name},
                        {"m", m},
                        {"passed", r.passed()},
                        {"forms", forms}});
            note_status("interpolation " + f.name, r.passed());
        }
    }

    for (const auto& r : {check_kernel_positivity(100000, c.seed),
                          check_monotone_kernel(100000, c.seed)}) {
        json j = sample_json(r);
        j["record"] = "kernel";
        out.record(j);
        note_status(r.name, r.passed());
    }

    std::vector<State> states;
    for (std::size_t k = 0; k < c.check_samples; ++k) {
        states.push_back(random_state(bundle.mesh_ptr(), rng));
    }
    if (bundle.has_birth()) {
        const auto r = check_strict_domination(bundle, 2.0, states);
        json j = sample_json(r);
        j["record"] = "strict_domination";
        out.record(j);
        note_status(r.name, r.passed());
    }

    const std::vector<double> times{0.05, 0.1, 0.5, 1.0};
    {
        const auto r = check_growth_bound(states, 3.0, times);
        json j = sample_json(r);
        j["record"] = "growth_bound";
        j["omega"] = heat_growth_constant(3.0);
        out.record(j);
        note_status(r.name, r.passed());
    }

    {
        const double s = 1.0;
        const double t = 1.0;
        const auto f = samples::odd_gaussian(s);
        const State g = heat_apply_exact(State::sample(bundle.mesh_ptr(), f.f), t);
        const State exact = State::sample(bundle.mesh_ptr(), [&](double x) {
            return std::pow(s / (s + t), 1.5) * x * std::exp(-x * x / (4.0 * (s + t)));
        });
        double err = 0.0;
        for (std::size_t i = 0; i < g.size(); ++i) {
            err = std::max(err, std::abs(g[i] - exact[i]));
        }
        const bool ok = err <= 1e-6;
        out.record({{"record", "heat_oracle"}, {"s", s}, {"t", t}, {"max_error", err},
                    {"passed", ok}});
        note_status("heat_oracle", ok);
    }

    if (bundle.has_birth()) {
        const std::vector<State> probe{
            normalized(State::sample(bundle.mesh_ptr(), samples::x_exp().f), 1.0)};
        const auto r = check_miyadera(bundle, probe, 2.0);
        json curves = json::array();
        for (const auto& cv : r.curves) {
            curves.push_back({{"t", cv.t},
                              {"ratio", cv.ratio},
                              {"t_m", cv.t_m ? json(*cv.t_m) : json(nullptr)},
                              {"q_m", cv.q_m},
                              {"final_ratio", cv.final_ratio},
                              {"weak", cv.weak}});
        }
        out.record({{"record", "miyadera"},
                    {"m", r.m},
                    {"delta_m", r.delta_m ? json(*r.delta_m) : json(nullptr)},
                    {"passed", r.passed},
                    {"flagged", r.flagged},
                    {"diagnostic", r.diagnostic},
                    {"curves", curves}});
        note_status("miyadera", r.passed);
    }

    result.summary = "checks: " + std::to_string(result.failed.size()) + " failed";
}

}  // namespace

std::string format_double(double v) {
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

std::filesystem::path default_output_dir(const RunConfig& config) {
    if (!config.output.dir.empty()) {
        return config.output.dir;
    }
    std::filesystem::path root = ".";
    if (const char* env = std::getenv("FRAGDIFF_OUTPUT_ROOT"); env && *env) {
        root = env;
    }
    return root / ("fragdiff-" + to_string(config.task));
}

RunResult run(const RunConfig& config, const std::filesystem::path& out_dir) {
    RunResult result;
    result.out_dir = out_dir;

    const MeshPtr mesh = build_mesh(config.domain.x_max, config.domain.cells,
                                    config.domain.grading);
    const OperatorBundle bundle(mesh, config.rate, config.kernel, config.domain.right_bc,
                                config.diffusivity);

    std::error_code ec;
    std::filesystem::create_directories(out_dir, ec);
    if (ec) {
        throw ConfigError("cannot create output directory " + out_dir.string() + ": " +
                          ec.message());
    }

    json meta = {{"record", "run_meta"},
                 {"config", config_echo(config)},
                 {"mesh", mesh_stats(*mesh)},
                 {"right_bc", to_string(config.domain.right_bc)},
                 {"versions", versions()}};
    Writer out(config, out_dir, result);

    switch (config.task) {
        case Task::evolve: run_evolve(config, bundle, out, meta, result); break;
        case Task::steady: run_steady(config, bundle, out, result); break;
        case Task::steady_regularized: run_regularized(config, bundle, out, result); break;
        case Task::spectrum: run_spectrum(config, bundle, out, result); break;
        case Task::checks: run_checks(config, bundle, out, result); break;
    }
    meta["failed_checks"] = result.failed;
    out.finish(meta);

    if (!result.failed.empty()) {
        std::string list;
        for (const auto& f : result.failed) {
            list += list.empty() ? f : ", " + f;
        }
        throw PropertyViolation("failed checks: " + list);
    }
    return result;
}

int exit_code(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return 2;
        case ErrorKind::numerical: return 3;
        case ErrorKind::property: return 4;
    }
    return 1;
}

std::string to_string(ErrorKind kind) {
    switch (kind) {
        case ErrorKind::config: return "config";
        case ErrorKind::numerical: return "numerical";
        case ErrorKind::property: return "property";
    }
    return "unknown";
}

std::string error_record(ErrorKind kind, const std::string& message) {
    return json{{"record", "error"},
                {"kind", to_string(kind)},
                {"exit_code", exit_code(kind)},
                {"message", message}}
        .dump();
}

}  // namespace fragdiff::app
