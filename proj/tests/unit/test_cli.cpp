#include <catch_amalgamated.hpp>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "fragdiff/app/config.hpp"
#include "fragdiff/app/run.hpp"

using namespace fragdiff;
using namespace fragdiff::app;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

fs::path scratch(const std::string& name) {
    const fs::path p = fs::temp_directory_path() / ("fragdiff-test-" + name);
    fs::remove_all(p);
    return p;
}

std::string config_error(const std::string& text) {
    try {
        parse_config_text(text);
    } catch (const ConfigError& e) {
        return e.what();
    }
    return "";
}

std::size_t count_lines(const std::string& s) {
    return static_cast<std::size_t>(std::count(s.begin(), s.end(), '\n'));
}

const char* small_steady = R"(
task: steady
domain:
  x_max: 30
  cells: 256
coefficients:
  a: {kind: power, gamma: 1}
  b: {kind: powerlaw, nu: 0}
)";

}  // namespace

TEST_CASE("presets", "[cli][config]") {
    const auto m = preset("mitosis");
    CHECK(m.domain.x_max == 40.0);
    CHECK(m.domain.cells == 2048);
    CHECK(m.time.scheme == Scheme::imex_euler);
    CHECK(m.rate.describe() == "constant(1)");
    CHECK(m.kernel.describe() == "powerlaw(0)");
    CHECK(m.time.t_end / m.time.dt == Catch::Approx(10000.0));

    const auto l = preset("linear-rate");
    CHECK(l.domain.x_max == 20.0);
    CHECK(l.domain.cells == 1024);
    CHECK(l.time.scheme == Scheme::fully_implicit);
    CHECK(l.rate.describe() == "power(1)");

    CHECK(preset_names().size() == 2);
    CHECK_THROWS_AS(preset("nope"), ConfigError);
}

TEST_CASE("preset files in the repository parse", "[cli][config]") {
    const char* dir = std::getenv("FRAGDIFF_PRESETS");
    if (!dir) {
        SKIP("FRAGDIFF_PRESETS not set");
    }
    for (const auto& entry : fs::directory_iterator(dir)) {
        INFO(entry.path().string());
        CHECK_NOTHROW(parse_config(entry.path()));
    }
    const auto reg = parse_config(fs::path(dir) / "mitosis-regularized.yaml");
    CHECK(reg.task == Task::steady_regularized);
    CHECK(reg.n_sequence == std::vector<int>{4, 16, 64, 256});
}

TEST_CASE("empty config lists every missing key", "[cli][config]") {
    const auto msg = config_error("");
    CHECK(msg.find("missing required keys") != std::string::npos);
    for (const char* key :
         {"task", "domain.x_max", "domain.cells", "coefficients.a", "coefficients.b"}) {
        CHECK(msg.find(key) != std::string::npos);
    }
    CHECK(config_error("task: steady\n").find("domain.x_max") != std::string::npos);
}

TEST_CASE("unknown keys are reported with their line", "[cli][config]") {
    const auto msg = config_error("preset: mitosis\ndomain:\n  x_max: 40\n  colls: 12\n");
    CHECK(msg.find("line 4") != std::string::npos);
    CHECK(msg.find("unknown key 'colls'") != std::string::npos);
    CHECK(config_error("preset: mitosis\nfoo: 1\n").find("line 2") != std::string::npos);
}

TEST_CASE("constraint violations carry the line", "[cli][config]") {
    const std::string base = "preset: linear-rate\n";
    auto msg = config_error(base + "coefficients:\n  a: {kind: power, gamma: -1}\n");
    CHECK(msg.find("line 3") != std::string::npos);
    CHECK(msg.find("gamma") != std::string::npos);

    CHECK(config_error(base + "coefficients:\n  D: 0\n").find("line 3") != std::string::npos);
    CHECK(config_error(base + "domain:\n  cells: abc\n").find("line 3") != std::string::npos);
    CHECK(config_error(base + "domain:\n  cells: 4\n").find("at least 8") != std::string::npos);
    CHECK(config_error(base + "domain:\n  grading: geometric\n  ratio: 1.5\n").find("line 4") !=
          std::string::npos);
    CHECK(!config_error(base + "domain:\n  ratio: 1.05\n").empty());
    CHECK(!config_error(base + "domain:\n  right_bc: periodic\n").empty());
    CHECK(!config_error(base + "coefficients:\n  b: {nu: 0.5}\n").empty());
    CHECK(!config_error(base + "coefficients:\n  b: {kind: custom}\n").empty());
    CHECK(!config_error(base + "time:\n  scheme: rk4\n").empty());
    CHECK(!config_error(base + "time:\n  dt: -1\n").empty());
    CHECK(!config_error(base + "time:\n  output_every: 0\n").empty());
    CHECK(!config_error(base + "task: solve\n").empty());
    CHECK(!config_error(base + "initial:\n  kind: delta\n").empty());
    CHECK(!config_error(base + "initial:\n  mass: 0\n").empty());
    CHECK(!config_error(base + "steady:\n  n_sequence: [16, 4]\n").empty());
    CHECK(!config_error(base + "spectrum:\n  k: 0\n").empty());
    CHECK(!config_error(base + "output:\n  formats: [hdf5]\n").empty());
    CHECK(!config_error("preset: [1, 2]\n").empty());
    CHECK(!config_error("- 1\n- 2\n").empty());
    CHECK(!config_error("task: [unclosed\n").empty());
}

TEST_CASE("full config without preset", "[cli][config]") {
    const auto c = parse_config_text(R"(
task: spectrum
seed: 9
domain:
  x_max: 25
  cells: 300
  grading: geometric
  ratio: 1.01
  right_bc: dirichlet
coefficients:
  a: {kind: regularized, base: {kind: constant, c: 2}, n: 8}
  b: {kind: powerlaw, nu: -0.5}
  D: 0.5
time:
  scheme: crank_nicolson_imex
  dt: 0
  t_end: 3
  output_every: 5
  moment_order: 4
  check_positivity: false
initial: {kind: x_exp, mass: 2}
spectrum: {k: 3, shift: 0.5}
checks: {samples: 2}
output: {dir: somewhere, formats: [jsonl]}
)");
    CHECK(c.task == Task::spectrum);
    CHECK(c.seed == 9);
    CHECK(c.domain.grading.kind == Grading::geometric);
    CHECK(c.domain.grading.ratio == 1.01);
    CHECK(c.domain.right_bc == RightBoundary::dirichlet);
    CHECK(c.rate.describe() == "regularized(constant(2), 8)");
    CHECK(c.kernel.nu() == -0.5);
    CHECK(c.diffusivity == 0.5);
    CHECK(c.time.scheme == Scheme::crank_nicolson_imex);
    CHECK(c.time.dt == 0.0);
    CHECK(c.time.output_every == 5);
    CHECK_FALSE(c.time.check_positivity);
    CHECK(c.initial.kind == "x_exp");
    CHECK(c.initial.mass == 2.0);
    CHECK(c.spectrum_k == 3);
    CHECK(c.check_samples == 2);
    CHECK(c.output.dir == "somewhere");
    CHECK_FALSE(c.output.csv);
    CHECK(c.output.jsonl);

    const auto t = parse_config_text(
        "task: steady\ndomain: {x_max: 10, cells: 32}\ncoefficients:\n  a: {kind: table, x: [0, 1], "
        "values: [1, 2]}\n  b: {kind: powerlaw}\n");
    CHECK(t.rate.describe() == "table(2 points)");
    CHECK(parse_config_text("preset: mitosis\ncoefficients: {a: 3}\n").rate.describe() ==
          "constant(3)");
}

TEST_CASE("task names", "[cli][config]") {
    for (auto t : {Task::evolve, Task::steady, Task::steady_regularized, Task::spectrum,
                   Task::checks}) {
        CHECK(parse_task(to_string(t)) == t);
    }
    CHECK_THROWS_AS(parse_task("x"), ConfigError);
    CHECK_THROWS_AS(parse_config("/nonexistent/fragdiff.yaml"), ConfigError);
}

TEST_CASE("number formatting is shortest round-trip", "[cli][output]") {
    CHECK(format_double(0.1) == "0.1");
    CHECK(format_double(1.0) == "1");
    CHECK(format_double(-2.5e-300) == "-2.5e-300");
    CHECK(format_double(std::nan("")) == "nan");
    CHECK(std::stod(format_double(1.0 / 3.0)) == 1.0 / 3.0);
}

TEST_CASE("error records and exit codes", "[cli][output]") {
    CHECK(exit_code(ErrorKind::config) == 2);
    CHECK(exit_code(ErrorKind::numerical) == 3);
    CHECK(exit_code(ErrorKind::property) == 4);
    const auto rec = error_record(ErrorKind::numerical, "no \"luck\"");
    CHECK(rec.find("\"kind\":\"numerical\"") != std::string::npos);
    CHECK(rec.find("\"exit_code\":3") != std::string::npos);
    CHECK(rec.find("no \\\"luck\\\"") != std::string::npos);
}

TEST_CASE("output directory defaults", "[cli][output]") {
    RunConfig c = preset("mitosis");
    c.task = Task::steady;
    ::setenv("FRAGDIFF_OUTPUT_ROOT", "/tmp/root-for-test", 1);
    CHECK(default_output_dir(c) == fs::path("/tmp/root-for-test/fragdiff-steady"));
    ::unsetenv("FRAGDIFF_OUTPUT_ROOT");
    CHECK(default_output_dir(c) == fs::path("./fragdiff-steady"));
    c.output.dir = "explicit";
    CHECK(default_output_dir(c) == fs::path("explicit"));
}

TEST_CASE("steady run writes deterministic outputs", "[cli][run]") {
    const auto c = parse_config_text(small_steady);
    const auto a = scratch("steady-a");
    const auto b = scratch("steady-b");
    const auto r = run(c, a);
    run(c, b);
    CHECK(r.failed.empty());
    for (const char* f : {"profile.csv", "diagnostics.jsonl", "run_meta.json"}) {
        INFO(f);
        REQUIRE(fs::exists(a / f));
        CHECK(slurp(a / f) == slurp(b / f));
    }
    const auto profile = slurp(a / "profile.csv");
    CHECK(profile.rfind("x,phi\n", 0) == 0);
    CHECK(count_lines(profile) == 257);
    const auto diag = slurp(a / "diagnostics.jsonl");
    CHECK(diag.find("\"record\":\"run_meta\"") != std::string::npos);
    CHECK(diag.find("\"record\":\"steady\"") != std::string::npos);
    CHECK(diag.find("\"right_bc\":\"noflux\"") != std::string::npos);
    CHECK(slurp(a / "run_meta.json").find("\"eigen\"") != std::string::npos);
}

TEST_CASE("evolve run writes the moment table", "[cli][run]") {
    auto c = parse_config_text(small_steady);
    c.task = Task::evolve;
    c.time.scheme = Scheme::fully_implicit;
    c.time.dt = 0.05;
    c.time.t_end = 2.0;
    c.time.output_every = 10;
    const auto dir = scratch("evolve");
    run(c, dir);
    const auto csv = slurp(dir / "moments.csv");
    CHECK(csv.rfind("t,M0,M1,M2,Mm,dist_ref_X1,mass_drift_rel,tail_mass_frac\n", 0) == 0);
    CHECK(count_lines(csv) == 1 + 5);
    CHECK(csv.find("nan") == std::string::npos);
    CHECK(slurp(dir / "diagnostics.jsonl").find("\"decay_fit\"") != std::string::npos);
}

TEST_CASE("evolve without a steady state leaves the distance column empty", "[cli][run]") {
    auto c = parse_config_text(
        "task: evolve\ndomain: {x_max: 10, cells: 64}\ncoefficients:\n  a: 0\n  b: {kind: "
        "powerlaw}\ntime: {dt: 0.01, t_end: 0.05}\n");
    const auto dir = scratch("heat");
    run(c, dir);
    CHECK(slurp(dir / "moments.csv").find("nan") != std::string::npos);
    CHECK(slurp(dir / "diagnostics.jsonl").find("\"available\":false") != std::string::npos);
}

TEST_CASE("format selection", "[cli][run]") {
    auto c = parse_config_text(small_steady);
    c.output.csv = false;
    const auto dir = scratch("formats");
    const auto r = run(c, dir);
    CHECK_FALSE(fs::exists(dir / "profile.csv"));
    CHECK(fs::exists(dir / "diagnostics.jsonl"));
    CHECK(std::find(r.files.begin(), r.files.end(), "run_meta.json") != r.files.end());
}

TEST_CASE("library errors propagate from run", "[cli][run]") {
    auto c = parse_config_text(small_steady);
    c.rate = RateModel::constant(0.0);
    CHECK_THROWS_AS(run(c, scratch("zero-rate")), ConfigError);
}

TEST_CASE("executable exit codes", "[cli][exe]") {
    const char* exe = std::getenv("FRAGDIFF_CLI");
    if (!exe) {
        SKIP("FRAGDIFF_CLI not set");
    }
    const auto dir = scratch("exe");
    fs::create_directories(dir);
    const auto cfg = dir / "run.yaml";
    std::ofstream(cfg) << small_steady;
    const auto bad = dir / "bad.yaml";
    std::ofstream(bad) << "task: steady\nbogus: 1\n";

    auto call = [&](const std::string& args) {
        const std::string cmd = std::string(exe) + " " + args + " > " + (dir / "stdout").string() +
                                " 2> " + (dir / "stderr").string();
        const int status = std::system(cmd.c_str());
        return WEXITSTATUS(status);
    };
    CHECK(call("--config " + cfg.string() + " --out " + (dir / "ok").string()) == 0);
    CHECK(fs::exists(dir / "ok" / "profile.csv"));
    CHECK(slurp(dir / "stdout").find("steady") != std::string::npos);

    CHECK(call("--config " + bad.string()) == 2);
    const auto err = slurp(dir / "stderr");
    CHECK(err.find("\"record\":\"error\"") != std::string::npos);
    CHECK(err.find("line 2") != std::string::npos);

    CHECK(call("--config " + cfg.string() + " --task wrong") == 2);
    CHECK(call("") == 2);
    CHECK(call("--config " + cfg.string() + " --preset mitosis") == 2);
    CHECK(call("--config " + cfg.string() + " --task spectrum --quiet --out " +
               (dir / "spec").string()) == 0);
    CHECK(slurp(dir / "stdout").empty());
    CHECK(slurp(dir / "spec" / "diagnostics.jsonl").find("epsilon_hat") != std::string::npos);
}
