#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "fragdiff/coefficients.hpp"
#include "fragdiff/evolution.hpp"
#include "fragdiff/mesh.hpp"
#include "fragdiff/operators.hpp"

namespace fragdiff::app {

enum class Task { evolve, steady, steady_regularized, spectrum, checks };

std::string to_string(Task task);
/// Throws ConfigError for unknown names.
Task parse_task(const std::string& name);

struct DomainConfig {
    double x_max = 40.0;
    std::size_t cells = 2048;
    GradingSpec grading;
    RightBoundary right_bc = RightBoundary::noflux;
};

/// Initial profile for evolve runs, rescaled to M_1 = mass.
///   exp       e^{-x}
///   x_exp     x e^{-x}
///   gaussian  x e^{-x²/4}
///   steady    the discrete steady state of the configured operator
///   random    seeded random nonnegative cell values times e^{-x/4}
struct InitialConfig {
    std::string kind = "exp";
    double mass = 1.0;
};

struct OutputConfig {
    std::string dir;   ///< empty: derived from the output root
    bool csv = true;
    bool jsonl = true;
};

struct RunConfig {
    std::string preset;
    Task task = Task::evolve;
    DomainConfig domain;
    RateModel rate = RateModel::constant(1.0);
    DaughterKernel kernel = DaughterKernel::power_law(0.0);
    double diffusivity = 1.0;
    IntegratorConfig time;
    InitialConfig initial;
    std::vector<int> n_sequence{4, 16, 64, 256};
    int spectrum_k = 8;
    double spectrum_shift = 0.25;
    std::size_t check_samples = 10;
    std::uint64_t seed = 1;
    OutputConfig output;
};

/// Names of the built-in scenario presets.
std::vector<std::string> preset_names();

/// Throws ConfigError for unknown names.
RunConfig preset(const std::string& name);

/// Parses a YAML run configuration.
///
/// Top-level keys: preset, task, seed, domain, coefficients, time, initial,
/// steady, spectrum, checks, output. A preset supplies defaults for every
/// key; without one, task, domain.x_max, domain.cells, coefficients.a and
/// coefficients.b are required. Unknown keys, type mismatches and constraint
/// violations raise ConfigError carrying the line number; missing keys are
/// reported together.
RunConfig parse_config(const std::filesystem::path& path);
RunConfig parse_config_text(const std::string& text);

}  // namespace fragdiff::app
