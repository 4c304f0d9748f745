#include <iostream>

#include "CLI11.hpp"

#include "fragdiff/app/config.hpp"
#include "fragdiff/app/run.hpp"

namespace {

int fail(fragdiff::ErrorKind kind, const std::string& message) {
    std::cerr << fragdiff::app::error_record(kind, message) << "\n";
    return fragdiff::app::exit_code(kind);
}

}  // namespace

int main(int argc, char** argv) {
    using namespace fragdiff;

    CLI::App cli{"Fragmentation with size diffusion: finite-volume solver and property checks"};
    std::string config_path;
    std::string preset_name;
    std::string task;
    std::string out_dir;
    bool quiet = false;
    auto* config_opt = cli.add_option("--config", config_path, "YAML run configuration")
                           ->check(CLI::ExistingFile);
    cli.add_option("--preset", preset_name, "built-in scenario (mitosis, linear-rate)")
        ->excludes(config_opt);
    cli.add_option("--task", task,
                   "override the task (evolve, steady, steady_regularized, spectrum, checks)");
    cli.add_option("--out", out_dir, "output directory (default $FRAGDIFF_OUTPUT_ROOT/fragdiff-<task>)");
    cli.add_flag("--quiet", quiet, "suppress the summary line");

    try {
        cli.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) {
            return cli.exit(e);
        }
        return fail(ErrorKind::config, e.what());
    }

    try {
        if (config_path.empty() && preset_name.empty()) {
            throw ConfigError("one of --config or --preset is required");
        }
        app::RunConfig config =
            config_path.empty() ? app::preset(preset_name) : app::parse_config(config_path);
        if (!task.empty()) {
            config.task = app::parse_task(task);
        }
        const auto dir = out_dir.empty() ? app::default_output_dir(config)
                                         : std::filesystem::path(out_dir);
        const auto result = app::run(config, dir);
        if (!quiet) {
            std::cout << result.summary << " -> " << result.out_dir.string() << "\n";
        }
        return 0;
    } catch (const Error& e) {
        return fail(e.kind(), e.what());
    } catch (const std::exception& e) {
        return fail(ErrorKind::numerical, e.what());
    }
}
