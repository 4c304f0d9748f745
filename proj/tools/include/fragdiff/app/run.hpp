#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "fragdiff/app/config.hpp"
#include "fragdiff/errors.hpp"

namespace fragdiff::app {

/// Shortest round-trip decimal text of v ("nan", "inf" for non-finite values).
std::string format_double(double v);

/// Output directory: config.output.dir if set, else
/// $FRAGDIFF_OUTPUT_ROOT (or the working directory) / "fragdiff-<task>".
std::filesystem::path default_output_dir(const RunConfig& config);

struct RunResult {
    std::filesystem::path out_dir;
    std::vector<std::string> files;   ///< written file names, in order
    std::vector<std::string> failed;  ///< names of failed property checks
    std::string summary;              ///< one line for the console
};

/// Runs config.task and writes moments.csv (evolve only), profile.csv,
/// diagnostics.jsonl and run_meta.json into out_dir. Outputs depend only on
/// the config, so reruns produce identical files.
///
/// Library errors propagate. A failed check in the checks task is recorded
/// in diagnostics.jsonl first and then raised as PropertyViolation.
RunResult run(const RunConfig& config, const std::filesystem::path& out_dir);

/// Exit code for an error category: config 2, numerical 3, property 4.
int exit_code(ErrorKind kind);

std::string to_string(ErrorKind kind);

/// One-line JSON error record {"record":"error","kind":...,"message":...}.
std::string error_record(ErrorKind kind, const std::string& message);

}  // namespace fragdiff::app
