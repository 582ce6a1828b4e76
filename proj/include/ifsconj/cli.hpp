#pragma once

// Command dispatch for the ifsconj executable.

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace ifsconj {

inline const std::vector<std::string> kCommands = {"conjugacy", "verify", "orbit",    "linearize", "classify",
                                                   "multidim",  "distance", "audit", "probe",     "attractor"};

struct RunConfig {
    std::string command;
    std::string input_path;
    std::string output_path;  // empty: standard output
    std::string format = "json";
    std::uint64_t seed = 0;
    std::optional<std::size_t> grid;
    std::optional<double> tolerance;
    std::optional<double> radius;
    std::optional<std::size_t> n_max;
    std::optional<int> level;
    std::optional<double> delta;
    std::optional<std::size_t> trials;
    std::optional<double> x0;
    std::optional<double> epsilon;
};

struct RunResult {
    int exit_code = 0;
    std::string output;  // report text, empty when nothing was produced
    std::string error;   // diagnostic for exit codes 1 and 2
};

/// Exit 0 on success, 2 on a mathematical obstruction (non-conjugate,
/// non-hyperbolic, failed audit), 1 on usage, configuration or numeric errors.
/// Writes the report to output_path atomically when set.
RunResult run(const RunConfig& config);

/// Parses argv with CLI11 and runs; the report goes to `out` when no output
/// file is given, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ifsconj
