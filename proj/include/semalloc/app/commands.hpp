#pragma once

#include "semalloc/app/config.hpp"

#include <filesystem>
#include <ostream>

namespace semalloc::app {

enum ExitCode : int {
    kExitOk = 0,
    kExitInputError = 2,
    kExitNumericalWarning = 3,
    kExitInfeasible = 4,
};

struct Streams {
    std::ostream& out;
    std::ostream& err;
};

// Fit a surface (`psi1,psi2,P`) or single-stream curve (`psi,P`) sample file
// and write the parameter document to out_path.
int cmd_fit(const std::filesystem::path& samples_path, const std::filesystem::path& out_path, Streams io);

// Solve one target with every selected solver; writes solve.csv.
int cmd_solve(const std::filesystem::path& config_path, const Overrides& overrides, Streams io);

// Target sweep; writes sweep CSV(s) and, for csv+svg, sweep.svg.
int cmd_sweep(const std::filesystem::path& config_path, const Overrides& overrides, Streams io);

// Monte Carlo validation; writes simulate.csv.
int cmd_simulate(const std::filesystem::path& config_path, const Overrides& overrides, Streams io);

} // namespace semalloc::app
