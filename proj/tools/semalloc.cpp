// Command-line frontend: fit | solve | sweep | simulate.

#include "semalloc/app/commands.hpp"
#include "semalloc/version.hpp"

#include <CLI11.hpp>
#include <iostream>

int main(int argc, char** argv)
{
    using namespace semalloc::app;

    CLI::App app{"Semantic-aware power allocation for two-stream generative semantic links"};
    app.set_version_flag("--version", semalloc::kToolVersion);
    app.require_subcommand(1);
    app.fallthrough();

    std::string config_path;
    std::uint64_t seed = 0;
    std::string out_dir;
    std::string format;
    auto* config_opt = app.add_option("--config", config_path, "Experiment config (JSON) or run manifest");
    auto* seed_opt = app.add_option("--seed", seed, "Override the config seed");
    auto* out_opt = app.add_option("--out", out_dir, "Output directory");
    auto* format_opt =
        app.add_option("--format", format, "Output format")->check(CLI::IsMember({"csv", "csv+svg"}));

    auto* fit = app.add_subcommand("fit", "Fit a perception surface (psi1,psi2,P) or curve (psi,P) to samples");
    std::string samples_path;
    std::string fit_out;
    fit->add_option("samples", samples_path, "Sample CSV")->required();
    fit->add_option("-o,--output", fit_out, "Parameter document to write (default <out>/fit.json)");

    auto* solve = app.add_subcommand("solve", "Solve a single perception target");
    auto* sweep = app.add_subcommand("sweep", "Sweep perception targets and plot total power");
    auto* simulate = app.add_subcommand("simulate", "Monte Carlo link validation");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitInputError;
    }

    Overrides overrides;
    if (*seed_opt) {
        overrides.seed = seed;
    }
    if (*out_opt) {
        overrides.out_dir = out_dir;
    }
    if (*format_opt) {
        overrides.format = parse_format(format);
    }
    Streams io{std::cout, std::cerr};

    if (fit->parsed()) {
        std::filesystem::path target = fit_out;
        if (fit_out.empty()) {
            target = std::filesystem::path(out_dir.empty() ? "out" : out_dir) / "fit.json";
        }
        return cmd_fit(samples_path, target, io);
    }
    if (!*config_opt) {
        std::cerr << "error: --config is required for this command\n";
        return kExitInputError;
    }
    if (solve->parsed()) {
        return cmd_solve(config_path, overrides, io);
    }
    if (sweep->parsed()) {
        return cmd_sweep(config_path, overrides, io);
    }
    if (simulate->parsed()) {
        return cmd_simulate(config_path, overrides, io);
    }
    return kExitInputError;
}
