#pragma once

#include "semalloc/channel.hpp"
#include "semalloc/modulation.hpp"
#include "semalloc/perception.hpp"
#include "semalloc/solvers.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <json.hpp>
#include <optional>
#include <string>
#include <vector>

namespace semalloc::app {

// Experiment description, loaded from a JSON document. Relative paths are
// resolved against the document's directory. A run manifest is accepted in
// place of a config; its embedded `config` object is used.
struct StreamConfig {
    std::string name;
    long bits = 1;
    ModulationScheme modulation;
    StreamCurve curve;
};

struct SimulationConfig {
    bool present = false;
    std::uint64_t n_bits = 1000000;
    std::vector<double> snr_db;  // empty: simulate the solved allocation
    SolverKind solver = SolverKind::bisection;
};

enum class OutputFormat { csv, csv_svg };

OutputFormat parse_format(const std::string& s);
std::string to_string(OutputFormat f);

struct InputDigest {
    std::string path;
    std::string sha256;
};

struct ExperimentConfig {
    std::uint64_t seed = 1;
    ChannelParams channel;
    FadingMode fading = FadingMode::deterministic;
    std::uint64_t channel_seed = 1;
    bool independent_fading = false;
    std::array<StreamConfig, 2> streams;
    SurfaceParams surface;
    std::vector<double> targets;
    std::vector<SolverKind> solvers{kAllSolvers.begin(), kAllSolvers.end()};
    std::vector<std::string> sweep_modulations;  // empty: use the stream modulations as given
    int grid_n = 4096;
    CostBasis cost_basis = CostBasis::bits;
    ToleranceConfig tol;
    SimulationConfig simulation;
    std::filesystem::path out_dir = "out";
    OutputFormat format = OutputFormat::csv_svg;
    std::vector<InputDigest> inputs;

    // Fully resolved echo; itself a valid config document.
    nlohmann::json resolved() const;

    // Problem for the configured target(s) with channel realisations drawn.
    ProblemSpec problem(double target) const;
};

// Command-line overrides, applied after the document is read.
struct Overrides {
    std::optional<std::uint64_t> seed;
    std::optional<std::filesystem::path> out_dir;
    std::optional<OutputFormat> format;
};

// Throws ParseError (malformed document) or DomainError (invalid values).
ExperimentConfig load_config(const std::filesystem::path& path, const Overrides& overrides = {});
ExperimentConfig parse_config(const nlohmann::json& doc, const std::filesystem::path& base_dir,
                              const Overrides& overrides = {});

// Lower-case hex SHA-256 of a file's bytes.
std::string sha256_file(const std::filesystem::path& path);
std::string sha256_bytes(const std::string& bytes);

} // namespace semalloc::app
