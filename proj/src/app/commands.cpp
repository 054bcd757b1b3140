#include "semalloc/app/commands.hpp"

#include "semalloc/app/report.hpp"
#include "semalloc/app/svg.hpp"
#include "semalloc/errors.hpp"
#include "semalloc/perception_io.hpp"
#include "semalloc/simulator.hpp"
#include "semalloc/version.hpp"

#include <chrono>
#include <cmath>
#include <ctime>
#include <fmt/core.h>
#include <fstream>
#include <map>
#include <sstream>

namespace semalloc::app {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Relative disagreement between bisection and grid oracle that triggers a
// warning (possible multimodality along the constraint line).
constexpr double kOracleWarnRel = 5e-3;

std::string utc_now()
{
    const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
    std::tm tm{};
    gmtime_r(&now, &tm);
    char buf[32];
    std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
    return buf;
}

void write_file(const fs::path& path, const std::string& content)
{
    if (path.has_parent_path()) {
        fs::create_directories(path.parent_path());
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) {
        throw ParseError(fmt::format("cannot write '{}'", path.string()));
    }
    out << content;
}

class Run {
public:
    Run(std::string command, const ExperimentConfig& cfg) : command_(std::move(command)), cfg_(cfg), started_(utc_now())
    {
    }

    void output(const fs::path& path, const std::string& content)
    {
        write_file(path, content);
        outputs_.push_back({path.string(), sha256_bytes(content)});
    }

    void finish(int exit_code) const
    {
        json inputs = json::array();
        for (const auto& d : cfg_.inputs) {
            inputs.push_back({{"path", d.path}, {"sha256", d.sha256}});
        }
        json outputs = json::array();
        for (const auto& d : outputs_) {
            outputs.push_back({{"path", d.path}, {"sha256", d.sha256}});
        }
        const json manifest = {{"tool", kToolName},       {"version", kToolVersion}, {"command", command_},
                               {"seed", cfg_.seed},       {"started_utc", started_}, {"finished_utc", utc_now()},
                               {"exit_code", exit_code},  {"inputs", inputs},        {"outputs", outputs},
                               {"config", cfg_.resolved()}};
        write_file(cfg_.out_dir / "manifest.json", manifest.dump(2) + "\n");
    }

private:
    std::string command_;
    const ExperimentConfig& cfg_;
    std::string started_;
    std::vector<InputDigest> outputs_;
};

// Loads the config, mapping every input problem to exit code 2.
std::optional<ExperimentConfig> load(const fs::path& path, const Overrides& overrides, std::ostream& err)
{
    try {
        return load_config(path, overrides);
    } catch (const Error& e) {
        err << "error: " << e.what() << '\n';
    } catch (const json::exception& e) {
        err << "error: " << path.string() << ": " << e.what() << '\n';
    }
    return std::nullopt;
}

std::string to_csv(const std::vector<SweepRow>& rows)
{
    std::ostringstream ss;
    write_sweep_csv(ss, rows);
    return ss.str();
}

bool any_feasible(const std::vector<SweepRow>& rows)
{
    for (const auto& r : rows) {
        if (r.allocation.feasible) {
            return true;
        }
    }
    return false;
}

// Warnings for non-converged solves and bisection/oracle disagreement.
int warn(const std::vector<SweepRow>& rows, std::ostream& err, const std::string& label)
{
    int warnings = 0;
    std::map<double, std::pair<double, double>> pairs;  // target -> (bisection, oracle)
    for (const auto& r : rows) {
        if (!r.allocation.feasible) {
            continue;
        }
        if (!r.allocation.converged) {
            err << fmt::format("warning: {}{} at P={} hit its iteration cap\n", label, to_string(r.solver), r.target);
            ++warnings;
        }
        if (r.solver == SolverKind::bisection) {
            pairs[r.target].first = r.allocation.total_cost;
        } else if (r.solver == SolverKind::grid_oracle) {
            pairs[r.target].second = r.allocation.total_cost;
        }
    }
    for (const auto& [target, costs] : pairs) {
        const auto [bis, grid] = costs;
        if (bis > 0.0 && grid > 0.0 && std::abs(bis - grid) > kOracleWarnRel * grid) {
            err << fmt::format("warning: {}bisection cost {:.6e} and grid oracle {:.6e} disagree at P={}; the "
                               "objective may be multimodal along the constraint\n",
                               label, bis, grid, target);
            ++warnings;
        }
    }
    return warnings;
}

std::string solver_color(SolverKind k)
{
    switch (k) {
    case SolverKind::equal_snr:
        return "#d62728";
    case SolverKind::proportional:
        return "#1f77b4";
    case SolverKind::bisection:
        return "#2ca02c";
    case SolverKind::grid_oracle:
        return "#7f7f7f";
    }
    return "#000000";
}

std::string cost_basis_label(CostBasis basis)
{
    return basis == CostBasis::bits ? "sum of K_i q_i [W]" : "sum of K_i q_i / log2(M_i) [W]";
}

constexpr const char* kDashes[] = {"", "7 4", "2 3", "10 3 2 3"};

} // namespace

int cmd_fit(const fs::path& samples_path, const fs::path& out_path, Streams io)
{
    io::AnySampleSet samples;
    try {
        samples = io::read_samples(samples_path.string());
    } catch (const Error& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    json doc;
    bool converged = false;
    double rmse = 0.0;
    std::size_t rows = 0;
    try {
        if (const auto* surface = std::get_if<SampleSet>(&samples)) {
            const auto fit = fit_surface_auto(*surface);
            doc = io::to_json(fit);
            converged = fit.converged;
            rmse = fit.rmse;
            rows = fit.samples;
        } else {
            const auto fit = fit_curve_auto(std::get<CurveSampleSet>(samples));
            doc = io::to_json(fit);
            converged = fit.converged;
            rmse = fit.rmse;
            rows = fit.samples;
        }
    } catch (const DomainError& e) {
        io.err << "error: " << samples_path.string() << ": " << e.what() << '\n';
        return kExitInputError;
    }
    try {
        write_file(out_path, doc.dump(2) + "\n");
    } catch (const Error& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
    io.out << fmt::format("fit: {} rows, rmse {:.3e}, family {} -> {}\n", rows, rmse, doc.at("family").get<std::string>(),
                          out_path.string());
    if (!converged) {
        io.err << "warning: fit did not converge; best parameters written and flagged\n";
        return kExitNumericalWarning;
    }
    return kExitOk;
}

int cmd_solve(const fs::path& config_path, const Overrides& overrides, Streams io)
{
    const auto cfg = load(config_path, overrides, io.err);
    if (!cfg) {
        return kExitInputError;
    }
    if (cfg->targets.size() != 1) {
        io.err << fmt::format("error: solve needs exactly one target, config has {}\n", cfg->targets.size());
        return kExitInputError;
    }
    const double target = cfg->targets.front();
    try {
        const auto problem = cfg->problem(target);
        const auto range = achievable_range(problem);
        if (!(target > range.lo) || !(target < range.hi)) {
            io.err << fmt::format("error: target P={} is infeasible; achievable range is ({:.6g}, {:.6g})\n", target,
                                  range.lo, range.hi);
            return kExitInfeasible;
        }
        Run run("solve", *cfg);
        const auto rows = sweep_targets(problem, {target}, cfg->solvers, cfg->grid_n, 1);
        print_allocations(io.out, rows);
        run.output(cfg->out_dir / "solve.csv", to_csv(rows));

        int code = kExitOk;
        for (const auto& r : rows) {
            if (!r.allocation.feasible) {
                io.err << fmt::format("error: {} infeasible: {}\n", to_string(r.solver), r.error);
                code = kExitInfeasible;
            }
        }
        if (code == kExitOk && warn(rows, io.err, "") > 0) {
            code = kExitNumericalWarning;
        }
        run.finish(code);
        return code;
    } catch (const Error& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
}

int cmd_sweep(const fs::path& config_path, const Overrides& overrides, Streams io)
{
    const auto cfg = load(config_path, overrides, io.err);
    if (!cfg) {
        return kExitInputError;
    }
    if (cfg->targets.empty()) {
        io.err << "error: sweep needs a non-empty target list\n";
        return kExitInputError;
    }
    try {
        Run run("sweep", *cfg);
        std::vector<std::string> mods = cfg->sweep_modulations;
        const bool multi = !mods.empty();
        if (!multi) {
            mods.push_back(cfg->streams[0].modulation.name);
        }

        LineChart chart;
        chart.title = "Total power versus perception requirement";
        chart.x_label = "perception requirement P_bar";
        chart.y_label = cost_basis_label(cfg->cost_basis);
        bool solved = false;
        for (std::size_t m = 0; m < mods.size(); ++m) {
            ExperimentConfig variant = *cfg;
            if (multi) {
                for (auto& s : variant.streams) {
                    s.modulation = modulation::preset(mods[m]);
                }
            }
            const auto problem = variant.problem(cfg->targets.front());
            const auto rows = sweep_targets(problem, cfg->targets, cfg->solvers, cfg->grid_n);
            solved = solved || any_feasible(rows);
            warn(rows, io.err, multi ? mods[m] + ": " : "");

            const auto csv_name = multi ? fmt::format("sweep_{}.csv", mods[m]) : std::string("sweep.csv");
            run.output(cfg->out_dir / csv_name, to_csv(rows));
            io.out << fmt::format("sweep: {} targets x {} solvers -> {}\n", cfg->targets.size(), cfg->solvers.size(),
                                  (cfg->out_dir / csv_name).string());

            for (auto kind : cfg->solvers) {
                Series s;
                s.name = multi ? fmt::format("{} ({})", to_string(kind), mods[m]) : to_string(kind);
                s.color = solver_color(kind);
                s.dash = kDashes[m % std::size(kDashes)];
                for (const auto& r : rows) {
                    if (r.solver == kind && r.allocation.feasible) {
                        s.points.emplace_back(r.target, r.allocation.total_cost);
                    }
                }
                chart.series.push_back(std::move(s));
            }
        }
        if (cfg->format == OutputFormat::csv_svg) {
            run.output(cfg->out_dir / "sweep.svg", render_svg(chart));
        }
        const int code = solved ? kExitOk : kExitInfeasible;
        if (!solved) {
            io.err << "error: no target was feasible\n";
        }
        run.finish(code);
        return code;
    } catch (const Error& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
}

int cmd_simulate(const fs::path& config_path, const Overrides& overrides, Streams io)
{
    const auto cfg = load(config_path, overrides, io.err);
    if (!cfg) {
        return kExitInputError;
    }
    if (!cfg->simulation.present) {
        io.err << "error: config has no 'simulation' section\n";
        return kExitInputError;
    }
    SimConfig sim{cfg->simulation.n_bits, RandomSeed{cfg->seed}};
    try {
        sim.validate();
    } catch (const DomainError& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitInputError;
    }

    try {
        Run run("simulate", *cfg);
        std::vector<StreamReport> rows;
        if (!cfg->simulation.snr_db.empty()) {
            const auto problem = cfg->problem(cfg->targets.empty() ? 0.5 : cfg->targets.front());
            for (std::size_t i = 0; i < 2; ++i) {
                const auto& st = problem.streams[i];
                for (std::size_t k = 0; k < cfg->simulation.snr_db.size(); ++k) {
                    const double snr_db = cfg->simulation.snr_db[k];
                    const double gamma = db_to_linear(snr_db);
                    SimConfig point = sim;
                    point.seed = derive_seed(derive_seed(sim.seed, i), k);
                    StreamReport r;
                    r.stream = st.name;
                    r.q_w = gamma * st.channel.noise_w / st.channel.gain;
                    r.snr_db = snr_db;
                    r.psi_analytic = ber_from_snr(st.modulation, gamma);
                    r.empirical = simulate_ber(st.modulation, st.channel, r.q_w, point);
                    rows.push_back(r);
                }
            }
        } else {
            if (cfg->targets.size() != 1) {
                io.err << "error: allocation check needs exactly one target (or give simulation.snr_db)\n";
                return kExitInputError;
            }
            const auto problem = cfg->problem(cfg->targets.front());
            Allocation alloc;
            try {
                alloc = solve(problem, cfg->simulation.solver, cfg->grid_n);
            } catch (const InfeasibleError& e) {
                io.err << "error: " << e.what() << '\n';
                return kExitInfeasible;
            }
            const auto report = end_to_end_check(problem, alloc, sim);
            rows.assign(report.streams.begin(), report.streams.end());
            io.out << fmt::format("allocation ({}): P_target={} P_analytic={:.8f} P_empirical={:.8f} gap={:.3e}\n",
                                  alloc.solver, problem.target, report.p_analytic, report.p_empirical, report.gap);
        }
        std::ostringstream csv;
        write_sim_csv(csv, rows);
        run.output(cfg->out_dir / "simulate.csv", csv.str());

        int violations = 0;
        for (const auto& r : rows) {
            violations += r.ci_violation() ? 1 : 0;
        }
        io.out << fmt::format("simulate: {} rows, {} bits each, {} CI violations (3-sigma Wilson)\n", rows.size(),
                              sim.n_bits, violations);
        run.finish(kExitOk);
        return kExitOk;
    } catch (const Error& e) {
        io.err << "error: " << e.what() << '\n';
        return kExitInputError;
    }
}

} // namespace semalloc::app
