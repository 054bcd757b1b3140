#include "semalloc/solvers.hpp"

#include "semalloc/errors.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <thread>

namespace semalloc {

CostBasis parse_cost_basis(const std::string& s)
{
    if (s == "bits") {
        return CostBasis::bits;
    }
    if (s == "symbols") {
        return CostBasis::symbols;
    }
    throw ParseError(fmt::format("unknown cost basis '{}' (expected bits|symbols)", s));
}

std::string to_string(CostBasis basis)
{
    return basis == CostBasis::bits ? "bits" : "symbols";
}

std::string to_string(SolverKind kind)
{
    switch (kind) {
    case SolverKind::equal_snr:
        return solver_names::equal_snr;
    case SolverKind::proportional:
        return solver_names::proportional;
    case SolverKind::bisection:
        return solver_names::bisection;
    case SolverKind::grid_oracle:
        return solver_names::grid_oracle;
    }
    return "unknown";
}

SolverKind parse_solver(const std::string& s)
{
    for (auto kind : kAllSolvers) {
        if (to_string(kind) == s) {
            return kind;
        }
    }
    throw ParseError(fmt::format("unknown solver '{}' (expected equal_snr|proportional|bisection|grid_oracle)", s));
}

void ProblemSpec::validate() const
{
    for (const auto& st : streams) {
        if (st.bits < 1) {
            throw DomainError(fmt::format("stream '{}': bit count {} must be >= 1", st.name, st.bits));
        }
        st.modulation.validate();
        st.channel.validate();
        st.curve.validate();
    }
    surface.validate();
    tol.validate();
    if (!(target > 0.0) || !(target < 1.0)) {
        throw DomainError(fmt::format("target P={} must lie in (0, 1)", target));
    }
}

double ProblemSpec::weight(std::size_t i) const
{
    const auto& st = streams.at(i);
    const auto k = static_cast<double>(st.bits);
    return cost_basis == CostBasis::bits ? k : k / st.modulation.bits_per_symbol();
}

std::array<double, 2> ProblemSpec::ber_upper() const
{
    return {std::min(max_ber(streams[0].modulation), kMaxBerDomain),
            std::min(max_ber(streams[1].modulation), kMaxBerDomain)};
}

AchievableRange achievable_range(const ProblemSpec& p)
{
    const auto up = p.ber_upper();
    return {eval_surface(p.surface, 0.0, 0.0), eval_surface(p.surface, up[0], up[1])};
}

namespace {

void require_feasible_target(const ProblemSpec& p)
{
    p.validate();
    const auto range = achievable_range(p);
    if (!(p.target > range.lo) || !(p.target < range.hi)) {
        throw InfeasibleError(fmt::format("target P={} outside the achievable range ({}, {})", p.target, range.lo,
                                          range.hi));
    }
}

} // namespace

double objective(const ProblemSpec& p, double psi1, double psi2)
{
    const double psi[2] = {psi1, psi2};
    double total = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        total += p.weight(i) * power_from_ber(p.streams[i].modulation, p.streams[i].channel, psi[i]);
    }
    return total;
}

double constraint_directional_derivative(const ProblemSpec& p, double psi1, double psi2)
{
    const double df1 =
        p.weight(0) * power_from_ber_derivative(p.streams[0].modulation, p.streams[0].channel, psi1);
    const double df2 =
        p.weight(1) * power_from_ber_derivative(p.streams[1].modulation, p.streams[1].channel, psi2);
    const auto [dp1, dp2] = surface_partials(p.surface, psi1, psi2);
    if (dp2 == 0.0) {
        // psi2 is saturated: the slope is unbounded and only its sign matters.
        return df2 < 0.0 ? std::numeric_limits<double>::infinity() : df1;
    }
    const double slope = -dp1 / dp2;
    return df1 + slope * df2;
}

Allocation allocation_from_ber(const ProblemSpec& p, double psi1, double psi2, const std::string& solver,
                               int iterations)
{
    Allocation a;
    a.psi = {psi1, psi2};
    a.total_cost = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        a.q[i] = power_from_ber(p.streams[i].modulation, p.streams[i].channel, a.psi[i]);
        a.total_cost += p.weight(i) * a.q[i];
    }
    a.achieved_p = eval_surface(p.surface, psi1, psi2);
    a.solver = solver;
    a.iterations = iterations;
    a.feasible = true;
    return a;
}

Allocation solve_equal_snr(const ProblemSpec& p)
{
    require_feasible_target(p);
    const auto& s1 = p.streams[0];
    const auto& s2 = p.streams[1];
    auto perception_at = [&](double root_snr) {
        const double g = root_snr * root_snr;
        return eval_surface(p.surface, ber_from_snr(s1.modulation, g), ber_from_snr(s2.modulation, g));
    };
    // Bisection runs on sqrt(SNR); P decreases along it.
    double hi = 1.0;
    while (perception_at(hi) >= p.target) {
        hi *= 2.0;
        if (hi > 1e6) {
            throw InfeasibleError(fmt::format("equal-SNR: target P={} not reached at any SNR", p.target));
        }
    }
    int evals = 0;
    const double root = numerics::bisect_root(
        [&](double x) {
            ++evals;
            return perception_at(x) - p.target;
        },
        0.0, hi, kConstraintTol);
    const double gamma = root * root;

    Allocation a;
    a.solver = solver_names::equal_snr;
    a.iterations = evals;
    a.feasible = true;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& st = p.streams[i];
        a.q[i] = gamma * st.channel.noise_w / st.channel.gain;
        a.psi[i] = ber_from_snr(st.modulation, snr(a.q[i], st.channel));
        a.total_cost += p.weight(i) * a.q[i];
    }
    a.achieved_p = eval_surface(p.surface, a.psi[0], a.psi[1]);
    return a;
}

Allocation solve_proportional(const ProblemSpec& p)
{
    require_feasible_target(p);
    const auto upper = p.ber_upper();
    std::array<double, 2> value{};
    double rho_min = 0.0;
    for (std::size_t i = 0; i < 2; ++i) {
        const auto& c = p.streams[i].curve;
        value[i] = semantic_value_transmitted(c);
        // Below this ratio stream i would need a BER above its ceiling.
        rho_min = std::max(rho_min, semantic_value_received(c, upper[i]) / value[i]);
    }
    if (!(rho_min < 1.0)) {
        throw DomainError("proportional: no semantic-value ratio keeps both BERs reachable");
    }
    auto bers = [&](double rho) {
        std::array<double, 2> psi{};
        for (std::size_t i = 0; i < 2; ++i) {
            const auto& c = p.streams[i].curve;
            const double level = std::max(1.0 - rho * value[i], c.p0);
            psi[i] = level >= c.pmax ? upper[i] : std::min(invert_curve(c, level), upper[i]);
        }
        return psi;
    };
    auto excess = [&](double rho) {
        const auto psi = bers(rho);
        return eval_surface(p.surface, psi[0], psi[1]) - p.target;
    };
    if (excess(rho_min) < 0.0) {
        throw DomainError(fmt::format("proportional: target P={} needs a BER beyond a stream's reachable range",
                                      p.target));
    }
    int evals = 0;
    const double rho = numerics::bisect_root(
        [&](double r) {
            ++evals;
            return excess(r);
        },
        rho_min, 1.0, kConstraintTol);
    const auto psi = bers(rho);
    return allocation_from_ber(p, psi[0], psi[1], solver_names::proportional, evals);
}

Allocation solve_bisection(const ProblemSpec& p)
{
    require_feasible_target(p);
    const auto upper = p.ber_upper();
    const auto line = constraint_line_endpoints(p.surface, p.target, upper);
    double left = line.left.psi1;
    double right = line.right.psi1;
    const double eps = p.tol.abs_tol;

    int iterations = 0;
    bool converged = true;
    while (right - left >= eps) {
        if (iterations >= p.tol.max_iter) {
            converged = false;
            break;
        }
        const double psi1 = 0.5 * (left + right);
        if (psi1 <= left || psi1 >= right) {
            break;  // bracket at double resolution
        }
        ++iterations;
        const double psi2 = solve_psi2_on_constraint(p.surface, psi1, p.target, upper[1]);
        if (constraint_directional_derivative(p, psi1, psi2) >= 0.0) {
            right = psi1;
        } else {
            left = psi1;
        }
    }
    const double psi1 = 0.5 * (left + right);
    const double psi2 = solve_psi2_on_constraint(p.surface, psi1, p.target, upper[1]);
    auto a = allocation_from_ber(p, psi1, psi2, solver_names::bisection, iterations);
    a.converged = converged;
    return a;
}

Allocation solve_grid_oracle(const ProblemSpec& p, int grid_n)
{
    if (grid_n < 64) {
        throw DomainError(fmt::format("grid oracle needs grid_n >= 64, got {}", grid_n));
    }
    require_feasible_target(p);
    const auto upper = p.ber_upper();
    const auto line = constraint_line_endpoints(p.surface, p.target, upper);
    const double hi = line.right.psi1;
    // psi1 = 0 would cost the clamped maximum on stream 1; start the
    // geometric grid twelve decades below the right end instead.
    const double lo = std::max({line.left.psi1, hi * 1e-12, modulation::kMinBer});
    const double log_ratio = std::log(hi / lo);

    double best_cost = std::numeric_limits<double>::infinity();
    double best_psi1 = lo;
    double best_psi2 = 0.0;
    for (int j = 0; j < grid_n; ++j) {
        const double psi1 = j == grid_n - 1 ? hi : lo * std::exp(log_ratio * j / (grid_n - 1));
        const double psi2 = solve_psi2_on_constraint(p.surface, psi1, p.target, upper[1]);
        const double cost = objective(p, psi1, psi2);
        if (cost < best_cost) {
            best_cost = cost;
            best_psi1 = psi1;
            best_psi2 = psi2;
        }
    }
    return allocation_from_ber(p, best_psi1, best_psi2, solver_names::grid_oracle, grid_n);
}

Allocation solve(const ProblemSpec& p, SolverKind kind, int grid_n)
{
    switch (kind) {
    case SolverKind::equal_snr:
        return solve_equal_snr(p);
    case SolverKind::proportional:
        return solve_proportional(p);
    case SolverKind::bisection:
        return solve_bisection(p);
    case SolverKind::grid_oracle:
        return solve_grid_oracle(p, grid_n);
    }
    throw DomainError("unknown solver kind");
}

std::vector<SweepRow> sweep_targets(const ProblemSpec& tmpl, const std::vector<double>& targets,
                                    const std::vector<SolverKind>& solvers, int grid_n, unsigned threads)
{
    const std::size_t per_target = solvers.size();
    std::vector<SweepRow> rows(targets.size() * per_target);

    auto run_target = [&](std::size_t t) {
        ProblemSpec p = tmpl;
        p.target = targets[t];
        for (std::size_t k = 0; k < per_target; ++k) {
            SweepRow& row = rows[t * per_target + k];
            row.target = targets[t];
            row.solver = solvers[k];
            try {
                row.allocation = solve(p, solvers[k], grid_n);
            } catch (const Error& e) {
                row.allocation = Allocation{};
                row.allocation.solver = to_string(solvers[k]);
                row.allocation.feasible = false;
                row.error = e.what();
            }
        }
    };

    if (threads == 0) {
        threads = std::max(1U, std::thread::hardware_concurrency());
    }
    threads = static_cast<unsigned>(std::min<std::size_t>(threads, targets.size()));
    if (threads <= 1) {
        for (std::size_t t = 0; t < targets.size(); ++t) {
            run_target(t);
        }
        return rows;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::jthread> pool;
    for (unsigned w = 0; w < threads; ++w) {
        pool.emplace_back([&] {
            for (std::size_t t = next++; t < targets.size(); t = next++) {
                run_target(t);
            }
        });
    }
    pool.clear();
    return rows;
}

} // namespace semalloc
