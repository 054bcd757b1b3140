#include "semalloc/app/report.hpp"

#include <cmath>
#include <fmt/core.h>
#include <limits>

namespace semalloc::app {

std::string format_number(double v)
{
    if (std::isnan(v)) {
        return "nan";
    }
    if (std::isinf(v)) {
        return v > 0 ? "inf" : "-inf";
    }
    return fmt::format("{:.12g}", v);
}

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows)
{
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    out << kSweepHeader << '\n';
    for (const auto& r : rows) {
        const auto& a = r.allocation;
        const bool ok = a.feasible;
        out << format_number(r.target) << ',' << to_string(r.solver) << ',' << format_number(ok ? a.total_cost : nan)
            << ',' << format_number(ok ? a.q[0] : nan) << ',' << format_number(ok ? a.q[1] : nan) << ','
            << format_number(ok ? a.psi[0] : nan) << ',' << format_number(ok ? a.psi[1] : nan) << ','
            << format_number(ok ? a.achieved_p : nan) << ',' << a.iterations << ',' << (ok ? "true" : "false")
            << '\n';
    }
}

void write_sim_csv(std::ostream& out, const std::vector<StreamReport>& rows)
{
    out << kSimHeader << '\n';
    for (const auto& r : rows) {
        out << r.stream << ',' << format_number(r.q_w) << ',' << format_number(r.snr_db) << ','
            << format_number(r.psi_analytic) << ',' << format_number(r.empirical.psi) << ',' << r.empirical.n_bits
            << ',' << format_number(r.empirical.ci_low) << ',' << format_number(r.empirical.ci_high) << '\n';
    }
}

void print_allocations(std::ostream& out, const std::vector<SweepRow>& rows)
{
    out << fmt::format("{:>8} {:<13} {:>14} {:>12} {:>12} {:>12} {:>12} {:>10} {:>6}\n", "P_bar", "solver",
                       "cost [W*bit]", "q1 [W]", "q2 [W]", "psi1", "psi2", "P", "iters");
    for (const auto& r : rows) {
        const auto& a = r.allocation;
        if (!a.feasible) {
            out << fmt::format("{:>8.4f} {:<13} infeasible: {}\n", r.target, to_string(r.solver), r.error);
            continue;
        }
        out << fmt::format("{:>8.4f} {:<13} {:>14.6e} {:>12.4e} {:>12.4e} {:>12.4e} {:>12.4e} {:>10.6f} {:>6}\n",
                           r.target, to_string(r.solver), a.total_cost, a.q[0], a.q[1], a.psi[0], a.psi[1],
                           a.achieved_p, a.iterations);
    }
}

} // namespace semalloc::app
