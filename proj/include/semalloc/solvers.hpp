#pragma once

#include "semalloc/channel.hpp"
#include "semalloc/modulation.hpp"
#include "semalloc/numerics.hpp"
#include "semalloc/perception.hpp"

#include <array>
#include <optional>
#include <string>
#include <vector>

namespace semalloc {

struct StreamSpec {
    std::string name;
    long bits = 1;
    ModulationScheme modulation;
    ChannelState channel;
    StreamCurve curve;
};

// Weight of stream i in the objective: K_i (bits) or K_i / log2(M_i)
// (symbols).
enum class CostBasis { bits, symbols };

CostBasis parse_cost_basis(const std::string& s);
std::string to_string(CostBasis basis);

// Minimise sum_i w_i q_i subject to P(psi1, psi2) <= target. Every solver
// here returns a point on the equality P = target.
struct ProblemSpec {
    std::array<StreamSpec, 2> streams;
    SurfaceParams surface;
    double target = 0.5;
    ToleranceConfig tol{};
    CostBasis cost_basis = CostBasis::bits;

    void validate() const;
    double weight(std::size_t i) const;
    // Largest BER each stream can reach (zero power).
    std::array<double, 2> ber_upper() const;
};

struct Allocation {
    std::array<double, 2> q{};
    std::array<double, 2> psi{};
    double achieved_p = 0.0;
    double total_cost = 0.0;
    std::string solver;
    int iterations = 0;
    bool feasible = false;
    // False when an iteration cap stopped the solver early.
    bool converged = true;
};

namespace solver_names {
inline constexpr const char* equal_snr = "equal_snr";
inline constexpr const char* proportional = "proportional";
inline constexpr const char* bisection = "bisection";
inline constexpr const char* grid_oracle = "grid_oracle";
} // namespace solver_names

enum class SolverKind { equal_snr, proportional, bisection, grid_oracle };

inline constexpr std::array<SolverKind, 4> kAllSolvers = {SolverKind::equal_snr, SolverKind::proportional,
                                                         SolverKind::bisection, SolverKind::grid_oracle};

std::string to_string(SolverKind kind);
SolverKind parse_solver(const std::string& s);

// Perception values reachable by varying the powers: [P(0,0), P(psi_max)).
struct AchievableRange {
    double lo = 0.0;
    double hi = 0.0;
};
AchievableRange achievable_range(const ProblemSpec& p);

// Objective f(psi1, psi2) = sum_i w_i q_i(psi_i).
double objective(const ProblemSpec& p, double psi1, double psi2);

// Total derivative of the objective along the constraint line at (psi1,
// psi2): df/dpsi1 + (dpsi2/dpsi1) df/dpsi2 with dpsi2/dpsi1 =
// -(dP/dpsi1)/(dP/dpsi2).
double constraint_directional_derivative(const ProblemSpec& p, double psi1, double psi2);

// Fill q, cost and achieved P from a BER pair.
Allocation allocation_from_ber(const ProblemSpec& p, double psi1, double psi2, const std::string& solver,
                               int iterations);

// Semantic-unaware baseline: both streams at the same received SNR.
Allocation solve_equal_snr(const ProblemSpec& p);

// Semantic-aware proportional allocation: each stream keeps the same
// fraction rho of its semantic value, L^_i / L_i = rho, with rho chosen so
// the joint constraint holds with equality; powers from the closed-form
// inverse of the BER model.
Allocation solve_proportional(const ProblemSpec& p);

// Semantic-aware bisection along the constraint line.
Allocation solve_bisection(const ProblemSpec& p);

// Exhaustive search on a geometric psi1 grid of grid_n points (grid_n >= 64)
// spanning the feasible bracket. Grids of size n and 2n - 1 are nested.
Allocation solve_grid_oracle(const ProblemSpec& p, int grid_n = 4096);

Allocation solve(const ProblemSpec& p, SolverKind kind, int grid_n = 4096);

struct SweepRow {
    double target = 0.0;
    SolverKind solver = SolverKind::bisection;
    Allocation allocation;
    std::string error;  // empty when the solve succeeded
};

// Runs each selected solver at each target; rows ordered by target index,
// then solver order. Targets are solved in parallel when threads > 1; the
// output does not depend on the thread count.
std::vector<SweepRow> sweep_targets(const ProblemSpec& tmpl, const std::vector<double>& targets,
                                    const std::vector<SolverKind>& solvers = {kAllSolvers.begin(), kAllSolvers.end()},
                                    int grid_n = 4096, unsigned threads = 0);

} // namespace semalloc
