#pragma once

#include "semalloc/simulator.hpp"
#include "semalloc/solvers.hpp"

#include <ostream>
#include <string>
#include <vector>

namespace semalloc::app {

inline constexpr const char* kSweepHeader =
    "p_bar,solver,total_cost_w,q1_w,q2_w,psi1,psi2,achieved_p,iterations,feasible";
inline constexpr const char* kSimHeader = "stream,q_w,snr_db,psi_analytic,psi_empirical,n_bits,ci_low,ci_high";

// Shortest round-trippable decimal is not needed here; 12 significant
// digits keep files readable and stable.
std::string format_number(double v);

void write_sweep_csv(std::ostream& out, const std::vector<SweepRow>& rows);
void write_sim_csv(std::ostream& out, const std::vector<StreamReport>& rows);

// Human-readable allocation table.
void print_allocations(std::ostream& out, const std::vector<SweepRow>& rows);

} // namespace semalloc::app
