#pragma once

#include "semalloc/numerics.hpp"

#include <array>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace semalloc {

// Perception-error surface
//
//   P(psi1, psi2) = pmax - (pmax - p0) * exp(-(psi1/tau1)^beta1 - (psi2/tau2)^beta2)
//
// P is a distortion-like score (lower is better). The family is
// non-decreasing in each BER by construction, equals p0 at zero BER and
// saturates towards pmax.
struct SurfaceParams {
    double p0 = 0.30;
    double pmax = 0.95;
    double tau1 = 5e-3;
    double tau2 = 1e-3;
    double beta1 = 1.0;
    double beta2 = 1.0;

    void validate() const;
};

// Single-stream perception curve P_i(psi), same family restricted to one
// coordinate. p0 is the perception value of an image synthesised from the
// error-free stream alone.
struct StreamCurve {
    double p0 = 0.5;
    double pmax = 0.95;
    double tau = 1e-3;
    double beta = 1.0;
    // Semantic value L = 1 - p0 as given, when it is known as a decimal. Not
    // every such L is 1 - p0 for a double p0 (0.3596 is not), so it is kept
    // alongside p0 and used wherever L itself is reported.
    std::optional<double> semantic_value;

    void validate() const;
};

inline constexpr const char* kSurfaceFamily = "exp_power_sum";
inline constexpr const char* kCurveFamily = "exp_power";

// BER domain upper limit (random guessing on binary symbols).
inline constexpr double kMaxBerDomain = 0.5;

struct SurfaceSample {
    double psi1 = 0.0;
    double psi2 = 0.0;
    double p = 0.0;
};

struct CurveSample {
    double psi = 0.0;
    double p = 0.0;
};

using SampleSet = std::vector<SurfaceSample>;
using CurveSampleSet = std::vector<CurveSample>;

namespace perception {

// Bundled defaults. The single-stream curves carry the semantic values
// L_prompt = 0.5887 and L_edge = 0.3596; everything else is a configuration
// default.
SurfaceParams default_surface();
StreamCurve default_prompt_curve();
StreamCurve default_edge_curve();

} // namespace perception

double eval_surface(const SurfaceParams& s, double psi1, double psi2);

// (dP/dpsi1, dP/dpsi2). SingularityError at psi_i = 0 when beta_i < 1.
std::pair<double, double> surface_partials(const SurfaceParams& s, double psi1, double psi2);

double eval_curve(const StreamCurve& c, double psi);

// BER at which the curve reaches `p`. DomainError unless p0 <= p < pmax.
double invert_curve(const StreamCurve& c, double p);

// L_i = 1 - P_i(0), or the stored semantic_value.
double semantic_value_transmitted(const StreamCurve& c);
// L^_i(psi) = 1 - P_i(psi), equal to L_i at psi = 0.
double semantic_value_received(const StreamCurve& c, double psi);

template <typename Params>
struct FitResult {
    Params params;
    double rmse = 0.0;
    std::size_t samples = 0;
    int iterations = 0;
    bool converged = false;
};

// Least-squares fit. p0 and pmax are mapped through logistic transforms
// (0 < p0 < pmax < 1), tau and beta through logs. Throws DomainError when
// there are fewer rows than parameters or a row is out of domain.
FitResult<SurfaceParams> fit_surface(const SampleSet& data, const SurfaceParams& init,
                                     const ToleranceConfig& tol = {.abs_tol = 1e-11, .rel_tol = 1e-11, .max_iter = 40000});
FitResult<StreamCurve> fit_curve(const CurveSampleSet& data, const StreamCurve& init,
                                 const ToleranceConfig& tol = {.abs_tol = 1e-11, .rel_tol = 1e-11, .max_iter = 40000});

// Multi-start wrappers that derive initial points from the data.
FitResult<SurfaceParams> fit_surface_auto(const SampleSet& data);
FitResult<StreamCurve> fit_curve_auto(const CurveSampleSet& data);

// Tolerance used for root solves on the constraint; shrinks the bracket to
// double resolution.
inline constexpr ToleranceConfig kConstraintTol{.abs_tol = 1e-300, .rel_tol = 1e-15, .max_iter = 2000};

// psi2 such that P(psi1, psi2) = target, psi2 in [0, psi2_max].
// InfeasibleError when target lies outside [P(psi1, 0), P(psi1, psi2_max)].
double solve_psi2_on_constraint(const SurfaceParams& s, double psi1, double target,
                                double psi2_max = kMaxBerDomain);

struct ConstraintPoint {
    double psi1 = 0.0;
    double psi2 = 0.0;
};

struct ConstraintLine {
    ConstraintPoint left;   // smallest feasible psi1
    ConstraintPoint right;  // largest feasible psi1
};

// Ends of the level set P = target inside [0, upper[0]] x [0, upper[1]].
// InfeasibleError unless p0 < target < P(upper[0], upper[1]).
ConstraintLine constraint_line_endpoints(const SurfaceParams& s, double target,
                                         std::array<double, 2> upper = {kMaxBerDomain, kMaxBerDomain});

} // namespace semalloc
