#pragma once

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

namespace semalloc {

struct ToleranceConfig {
    double abs_tol = 1e-12;
    double rel_tol = 1e-9;
    int max_iter = 200;

    // Throws DomainError when a field is non-positive.
    void validate() const;
};

namespace numerics {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kSqrt2 = 1.41421356237309504880;
inline constexpr double kInvSqrt2Pi = 0.39894228040143267794;

// Standard normal density.
double normal_pdf(double x);

// Gaussian tail probability Q(x) = P(N(0,1) > x) = erfc(x / sqrt(2)) / 2.
double q_function(double x);

// Inverse of q_function on the open interval (0, 1). Throws DomainError
// outside it.
double q_inverse(double p);

using ScalarFn = std::function<double(double)>;
using VectorFn = std::function<double(std::span<const double>)>;

// Bisection on a sign change. Stops when the bracket is narrower than
// max(abs_tol, rel_tol * |x|) or cannot be split further in double
// precision. Throws BracketError / ConvergenceError.
double bisect_root(const ScalarFn& f, double lo, double hi, const ToleranceConfig& tol = {});

struct MinimizeResult {
    std::vector<double> x;
    double value = 0.0;
    int iterations = 0;
    int evaluations = 0;
    // False when max_iter was exhausted; x is then the best point seen.
    bool converged = false;
};

// Derivative-free Nelder-Mead with dimension-adaptive coefficients and a
// restart at every apparent convergence. Converged when the simplex
// diameter (infinity norm) drops below max(abs_tol, rel_tol * |x_best|)
// and a restart from the best vertex no longer improves the value.
MinimizeResult nelder_mead_minimize(const VectorFn& objective, std::span<const double> init,
                                    const ToleranceConfig& tol = {.abs_tol = 1e-10, .rel_tol = 1e-10, .max_iter = 20000});

// Central-difference gradient.
std::vector<double> finite_difference(const VectorFn& f, std::span<const double> x, double step);

// Scalar convenience overload.
double finite_difference(const ScalarFn& f, double x, double step);

} // namespace numerics
} // namespace semalloc
