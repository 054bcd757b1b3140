#include "semalloc/numerics.hpp"

#include "semalloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <numeric>

namespace semalloc {

void ToleranceConfig::validate() const
{
    if (!(abs_tol > 0.0) || !(rel_tol > 0.0) || max_iter < 1) {
        throw DomainError(fmt::format("invalid tolerance: abs_tol={} rel_tol={} max_iter={}", abs_tol, rel_tol, max_iter));
    }
}

namespace numerics {

double normal_pdf(double x)
{
    return kInvSqrt2Pi * std::exp(-0.5 * x * x);
}

double q_function(double x)
{
    // std::erfc keeps full relative accuracy deep into the upper tail, which
    // the BER inversions rely on.
    return 0.5 * std::erfc(x / kSqrt2);
}

namespace {

// Acklam's rational approximation to the lower-tail normal quantile,
// relative error below 1.2e-9. Only used as the Newton seed.
double acklam_lower_quantile(double p)
{
    static constexpr double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                                   1.383577518672690e+02,  -3.066479806614716e+01, 2.506628277459239e+00};
    static constexpr double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                                   6.680131188771972e+01,  -1.328068155288572e+01};
    static constexpr double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                                   -2.549732539343734e+00, 4.374664141464968e+00,  2.938163982698783e+00};
    static constexpr double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                                   3.754408661907416e+00};
    constexpr double p_low = 0.02425;

    if (p < p_low) {
        const double q = std::sqrt(-2.0 * std::log(p));
        return (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
               ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1.0);
    }
    const double q = p - 0.5;
    const double r = q * q;
    return (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
           (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1.0);
}

// Q^{-1}(p) for 0 < p <= 0.5, result >= 0.
double upper_tail_inverse(double p)
{
    if (p == 0.5) {
        return 0.0;
    }
    double x = -acklam_lower_quantile(p);
    bool ok = std::isfinite(x);
    for (int i = 0; ok && i < 8; ++i) {
        const double pdf = normal_pdf(x);
        if (!(pdf > 0.0)) {
            ok = false;
            break;
        }
        // Halley step on Q(x) - p.
        const double u = (q_function(x) - p) / pdf;
        const double step = u / (1.0 - 0.5 * x * u);
        if (!std::isfinite(step)) {
            ok = false;
            break;
        }
        x += step;
        if (std::abs(step) <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(1.0, std::abs(x))) {
            return x;
        }
    }
    if (ok && std::isfinite(x) && std::abs(q_function(x) - p) <= 1e-13 * p) {
        return x;
    }
    // Fallback for the far tail where the density underflows.
    return bisect_root([p](double t) { return q_function(t) - p; }, 0.0, 40.0,
                       {.abs_tol = 1e-300, .rel_tol = 1e-16, .max_iter = 4000});
}

} // namespace

double q_inverse(double p)
{
    if (!(p > 0.0) || !(p < 1.0)) {
        throw DomainError(fmt::format("q_inverse: p={} outside (0, 1)", p));
    }
    if (p <= 0.5) {
        return upper_tail_inverse(p);
    }
    // 1 - p is exact for p in [0.5, 1).
    return -upper_tail_inverse(1.0 - p);
}

double bisect_root(const ScalarFn& f, double lo, double hi, const ToleranceConfig& tol)
{
    tol.validate();
    if (lo > hi) {
        std::swap(lo, hi);
    }
    double flo = f(lo);
    const double fhi = f(hi);
    if (flo == 0.0) {
        return lo;
    }
    if (fhi == 0.0) {
        return hi;
    }
    if (std::isnan(flo) || std::isnan(fhi) || std::signbit(flo) == std::signbit(fhi)) {
        throw BracketError(fmt::format("bisect_root: no sign change on [{}, {}] (f={}, {})", lo, hi, flo, fhi));
    }
    for (int iter = 0; iter < tol.max_iter; ++iter) {
        const double mid = lo + 0.5 * (hi - lo);
        if (hi - lo < std::max(tol.abs_tol, tol.rel_tol * std::abs(mid)) || mid <= lo || mid >= hi) {
            return mid;
        }
        const double fm = f(mid);
        if (fm == 0.0) {
            return mid;
        }
        if (std::signbit(fm) == std::signbit(flo)) {
            lo = mid;
            flo = fm;
        } else {
            hi = mid;
        }
    }
    throw ConvergenceError(fmt::format("bisect_root: {} iterations exhausted, bracket [{}, {}]", tol.max_iter, lo, hi));
}

namespace {

using Point = std::vector<double>;

double inf_norm(const Point& x)
{
    double m = 0.0;
    for (double v : x) {
        m = std::max(m, std::abs(v));
    }
    return m;
}

std::vector<Point> initial_simplex(const Point& x0)
{
    std::vector<Point> simplex(x0.size() + 1, x0);
    for (std::size_t i = 0; i < x0.size(); ++i) {
        const double h = x0[i] != 0.0 ? 0.1 * std::abs(x0[i]) : 0.1;
        simplex[i + 1][i] += h;
    }
    return simplex;
}

} // namespace

MinimizeResult nelder_mead_minimize(const VectorFn& objective, std::span<const double> init, const ToleranceConfig& tol)
{
    tol.validate();
    const std::size_t n = init.size();
    MinimizeResult result;
    result.x.assign(init.begin(), init.end());

    auto eval = [&](const Point& x) {
        ++result.evaluations;
        const double v = objective(x);
        return std::isnan(v) ? std::numeric_limits<double>::infinity() : v;
    };
    result.value = eval(result.x);
    if (!std::isfinite(result.value)) {
        throw DomainError("nelder_mead_minimize: objective not finite at the initial point");
    }
    if (n == 0) {
        result.converged = true;
        return result;
    }

    // Gao & Han (2012) dimension-adaptive coefficients.
    const double dn = static_cast<double>(n);
    const double reflect = 1.0;
    const double expand = 1.0 + 2.0 / dn;
    const double contract = 0.75 - 0.5 / dn;
    const double shrink = 1.0 - 1.0 / dn;

    std::vector<Point> simplex = initial_simplex(result.x);
    std::vector<double> values(n + 1);
    values[0] = result.value;
    for (std::size_t i = 1; i <= n; ++i) {
        values[i] = eval(simplex[i]);
    }
    std::vector<std::size_t> order(n + 1);
    Point centroid(n), trial(n), trial2(n);

    double last_restart_value = std::numeric_limits<double>::infinity();
    constexpr int kMaxRestarts = 20;
    int restarts = 0;

    while (result.iterations < tol.max_iter) {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
        const std::size_t best = order.front();
        const std::size_t worst = order.back();
        const std::size_t second_worst = order[n - 1];

        double diameter = 0.0;
        for (std::size_t i = 0; i <= n; ++i) {
            for (std::size_t k = 0; k < n; ++k) {
                diameter = std::max(diameter, std::abs(simplex[i][k] - simplex[best][k]));
            }
        }
        if (diameter <= std::max(tol.abs_tol, tol.rel_tol * inf_norm(simplex[best]))) {
            const double improvement = last_restart_value - values[best];
            const bool stalled =
                improvement <= 1e-14 * std::max(1.0, std::abs(values[best])) || restarts >= kMaxRestarts;
            result.x = simplex[best];
            result.value = values[best];
            if (stalled) {
                result.converged = true;
                return result;
            }
            // Restart around the best vertex to escape premature collapse.
            last_restart_value = values[best];
            ++restarts;
            Point x0 = simplex[best];
            const double v0 = values[best];
            simplex = initial_simplex(x0);
            values[0] = v0;
            for (std::size_t i = 1; i <= n; ++i) {
                values[i] = eval(simplex[i]);
            }
            continue;
        }

        ++result.iterations;
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == worst) {
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                centroid[k] += simplex[i][k] / dn;
            }
        }
        auto along = [&](double t, Point& out) {
            for (std::size_t k = 0; k < n; ++k) {
                out[k] = centroid[k] + t * (simplex[worst][k] - centroid[k]);
            }
        };

        along(-reflect, trial);
        const double f_reflect = eval(trial);
        if (f_reflect < values[best]) {
            along(-reflect * expand, trial2);
            const double f_expand = eval(trial2);
            if (f_expand < f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_expand;
            } else {
                simplex[worst] = trial;
                values[worst] = f_reflect;
            }
            continue;
        }
        if (f_reflect < values[second_worst]) {
            simplex[worst] = trial;
            values[worst] = f_reflect;
            continue;
        }
        if (f_reflect < values[worst]) {
            along(-reflect * contract, trial2);  // outside contraction
            const double f_c = eval(trial2);
            if (f_c <= f_reflect) {
                simplex[worst] = trial2;
                values[worst] = f_c;
                continue;
            }
        } else {
            along(contract, trial2);  // inside contraction
            const double f_c = eval(trial2);
            if (f_c < values[worst]) {
                simplex[worst] = trial2;
                values[worst] = f_c;
                continue;
            }
        }
        for (std::size_t i = 0; i <= n; ++i) {
            if (i == best) {
                continue;
            }
            for (std::size_t k = 0; k < n; ++k) {
                simplex[i][k] = simplex[best][k] + shrink * (simplex[i][k] - simplex[best][k]);
            }
            values[i] = eval(simplex[i]);
        }
    }

    const auto best = static_cast<std::size_t>(std::min_element(values.begin(), values.end()) - values.begin());
    if (values[best] <= result.value) {
        result.x = simplex[best];
        result.value = values[best];
    }
    result.converged = false;
    return result;
}

std::vector<double> finite_difference(const VectorFn& f, std::span<const double> x, double step)
{
    std::vector<double> grad(x.size());
    std::vector<double> probe(x.begin(), x.end());
    for (std::size_t i = 0; i < x.size(); ++i) {
        probe[i] = x[i] + step;
        const double up = f(probe);
        probe[i] = x[i] - step;
        const double down = f(probe);
        probe[i] = x[i];
        grad[i] = (up - down) / (2.0 * step);
    }
    return grad;
}

double finite_difference(const ScalarFn& f, double x, double step)
{
    return (f(x + step) - f(x - step)) / (2.0 * step);
}

} // namespace numerics
} // namespace semalloc
