#include "semalloc/perception.hpp"

#include "semalloc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <fmt/core.h>
#include <limits>
#include <optional>

namespace semalloc {

void SurfaceParams::validate() const
{
    if (!(p0 >= 0.0) || !(p0 < pmax) || !(pmax <= 1.0)) {
        throw DomainError(fmt::format("surface needs 0 <= p0 < pmax <= 1 (p0={}, pmax={})", p0, pmax));
    }
    if (!(tau1 > 0.0) || !(tau2 > 0.0) || !(beta1 > 0.0) || !(beta2 > 0.0) || !std::isfinite(tau1) ||
        !std::isfinite(tau2) || !std::isfinite(beta1) || !std::isfinite(beta2)) {
        throw DomainError(fmt::format("surface scales/shapes must be positive (tau=({}, {}), beta=({}, {}))", tau1,
                                      tau2, beta1, beta2));
    }
}

void StreamCurve::validate() const
{
    if (!(p0 >= 0.0) || !(p0 < pmax) || !(pmax <= 1.0)) {
        throw DomainError(fmt::format("curve needs 0 <= p0 < pmax <= 1 (p0={}, pmax={})", p0, pmax));
    }
    if (!(tau > 0.0) || !(beta > 0.0) || !std::isfinite(tau) || !std::isfinite(beta)) {
        throw DomainError(fmt::format("curve scale/shape must be positive (tau={}, beta={})", tau, beta));
    }
    if (semantic_value && !(std::abs(1.0 - p0 - *semantic_value) <= 4.0 * std::numeric_limits<double>::epsilon())) {
        throw DomainError(fmt::format("curve semantic value {} disagrees with p0={}", *semantic_value, p0));
    }
}

namespace perception {

SurfaceParams default_surface()
{
    return {};
}

StreamCurve default_prompt_curve()
{
    return {.p0 = 1.0 - 0.5887, .pmax = 0.95, .tau = 5e-3, .beta = 1.0, .semantic_value = 0.5887};
}

StreamCurve default_edge_curve()
{
    return {.p0 = 1.0 - 0.3596, .pmax = 0.95, .tau = 1e-3, .beta = 1.0, .semantic_value = 0.3596};
}

} // namespace perception

namespace {

void check_ber(double psi, const char* what)
{
    if (!(psi >= 0.0) || !(psi <= kMaxBerDomain)) {
        throw DomainError(fmt::format("{}: BER {} outside [0, {}]", what, psi, kMaxBerDomain));
    }
}

double decay_term(double psi, double tau, double beta)
{
    return std::pow(psi / tau, beta);
}

// p0 + (pmax - p0) (1 - exp(-e)). Exact at e = 0, monotone in e and never
// above pmax.
double rise(double p0, double pmax, double e)
{
    return std::min(pmax, p0 + (pmax - p0) * -std::expm1(-e));
}

// d/dpsi (psi/tau)^beta
double decay_slope(double psi, double tau, double beta)
{
    if (psi == 0.0) {
        if (beta < 1.0) {
            throw SingularityError(fmt::format("surface derivative undefined at psi=0 with beta={} < 1", beta));
        }
        return beta == 1.0 ? 1.0 / tau : 0.0;
    }
    return beta / tau * std::pow(psi / tau, beta - 1.0);
}

} // namespace

double eval_surface(const SurfaceParams& s, double psi1, double psi2)
{
    check_ber(psi1, "eval_surface");
    check_ber(psi2, "eval_surface");
    const double e = decay_term(psi1, s.tau1, s.beta1) + decay_term(psi2, s.tau2, s.beta2);
    return rise(s.p0, s.pmax, e);
}

std::pair<double, double> surface_partials(const SurfaceParams& s, double psi1, double psi2)
{
    check_ber(psi1, "surface_partials");
    check_ber(psi2, "surface_partials");
    const double e = decay_term(psi1, s.tau1, s.beta1) + decay_term(psi2, s.tau2, s.beta2);
    const double scale = (s.pmax - s.p0) * std::exp(-e);
    return {scale * decay_slope(psi1, s.tau1, s.beta1), scale * decay_slope(psi2, s.tau2, s.beta2)};
}

double eval_curve(const StreamCurve& c, double psi)
{
    check_ber(psi, "eval_curve");
    return rise(c.p0, c.pmax, decay_term(psi, c.tau, c.beta));
}

double invert_curve(const StreamCurve& c, double p)
{
    if (!(p >= c.p0) || !(p < c.pmax)) {
        throw DomainError(fmt::format("invert_curve: P={} outside [{}, {})", p, c.p0, c.pmax));
    }
    const double e = -std::log1p(-(p - c.p0) / (c.pmax - c.p0));
    return c.tau * std::pow(e, 1.0 / c.beta);
}

double semantic_value_transmitted(const StreamCurve& c)
{
    return c.semantic_value ? *c.semantic_value : 1.0 - c.p0;
}

double semantic_value_received(const StreamCurve& c, double psi)
{
    check_ber(psi, "semantic_value_received");
    // 1 - P(psi) = L - (pmax - p0) (1 - exp(-t)), exact L at psi = 0.
    return semantic_value_transmitted(c) + (c.pmax - c.p0) * std::expm1(-decay_term(psi, c.tau, c.beta));
}

namespace {

double logistic(double u)
{
    return 1.0 / (1.0 + std::exp(-u));
}

double logit(double v)
{
    return std::log(v / (1.0 - v));
}

// (p0, pmax) <-> unconstrained pair with 0 < p0 < pmax < 1.
void encode_levels(double p0, double pmax, double& u0, double& u1)
{
    constexpr double eps = 1e-9;
    p0 = std::clamp(p0, eps, 1.0 - 2 * eps);
    pmax = std::clamp(pmax, p0 + eps, 1.0 - eps);
    u0 = logit(p0);
    u1 = logit((pmax - p0) / (1.0 - p0));
}

void decode_levels(double u0, double u1, double& p0, double& pmax)
{
    p0 = logistic(u0);
    pmax = p0 + (1.0 - p0) * logistic(u1);
}

SurfaceParams decode_surface(std::span<const double> t)
{
    SurfaceParams s;
    decode_levels(t[0], t[1], s.p0, s.pmax);
    s.tau1 = std::exp(t[2]);
    s.tau2 = std::exp(t[3]);
    s.beta1 = std::exp(t[4]);
    s.beta2 = std::exp(t[5]);
    return s;
}

std::vector<double> encode_surface(const SurfaceParams& s)
{
    std::vector<double> t(6);
    encode_levels(s.p0, s.pmax, t[0], t[1]);
    t[2] = std::log(s.tau1);
    t[3] = std::log(s.tau2);
    t[4] = std::log(s.beta1);
    t[5] = std::log(s.beta2);
    return t;
}

StreamCurve decode_curve(std::span<const double> t)
{
    StreamCurve c;
    decode_levels(t[0], t[1], c.p0, c.pmax);
    c.tau = std::exp(t[2]);
    c.beta = std::exp(t[3]);
    return c;
}

std::vector<double> encode_curve(const StreamCurve& c)
{
    std::vector<double> t(4);
    encode_levels(c.p0, c.pmax, t[0], t[1]);
    t[2] = std::log(c.tau);
    t[3] = std::log(c.beta);
    return t;
}

void check_sample(double psi, double p, std::size_t row)
{
    if (!(psi >= 0.0) || !(psi <= kMaxBerDomain) || !(p >= 0.0) || !(p <= 1.0)) {
        throw DomainError(fmt::format("sample row {} out of domain (psi={}, P={})", row + 1, psi, p));
    }
}

// Surface evaluation without domain checks, used inside the fit loop.
double surface_value(const SurfaceParams& s, double psi1, double psi2)
{
    const double e = decay_term(psi1, s.tau1, s.beta1) + decay_term(psi2, s.tau2, s.beta2);
    return rise(s.p0, s.pmax, e);
}

double curve_value(const StreamCurve& c, double psi)
{
    return rise(c.p0, c.pmax, decay_term(psi, c.tau, c.beta));
}

} // namespace

FitResult<SurfaceParams> fit_surface(const SampleSet& data, const SurfaceParams& init, const ToleranceConfig& tol)
{
    if (data.size() < 6) {
        throw DomainError(fmt::format("fit_surface: {} rows, need at least 6", data.size()));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        check_sample(data[i].psi1, data[i].p, i);
        check_sample(data[i].psi2, data[i].p, i);
    }
    init.validate();
    const auto n = static_cast<double>(data.size());
    auto mse = [&](std::span<const double> t) {
        const SurfaceParams s = decode_surface(t);
        double acc = 0.0;
        for (const auto& row : data) {
            const double r = surface_value(s, row.psi1, row.psi2) - row.p;
            acc += r * r;
        }
        return acc / n;
    };
    const auto start = encode_surface(init);
    const auto res = numerics::nelder_mead_minimize(mse, start, tol);
    return {decode_surface(res.x), std::sqrt(res.value), data.size(), res.iterations, res.converged};
}

FitResult<StreamCurve> fit_curve(const CurveSampleSet& data, const StreamCurve& init, const ToleranceConfig& tol)
{
    if (data.size() < 4) {
        throw DomainError(fmt::format("fit_curve: {} rows, need at least 4", data.size()));
    }
    for (std::size_t i = 0; i < data.size(); ++i) {
        check_sample(data[i].psi, data[i].p, i);
    }
    init.validate();
    const auto n = static_cast<double>(data.size());
    auto mse = [&](std::span<const double> t) {
        const StreamCurve c = decode_curve(t);
        double acc = 0.0;
        for (const auto& row : data) {
            const double r = curve_value(c, row.psi) - row.p;
            acc += r * r;
        }
        return acc / n;
    };
    const auto start = encode_curve(init);
    const auto res = numerics::nelder_mead_minimize(mse, start, tol);
    return {decode_curve(res.x), std::sqrt(res.value), data.size(), res.iterations, res.converged};
}

namespace {

constexpr double kTauStarts[] = {1e-4, 1e-3, 1e-2, 1e-1};

template <typename Rows, typename Get>
std::pair<double, double> level_range(const Rows& data, Get get)
{
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    for (const auto& row : data) {
        lo = std::min(lo, get(row));
        hi = std::max(hi, get(row));
    }
    lo = std::clamp(lo, 1e-6, 0.99);
    hi = std::clamp(hi, lo + 1e-3, 1.0 - 1e-6);
    return {lo, hi};
}

template <typename Params>
bool better(const FitResult<Params>& a, const FitResult<Params>& b)
{
    return a.rmse < b.rmse;
}

} // namespace

FitResult<SurfaceParams> fit_surface_auto(const SampleSet& data)
{
    const auto [lo, hi] = level_range(data, [](const SurfaceSample& r) { return r.p; });
    std::optional<FitResult<SurfaceParams>> best;
    for (double t1 : kTauStarts) {
        for (double t2 : kTauStarts) {
            const SurfaceParams init{lo, hi, t1, t2, 1.0, 1.0};
            auto r = fit_surface(data, init);
            if (!best || better(r, *best)) {
                best = r;
            }
        }
    }
    // Polish from the winner.
    auto polished = fit_surface(data, best->params);
    return better(polished, *best) || polished.rmse == best->rmse ? polished : *best;
}

FitResult<StreamCurve> fit_curve_auto(const CurveSampleSet& data)
{
    const auto [lo, hi] = level_range(data, [](const CurveSample& r) { return r.p; });
    std::optional<FitResult<StreamCurve>> best;
    for (double t : kTauStarts) {
        const StreamCurve init{lo, hi, t, 1.0};
        auto r = fit_curve(data, init);
        if (!best || better(r, *best)) {
            best = r;
        }
    }
    auto polished = fit_curve(data, best->params);
    return better(polished, *best) || polished.rmse == best->rmse ? polished : *best;
}

double solve_psi2_on_constraint(const SurfaceParams& s, double psi1, double target, double psi2_max)
{
    const double at_zero = eval_surface(s, psi1, 0.0);
    const double at_max = eval_surface(s, psi1, psi2_max);
    if (target < at_zero || target > at_max) {
        throw InfeasibleError(fmt::format("target P={} not on the slice psi1={} (reachable [{}, {}])", target, psi1,
                                          at_zero, at_max));
    }
    if (target == at_zero) {
        return 0.0;
    }
    if (target == at_max) {
        return psi2_max;
    }
    return numerics::bisect_root([&](double psi2) { return eval_surface(s, psi1, psi2) - target; }, 0.0, psi2_max,
                                 kConstraintTol);
}

ConstraintLine constraint_line_endpoints(const SurfaceParams& s, double target, std::array<double, 2> upper)
{
    const double floor = eval_surface(s, 0.0, 0.0);
    const double ceiling = eval_surface(s, upper[0], upper[1]);
    if (!(target > floor) || !(target < ceiling)) {
        throw InfeasibleError(
            fmt::format("target P={} outside the achievable open range ({}, {})", target, floor, ceiling));
    }
    ConstraintLine line;
    if (eval_surface(s, 0.0, upper[1]) >= target) {
        line.left = {0.0, solve_psi2_on_constraint(s, 0.0, target, upper[1])};
    } else {
        double psi1 = numerics::bisect_root([&](double x) { return eval_surface(s, x, upper[1]) - target; }, 0.0,
                                            upper[0], kConstraintTol);
        // Keep the endpoint on the feasible side of the rounding boundary.
        while (eval_surface(s, psi1, upper[1]) < target) {
            psi1 = std::nextafter(psi1, upper[0]);
        }
        line.left = {psi1, solve_psi2_on_constraint(s, psi1, target, upper[1])};
    }
    if (eval_surface(s, upper[0], 0.0) <= target) {
        line.right = {upper[0], solve_psi2_on_constraint(s, upper[0], target, upper[1])};
    } else {
        double psi1 = numerics::bisect_root([&](double x) { return eval_surface(s, x, 0.0) - target; }, 0.0,
                                            upper[0], kConstraintTol);
        while (eval_surface(s, psi1, 0.0) > target) {
            psi1 = std::nextafter(psi1, 0.0);
        }
        line.right = {psi1, solve_psi2_on_constraint(s, psi1, target, upper[1])};
    }
    return line;
}

} // namespace semalloc
