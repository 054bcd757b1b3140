#include "oracles.hpp"

#include <doctest.h>

#include "semalloc/errors.hpp"
#include "semalloc/numerics.hpp"
#include "semalloc/perception.hpp"
#include "semalloc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <vector>

using namespace semalloc;

namespace {

oracle::Surface closed_form(const SurfaceParams& s)
{
    return {s.p0, s.pmax, s.tau1, s.tau2, s.beta1, s.beta2};
}

double log_uniform(Rng& rng, double lo, double hi)
{
    return lo * std::pow(hi / lo, rng.uniform());
}

std::vector<double> sample_grid()
{
    std::vector<double> g{0.0};
    const auto tail = oracle::logspace(1e-5, 0.5, 23);
    g.insert(g.end(), tail.begin(), tail.end());
    return g;
}

SampleSet synthetic_surface(const SurfaceParams& truth, double noise_sd, std::uint64_t seed)
{
    const auto f = closed_form(truth);
    Rng rng(RandomSeed{seed});
    SampleSet out;
    for (double x : sample_grid()) {
        for (double y : sample_grid()) {
            double p = f(x, y) + noise_sd * rng.normal();
            p = std::clamp(p, 0.0, 1.0);
            out.push_back({x, y, p});
        }
    }
    return out;
}

void check_params_close(const SurfaceParams& got, const SurfaceParams& want, double rel)
{
    CHECK(oracle::rel_err(got.p0, want.p0) < rel);
    CHECK(oracle::rel_err(got.pmax, want.pmax) < rel);
    CHECK(oracle::rel_err(got.tau1, want.tau1) < rel);
    CHECK(oracle::rel_err(got.tau2, want.tau2) < rel);
    CHECK(oracle::rel_err(got.beta1, want.beta1) < rel);
    CHECK(oracle::rel_err(got.beta2, want.beta2) < rel);
}

} // namespace

TEST_CASE("eval_surface at the origin is the floor")
{
    const auto s = perception::default_surface();
    CHECK(eval_surface(s, 0.0, 0.0) == s.p0);
    const SurfaceParams other{.p0 = 0.1, .pmax = 0.7, .tau1 = 0.2, .tau2 = 0.01, .beta1 = 0.5, .beta2 = 2.0};
    CHECK(eval_surface(other, 0.0, 0.0) == 0.1);
}

TEST_CASE("eval_surface approaches the ceiling monotonically")
{
    const auto s = perception::default_surface();
    for (double y : {0.0, 1e-4, 1e-3}) {
        double prev = eval_surface(s, 0.0, y);
        for (double x = 1e-5; x <= 0.5; x *= 1.3) {
            const double v = eval_surface(s, x, y);
            REQUIRE(v >= prev);
            REQUIRE(v <= s.pmax);
            prev = v;
        }
        // Strictly below the ceiling while the decay term is representable.
        CHECK(eval_surface(s, 0.1, y) < s.pmax);
        CHECK(s.pmax - eval_surface(s, 0.5, y) < 1e-40);
    }
}

TEST_CASE("eval_surface matches a dense tabulation of the closed form")
{
    const auto s = perception::default_surface();
    const auto f = closed_form(s);
    for (int i = 0; i <= 200; ++i) {
        for (int j = 0; j <= 200; ++j) {
            const double x = 0.05 * i / 200.0;
            const double y = 0.01 * j / 200.0;
            REQUIRE(eval_surface(s, x, y) == doctest::Approx(f(x, y)).epsilon(1e-14));
        }
    }
}

TEST_CASE("eval_surface domain")
{
    const auto s = perception::default_surface();
    CHECK_NOTHROW(eval_surface(s, 0.5, 0.5));
    CHECK_THROWS_AS(eval_surface(s, -1e-12, 0.1), DomainError);
    CHECK_THROWS_AS(eval_surface(s, 0.1, 0.5000001), DomainError);
    CHECK_THROWS_AS(eval_surface(s, std::nan(""), 0.1), DomainError);
}

TEST_CASE("surface parameter validation")
{
    CHECK_NOTHROW(perception::default_surface().validate());
    CHECK_THROWS_AS((SurfaceParams{.p0 = 0.9, .pmax = 0.9}).validate(), DomainError);
    CHECK_THROWS_AS((SurfaceParams{.p0 = -0.1}).validate(), DomainError);
    CHECK_THROWS_AS((SurfaceParams{.pmax = 1.1}).validate(), DomainError);
    CHECK_THROWS_AS((SurfaceParams{.tau2 = 0.0}).validate(), DomainError);
    CHECK_THROWS_AS((SurfaceParams{.beta1 = -1.0}).validate(), DomainError);
    CHECK_THROWS_AS((StreamCurve{.p0 = 0.5, .pmax = 0.4}).validate(), DomainError);
}

TEST_CASE("monotone surface property over random parameters")
{
    Rng rng(RandomSeed{31});
    for (int trial = 0; trial < 200; ++trial) {
        const double p0 = 0.8 * rng.uniform();
        const SurfaceParams s{.p0 = p0,
                              .pmax = p0 + (1.0 - p0) * (0.05 + 0.95 * rng.uniform()),
                              .tau1 = log_uniform(rng, 1e-5, 0.5),
                              .tau2 = log_uniform(rng, 1e-5, 0.5),
                              .beta1 = log_uniform(rng, 0.3, 3.0),
                              .beta2 = log_uniform(rng, 0.3, 3.0)};
        for (int k = 0; k < 50; ++k) {
            const double x = 0.5 * rng.uniform();
            const double y = 0.5 * rng.uniform();
            const double x2 = x + (0.5 - x) * rng.uniform();
            const double y2 = y + (0.5 - y) * rng.uniform();
            REQUIRE(eval_surface(s, x2, y2) >= eval_surface(s, x, y));
        }
    }
}

TEST_CASE("surface partials are non-negative and match finite differences")
{
    Rng rng(RandomSeed{41});
    const std::vector<SurfaceParams> surfaces{
        perception::default_surface(),
        {.p0 = 0.2, .pmax = 0.9, .tau1 = 2e-2, .tau2 = 3e-3, .beta1 = 0.7, .beta2 = 1.6},
    };
    for (const auto& s : surfaces) {
        const auto f = closed_form(s);
        int checked_in_double = 0;
        for (int k = 0; k < 100; ++k) {
            const double x = log_uniform(rng, 1e-6, std::min(0.45, 5.0 * s.tau1));
            const double y = log_uniform(rng, 1e-6, std::min(0.45, 5.0 * s.tau2));
            const auto [d1, d2] = surface_partials(s, x, y);
            INFO("psi = (" << x << ", " << y << ")");
            REQUIRE(d1 >= 0.0);
            REQUIRE(d2 >= 0.0);

            // Central differences of the closed form in extended precision.
            const long double h1 = 1e-5L * x;
            const long double h2 = 1e-5L * y;
            const auto fd1 = static_cast<double>((f.value_ld(x + h1, y) - f.value_ld(x - h1, y)) / (2.0L * h1));
            const auto fd2 = static_cast<double>((f.value_ld(x, y + h2) - f.value_ld(x, y - h2)) / (2.0L * h2));
            REQUIRE(oracle::rel_err(d1, fd1) < 1e-5);
            REQUIRE(oracle::rel_err(d2, fd2) < 1e-5);

            // In double precision the difference quotient loses digits once P
            // sits within ~1e-4 of the ceiling; check the library's
            // finite_difference where the surface is still resolvable.
            if (s.pmax - eval_surface(s, x, y) > 1e-4 * (s.pmax - s.p0)) {
                ++checked_in_double;
                const double g1 = numerics::finite_difference([&](double t) { return eval_surface(s, t, y); }, x, 1e-5 * x);
                const double g2 = numerics::finite_difference([&](double t) { return eval_surface(s, x, t); }, y, 1e-5 * y);
                REQUIRE(oracle::rel_err(d1, g1) < 1e-5);
                REQUIRE(oracle::rel_err(d2, g2) < 1e-5);
            }
        }
        CHECK(checked_in_double > 50);
    }
}

TEST_CASE("finite_difference gradient of the surface matches the analytic partials")
{
    const auto s = perception::default_surface();
    const std::vector<double> at{2e-3, 5e-4};
    const auto g = numerics::finite_difference([&](std::span<const double> v) { return eval_surface(s, v[0], v[1]); },
                                               at, 1e-9);
    const auto [d1, d2] = surface_partials(s, at[0], at[1]);
    CHECK(oracle::rel_err(g[0], d1) < 1e-5);
    CHECK(oracle::rel_err(g[1], d2) < 1e-5);
}

TEST_CASE("surface partial saturates as the other BER grows")
{
    const SurfaceParams s{.p0 = 0.3, .pmax = 0.95, .tau1 = 0.05, .tau2 = 0.02, .beta1 = 1.0, .beta2 = 1.0};
    double prev = surface_partials(s, 0.01, 0.0).first;
    for (double y = 0.01; y <= 0.5; y += 0.01) {
        const double d1 = surface_partials(s, 0.01, y).first;
        REQUIRE(d1 < prev);
        prev = d1;
    }
    CHECK(prev < 1e-9);
}

TEST_CASE("surface partials at zero BER")
{
    const SurfaceParams rough{.beta1 = 0.5, .beta2 = 1.0};
    CHECK_THROWS_AS(surface_partials(rough, 0.0, 0.01), SingularityError);
    CHECK_NOTHROW(surface_partials(rough, 1e-4, 0.0));
    const auto s = perception::default_surface();
    const auto [d1, d2] = surface_partials(s, 0.0, 0.0);
    CHECK(d1 == doctest::Approx((s.pmax - s.p0) / s.tau1));
    CHECK(d2 == doctest::Approx((s.pmax - s.p0) / s.tau2));
    const SurfaceParams smooth{.beta1 = 2.0, .beta2 = 1.0};
    CHECK(surface_partials(smooth, 0.0, 0.0).first == 0.0);
}

TEST_CASE("semantic values of the bundled curves")
{
    CHECK(semantic_value_transmitted(perception::default_prompt_curve()) == 0.5887);
    CHECK(semantic_value_transmitted(perception::default_edge_curve()) == 0.3596);
    CHECK(semantic_value_transmitted(StreamCurve{.p0 = 1.0, .pmax = 1.0, .tau = 1e-3, .beta = 1.0}) == 0.0);
}

TEST_CASE("received semantic value")
{
    for (const auto& c : {perception::default_prompt_curve(), perception::default_edge_curve()}) {
        CHECK(semantic_value_received(c, 0.0) == semantic_value_transmitted(c));
        double prev = semantic_value_received(c, 0.0);
        for (int i = 1; i <= 10000; ++i) {
            const double v = semantic_value_received(c, 0.5 * i / 10000.0);
            REQUIRE(v <= prev);
            REQUIRE(v <= semantic_value_transmitted(c));
            prev = v;
        }
    }
    // The edge map loses a larger share of its value at every BER.
    const auto prompt = perception::default_prompt_curve();
    const auto edge = perception::default_edge_curve();
    for (double psi : oracle::logspace(1e-5, 1e-2, 40)) {
        const double kept_prompt = semantic_value_received(prompt, psi) / semantic_value_transmitted(prompt);
        const double kept_edge = semantic_value_received(edge, psi) / semantic_value_transmitted(edge);
        REQUIRE(kept_edge < kept_prompt);
    }
    CHECK(edge.tau < prompt.tau);
}

TEST_CASE("received value bounded by transmitted value for random curves")
{
    Rng rng(RandomSeed{55});
    for (int t = 0; t < 500; ++t) {
        const double p0 = 0.9 * rng.uniform();
        const StreamCurve c{.p0 = p0,
                            .pmax = p0 + (1.0 - p0) * (0.01 + 0.99 * rng.uniform()),
                            .tau = log_uniform(rng, 1e-5, 1.0),
                            .beta = log_uniform(rng, 0.2, 4.0)};
        const double psi = 0.5 * rng.uniform();
        REQUIRE(semantic_value_received(c, psi) <= semantic_value_transmitted(c));
    }
}

TEST_CASE("curve inversion")
{
    const auto c = perception::default_edge_curve();
    for (double psi : oracle::logspace(1e-7, 5e-3, 30)) {
        const double p = eval_curve(c, psi);
        REQUIRE(oracle::rel_err(invert_curve(c, p), psi) < 1e-8);
    }
    CHECK(invert_curve(c, c.p0) == 0.0);
    CHECK_THROWS_AS(invert_curve(c, c.pmax), DomainError);
    CHECK_THROWS_AS(invert_curve(c, c.p0 - 0.01), DomainError);
}

TEST_CASE("fit_surface recovers exact data")
{
    const SurfaceParams truth = perception::default_surface();
    const auto data = synthetic_surface(truth, 0.0, 1);
    const SurfaceParams init{.p0 = 0.25, .pmax = 0.9, .tau1 = 8e-3, .tau2 = 6e-4, .beta1 = 0.8, .beta2 = 1.3};
    const auto fit = fit_surface(data, init);
    CHECK(fit.rmse < 1e-8);
    CHECK(fit.samples == data.size());
    check_params_close(fit.params, truth, 1e-3);
    CHECK_NOTHROW(fit.params.validate());
}

TEST_CASE("fit_surface with noise")
{
    const SurfaceParams truth = perception::default_surface();
    const auto data = synthetic_surface(truth, 0.01, 2024);
    const auto fit = fit_surface(data, SurfaceParams{.p0 = 0.25, .pmax = 0.9, .tau1 = 8e-3, .tau2 = 6e-4});
    CHECK(fit.rmse <= 0.012);
    check_params_close(fit.params, truth, 0.05);
    const auto automatic = fit_surface_auto(data);
    CHECK(automatic.rmse <= fit.rmse + 1e-12);
    check_params_close(automatic.params, truth, 0.05);
}

TEST_CASE("fit_surface on a second shape")
{
    const SurfaceParams truth{.p0 = 0.15, .pmax = 0.85, .tau1 = 2e-2, .tau2 = 2e-4, .beta1 = 0.7, .beta2 = 1.5};
    const auto fit = fit_surface_auto(synthetic_surface(truth, 0.0, 1));
    CHECK(fit.rmse < 1e-8);
    check_params_close(fit.params, truth, 1e-3);
}

TEST_CASE("refitting exact samples of a fitted surface is idempotent")
{
    const auto first = fit_surface_auto(synthetic_surface(perception::default_surface(), 0.01, 7)).params;
    const auto second = fit_surface_auto(synthetic_surface(first, 0.0, 1)).params;
    check_params_close(second, first, 1e-3);
}

TEST_CASE("fit preconditions")
{
    SampleSet few{{0, 0, 0.3}, {0.1, 0, 0.9}, {0, 0.1, 0.9}, {0.1, 0.1, 0.95}, {0.01, 0.01, 0.8}};
    CHECK_THROWS_AS(fit_surface(few, {}), DomainError);
    CurveSampleSet few_curve{{0, 0.4}, {0.1, 0.9}, {0.01, 0.7}};
    CHECK_THROWS_AS(fit_curve(few_curve, {}), DomainError);
    SampleSet bad(8, SurfaceSample{0.6, 0.0, 0.5});
    CHECK_THROWS_AS(fit_surface(bad, {}), DomainError);
}

TEST_CASE("fit_curve recovers the bundled curves")
{
    for (const auto& truth : {perception::default_prompt_curve(), perception::default_edge_curve()}) {
        CurveSampleSet data;
        for (double psi : sample_grid()) {
            data.push_back({psi, eval_curve(truth, psi)});
        }
        const auto fit = fit_curve_auto(data);
        CHECK(fit.rmse < 1e-8);
        CHECK(oracle::rel_err(fit.params.p0, truth.p0) < 1e-3);
        CHECK(oracle::rel_err(fit.params.pmax, truth.pmax) < 1e-3);
        CHECK(oracle::rel_err(fit.params.tau, truth.tau) < 1e-3);
        CHECK(oracle::rel_err(fit.params.beta, truth.beta) < 1e-3);
    }
}

TEST_CASE("solve_psi2_on_constraint")
{
    const auto s = perception::default_surface();
    const auto f = closed_form(s);
    const double psi1 = 2e-4;

    const double boundary = eval_surface(s, psi1, 0.0);
    CHECK(solve_psi2_on_constraint(s, psi1, boundary) == 0.0);

    for (double target : {0.4, 0.55, 0.7, 0.9}) {
        const double y = solve_psi2_on_constraint(s, psi1, target);
        CHECK(std::fabs(eval_surface(s, psi1, y) - target) < 1e-10);
        CHECK(oracle::rel_err(y, f.psi2_at(psi1, target)) < 1e-9);

        // Dense scan for the minimiser of |P - target|.
        const int n = 200000;
        const double hi = 0.02;
        double best = std::numeric_limits<double>::infinity();
        double arg = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double t = hi * k / n;
            const double d = std::fabs(f(psi1, t) - target);
            if (d < best) {
                best = d;
                arg = t;
            }
        }
        CHECK(std::fabs(y - arg) <= hi / n);
    }
    CHECK_THROWS_AS(solve_psi2_on_constraint(s, psi1, boundary - 1e-6), InfeasibleError);
    CHECK_THROWS_AS(solve_psi2_on_constraint(s, psi1, 0.96), InfeasibleError);
}

TEST_CASE("constraint line endpoints on the default surface")
{
    const auto s = perception::default_surface();
    const auto f = closed_form(s);
    for (double target : {0.35, 0.5, 0.6, 0.8, 0.94}) {
        const auto line = constraint_line_endpoints(s, target);
        CHECK(std::fabs(eval_surface(s, line.left.psi1, line.left.psi2) - target) < 1e-10);
        CHECK(std::fabs(eval_surface(s, line.right.psi1, line.right.psi2) - target) < 1e-10);
        CHECK(line.right.psi1 >= line.left.psi1);
        CHECK(line.right.psi2 <= line.left.psi2);

        // Boundary scan: feasible psi1 are those with P(psi1, 0) <= target.
        const int n = 100000;
        const double hi = 0.05;
        double max_feasible = 0.0;
        for (int k = 0; k <= n; ++k) {
            const double x = hi * k / n;
            if (f(x, 0.0) <= target && f(x, 0.5) >= target) {
                max_feasible = x;
            }
        }
        CHECK(line.left.psi1 == 0.0);
        CHECK(std::fabs(line.right.psi1 - max_feasible) <= hi / n);
        CHECK(line.right.psi2 == 0.0);
    }
}

TEST_CASE("constraint line with a binding upper edge")
{
    // Slow decay in psi2 so the top edge psi2 = 0.5 cuts the level set.
    const SurfaceParams s{.p0 = 0.3, .pmax = 0.95, .tau1 = 5e-3, .tau2 = 0.5, .beta1 = 1.0, .beta2 = 1.0};
    const auto f = closed_form(s);
    const double target = 0.8;
    const auto line = constraint_line_endpoints(s, target);
    CHECK(line.left.psi2 == 0.5);
    CHECK(line.left.psi1 > 0.0);
    CHECK(std::fabs(eval_surface(s, line.left.psi1, line.left.psi2) - target) < 1e-10);
    CHECK(std::fabs(eval_surface(s, line.right.psi1, line.right.psi2) - target) < 1e-10);

    const int n = 100000;
    const double hi = 0.05;
    double min_feasible = hi;
    double max_feasible = 0.0;
    for (int k = 0; k <= n; ++k) {
        const double x = hi * k / n;
        if (f(x, 0.0) <= target && f(x, 0.5) >= target) {
            min_feasible = std::min(min_feasible, x);
            max_feasible = std::max(max_feasible, x);
        }
    }
    CHECK(std::fabs(line.left.psi1 - min_feasible) <= hi / n);
    CHECK(std::fabs(line.right.psi1 - max_feasible) <= hi / n);

    // Per-stream caps shrink the box.
    const auto capped = constraint_line_endpoints(s, 0.6, {0.375, 0.3});
    CHECK(capped.left.psi2 <= 0.3);
    CHECK(capped.right.psi1 <= 0.375);
    CHECK(std::fabs(eval_surface(s, capped.left.psi1, capped.left.psi2) - 0.6) < 1e-10);
}

TEST_CASE("constraint line feasibility")
{
    const auto s = perception::default_surface();
    CHECK_THROWS_AS(constraint_line_endpoints(s, s.p0), InfeasibleError);
    CHECK_THROWS_AS(constraint_line_endpoints(s, 0.2), InfeasibleError);
    CHECK_THROWS_AS(constraint_line_endpoints(s, 0.95), InfeasibleError);
    CHECK_THROWS_AS(constraint_line_endpoints(s, 0.99), InfeasibleError);
}

TEST_CASE("constraint line points are totally ordered")
{
    Rng rng(RandomSeed{77});
    const auto s = perception::default_surface();
    for (double target : {0.4, 0.7}) {
        const auto line = constraint_line_endpoints(s, target);
        std::vector<std::pair<double, double>> pts;
        for (int k = 0; k < 500; ++k) {
            const double x = line.left.psi1 + (line.right.psi1 - line.left.psi1) * rng.uniform();
            pts.emplace_back(x, solve_psi2_on_constraint(s, x, target));
        }
        std::sort(pts.begin(), pts.end());
        for (std::size_t k = 1; k < pts.size(); ++k) {
            REQUIRE(pts[k].second <= pts[k - 1].second);
        }
    }
}

TEST_CASE("implicit slope along the constraint matches finite differences")
{
    Rng rng(RandomSeed{99});
    const auto s = perception::default_surface();
    const auto f = closed_form(s);
    for (int k = 0; k < 100; ++k) {
        const double target = 0.35 + 0.55 * rng.uniform();
        const auto line = constraint_line_endpoints(s, target);
        const double x = line.left.psi1 + (line.right.psi1 - line.left.psi1) * (0.05 + 0.9 * rng.uniform());
        const double y = solve_psi2_on_constraint(s, x, target);
        const auto [d1, d2] = surface_partials(s, x, y);
        const double slope = -d1 / d2;
        const double h = 1e-6 * x;
        const double fd = (f.psi2_at(x + h, target) - f.psi2_at(x - h, target)) / (2.0 * h);
        REQUIRE(oracle::rel_err(slope, fd) < 1e-4);
    }
}
