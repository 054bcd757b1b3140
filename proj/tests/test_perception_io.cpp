#include <doctest.h>

#include "semalloc/errors.hpp"
#include "semalloc/perception_io.hpp"

#include <sstream>
#include <string>

using namespace semalloc;

namespace {

std::string parse_error(const std::string& text)
{
    std::istringstream in(text);
    try {
        io::parse_samples(in, "samples.csv");
    } catch (const ParseError& e) {
        return e.what();
    }
    return {};
}

} // namespace

TEST_CASE("surface sample files")
{
    std::istringstream in("psi1,psi2,P\n0,0,0.3\n1e-3, 2e-4 ,0.41\r\n\n0.5,0.5,0.95\n");
    const auto any = io::parse_samples(in);
    REQUIRE(std::holds_alternative<SampleSet>(any));
    const auto& rows = std::get<SampleSet>(any);
    REQUIRE(rows.size() == 3);
    CHECK(rows[1].psi1 == 1e-3);
    CHECK(rows[1].psi2 == 2e-4);
    CHECK(rows[1].p == 0.41);
}

TEST_CASE("curve sample files")
{
    std::istringstream in("psi,P\n0,0.4113\n0.01,0.9\n");
    const auto any = io::parse_samples(in);
    REQUIRE(std::holds_alternative<CurveSampleSet>(any));
    CHECK(std::get<CurveSampleSet>(any).size() == 2);
}

TEST_CASE("malformed sample files report the line")
{
    CHECK(parse_error("psi1,psi2,P\n0,0,0.3\n0.1,abc,0.4\n").find("samples.csv:3") != std::string::npos);
    CHECK(parse_error("psi1,psi2,P\n0,0\n").find(":2") != std::string::npos);
    CHECK(parse_error("x,y\n0,0\n").find(":1") != std::string::npos);
    CHECK(parse_error("").find("header") != std::string::npos);
    CHECK(parse_error("psi,P\n0,0.3,7\n").find(":2") != std::string::npos);
    CHECK(parse_error("psi,P\n0.1,0.3x\n").find(":2") != std::string::npos);
    CHECK(parse_error("psi,P\n0.1,nan\n").find(":2") != std::string::npos);
}

TEST_CASE("sample files round trip")
{
    SampleSet rows{{0.0, 0.0, 0.3}, {1.0 / 3.0, 1e-7, 0.123456789012345678}, {0.5, 0.25, 0.95}};
    std::ostringstream out;
    io::write_samples(out, rows);
    CHECK(out.str().rfind("psi1,psi2,P\n", 0) == 0);
    std::istringstream in(out.str());
    const auto back = std::get<SampleSet>(io::parse_samples(in));
    REQUIRE(back.size() == rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) {
        CHECK(back[i].psi1 == rows[i].psi1);
        CHECK(back[i].psi2 == rows[i].psi2);
        CHECK(back[i].p == rows[i].p);
    }

    CurveSampleSet curve{{0.0, 0.4113}, {2.0 / 3.0 * 1e-3, 0.7}};
    std::ostringstream cout_;
    io::write_samples(cout_, curve);
    CHECK(cout_.str().rfind("psi,P\n", 0) == 0);
    std::istringstream cin_(cout_.str());
    const auto cback = std::get<CurveSampleSet>(io::parse_samples(cin_));
    CHECK(cback[1].psi == curve[1].psi);
}

TEST_CASE("parameter documents round trip")
{
    const SurfaceParams s{.p0 = 0.31, .pmax = 0.93, .tau1 = 4e-3, .tau2 = 7e-4, .beta1 = 1.1, .beta2 = 0.9};
    const auto j = io::to_json(s);
    CHECK(j.at("family") == kSurfaceFamily);
    const auto back = io::surface_from_json(nlohmann::json::parse(j.dump()));
    CHECK(back.p0 == s.p0);
    CHECK(back.tau2 == s.tau2);
    CHECK(back.beta2 == s.beta2);

    FitResult<StreamCurve> fit{.params = {.p0 = 0.4113, .pmax = 0.95, .tau = 5e-3, .beta = 1.0},
                               .rmse = 1e-3,
                               .samples = 24,
                               .iterations = 300,
                               .converged = true};
    const auto fj = io::to_json(fit);
    CHECK(fj.at("family") == kCurveFamily);
    CHECK(fj.at("fit").at("rmse") == 1e-3);
    CHECK(fj.at("fit").at("samples") == 24);
    CHECK(io::curve_from_json(fj).p0 == 0.4113);
}

TEST_CASE("parameter document errors")
{
    CHECK_THROWS_AS(io::surface_from_json(nlohmann::json::array()), ParseError);
    CHECK_THROWS_AS(io::surface_from_json(nlohmann::json{{"p0", 0.3}}), ParseError);
    auto j = io::to_json(perception::default_surface());
    j["family"] = "polynomial";
    CHECK_THROWS_AS(io::surface_from_json(j), ParseError);
    auto bad = io::to_json(perception::default_surface());
    bad["pmax"] = 0.1;
    CHECK_THROWS_AS(io::surface_from_json(bad), DomainError);
}
