#include "semalloc/perception_io.hpp"

#include "semalloc/errors.hpp"

#include <charconv>
#include <cmath>
#include <fmt/core.h>
#include <fstream>
#include <istream>
#include <ostream>
#include <string_view>

namespace semalloc::io {

namespace {

std::string_view trim(std::string_view s)
{
    while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) {
        s.remove_prefix(1);
    }
    while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
        s.remove_suffix(1);
    }
    return s;
}

std::vector<std::string_view> split(std::string_view line)
{
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
        const auto comma = line.find(',', start);
        out.push_back(trim(line.substr(start, comma - start)));
        if (comma == std::string_view::npos) {
            break;
        }
        start = comma + 1;
    }
    return out;
}

double parse_field(std::string_view field, const std::string& source, std::size_t line_no)
{
    double v = 0.0;
    const auto* end = field.data() + field.size();
    const auto [ptr, ec] = std::from_chars(field.data(), end, v);
    if (field.empty() || ec != std::errc() || ptr != end || !std::isfinite(v)) {
        throw ParseError(fmt::format("{}:{}: cannot parse '{}' as a finite number", source, line_no, field));
    }
    return v;
}

std::string fmt_num(double v)
{
    return fmt::format("{:.17g}", v);
}

} // namespace

AnySampleSet parse_samples(std::istream& in, const std::string& source)
{
    std::string line;
    std::size_t line_no = 0;
    std::vector<std::string_view> header;
    std::string header_line;
    while (std::getline(in, line)) {
        ++line_no;
        if (!trim(line).empty()) {
            header_line = line;
            header = split(header_line);
            break;
        }
    }
    std::size_t columns = 0;
    if (header.size() == 3 && header[0] == "psi1" && header[1] == "psi2" && header[2] == "P") {
        columns = 3;
    } else if (header.size() == 2 && header[0] == "psi" && header[1] == "P") {
        columns = 2;
    } else {
        throw ParseError(fmt::format("{}:{}: expected header 'psi1,psi2,P' or 'psi,P'", source, line_no));
    }

    SampleSet surface;
    CurveSampleSet curve;
    while (std::getline(in, line)) {
        ++line_no;
        if (trim(line).empty()) {
            continue;
        }
        const auto fields = split(line);
        if (fields.size() != columns) {
            throw ParseError(
                fmt::format("{}:{}: expected {} fields, found {}", source, line_no, columns, fields.size()));
        }
        if (columns == 3) {
            surface.push_back({parse_field(fields[0], source, line_no), parse_field(fields[1], source, line_no),
                               parse_field(fields[2], source, line_no)});
        } else {
            curve.push_back({parse_field(fields[0], source, line_no), parse_field(fields[1], source, line_no)});
        }
    }
    if (columns == 3) {
        return surface;
    }
    return curve;
}

AnySampleSet read_samples(const std::string& path)
{
    std::ifstream in(path);
    if (!in) {
        throw ParseError(fmt::format("cannot open sample file '{}'", path));
    }
    return parse_samples(in, path);
}

void write_samples(std::ostream& out, const SampleSet& data)
{
    out << "psi1,psi2,P\n";
    for (const auto& r : data) {
        out << fmt_num(r.psi1) << ',' << fmt_num(r.psi2) << ',' << fmt_num(r.p) << '\n';
    }
}

void write_samples(std::ostream& out, const CurveSampleSet& data)
{
    out << "psi,P\n";
    for (const auto& r : data) {
        out << fmt_num(r.psi) << ',' << fmt_num(r.p) << '\n';
    }
}

nlohmann::json to_json(const SurfaceParams& s)
{
    return {{"family", kSurfaceFamily}, {"p0", s.p0},       {"pmax", s.pmax},  {"tau1", s.tau1},
            {"tau2", s.tau2},           {"beta1", s.beta1}, {"beta2", s.beta2}};
}

nlohmann::json to_json(const StreamCurve& c)
{
    nlohmann::json j = {{"family", kCurveFamily}, {"p0", c.p0}, {"pmax", c.pmax}, {"tau", c.tau}, {"beta", c.beta}};
    if (c.semantic_value) {
        j["semantic_value"] = *c.semantic_value;
    }
    return j;
}

namespace {

template <typename Params>
nlohmann::json fit_json(const FitResult<Params>& r)
{
    auto j = to_json(r.params);
    j["fit"] = {{"rmse", r.rmse}, {"samples", r.samples}, {"iterations", r.iterations}, {"converged", r.converged}};
    return j;
}

double number(const nlohmann::json& j, const char* key)
{
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ParseError(fmt::format("missing numeric field '{}'", key));
    }
    return j.at(key).get<double>();
}

void check_family(const nlohmann::json& j, const char* expected)
{
    if (!j.is_object()) {
        throw ParseError("parameter document must be a JSON object");
    }
    if (j.contains("family") && j.at("family") != expected) {
        throw ParseError(fmt::format("unsupported family {} (expected '{}')", j.at("family").dump(), expected));
    }
}

} // namespace

nlohmann::json to_json(const FitResult<SurfaceParams>& r)
{
    return fit_json(r);
}

nlohmann::json to_json(const FitResult<StreamCurve>& r)
{
    return fit_json(r);
}

SurfaceParams surface_from_json(const nlohmann::json& j)
{
    check_family(j, kSurfaceFamily);
    SurfaceParams s{number(j, "p0"),   number(j, "pmax"),  number(j, "tau1"),
                    number(j, "tau2"), number(j, "beta1"), number(j, "beta2")};
    s.validate();
    return s;
}

StreamCurve curve_from_json(const nlohmann::json& j)
{
    check_family(j, kCurveFamily);
    StreamCurve c;
    // Either p0 or the semantic value L = 1 - p0 may be given.
    if (j.contains("semantic_value")) {
        c.semantic_value = number(j, "semantic_value");
        c.p0 = j.contains("p0") ? number(j, "p0") : 1.0 - *c.semantic_value;
    } else {
        c.p0 = number(j, "p0");
    }
    c.pmax = number(j, "pmax");
    c.tau = number(j, "tau");
    c.beta = number(j, "beta");
    c.validate();
    return c;
}

} // namespace semalloc::io
