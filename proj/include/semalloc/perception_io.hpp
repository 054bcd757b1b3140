#pragma once

#include "semalloc/perception.hpp"

#include <iosfwd>
#include <json.hpp>
#include <string>
#include <variant>

namespace semalloc::io {

// Comma-separated sample files. Surface files carry the header
// `psi1,psi2,P`, single-stream curve files `psi,P`. ParseError messages
// include the 1-based line number.
using AnySampleSet = std::variant<SampleSet, CurveSampleSet>;

AnySampleSet parse_samples(std::istream& in, const std::string& source = "<stream>");
AnySampleSet read_samples(const std::string& path);

void write_samples(std::ostream& out, const SampleSet& data);
void write_samples(std::ostream& out, const CurveSampleSet& data);

nlohmann::json to_json(const SurfaceParams& s);
nlohmann::json to_json(const StreamCurve& c);
nlohmann::json to_json(const FitResult<SurfaceParams>& r);
nlohmann::json to_json(const FitResult<StreamCurve>& r);

SurfaceParams surface_from_json(const nlohmann::json& j);
StreamCurve curve_from_json(const nlohmann::json& j);

} // namespace semalloc::io
