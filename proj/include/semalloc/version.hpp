#pragma once

namespace semalloc {

inline constexpr const char* kToolName = "semalloc";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace semalloc
