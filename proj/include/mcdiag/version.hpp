#pragma once

namespace mcdiag {

inline constexpr const char* version_string = "0.1.0";
inline constexpr int report_schema_version = 1;

}  // namespace mcdiag
