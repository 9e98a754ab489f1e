#pragma once

namespace zani {

inline constexpr const char* kToolName = "zani";
inline constexpr const char* kToolVersion = "0.1.0";

} // namespace zani
