#pragma once

namespace stereoloc {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace stereoloc
