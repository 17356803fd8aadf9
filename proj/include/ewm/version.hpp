#pragma once

namespace ewm {

inline constexpr const char* kVersion = "ewm 0.1.0";

} // namespace ewm
