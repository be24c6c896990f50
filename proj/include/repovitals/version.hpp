#pragma once

namespace repovitals {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace repovitals
