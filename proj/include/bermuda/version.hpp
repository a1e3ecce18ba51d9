#pragma once

namespace bermuda {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace bermuda
