#pragma once

namespace gslr {

inline constexpr const char* kVersion = "0.1.0";

}  // namespace gslr
